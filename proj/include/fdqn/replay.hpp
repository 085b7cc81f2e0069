#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "fdqn/errors.hpp"
#include "fdqn/observation.hpp"
#include "fdqn/rng.hpp"

namespace fdqn {

// One experience tuple. The done flag marks terminal transitions so targets
// can cut the bootstrap there.
struct Transition {
    Observation state;
    int action = 0;
    float reward = 0.0f;
    Observation next_state;
    bool done = false;

    friend bool operator==(const Transition&, const Transition&) = default;
};

// Fixed-capacity FIFO ring of transitions with uniform mini-batch sampling
// (with replacement). Storage is dense and allocated up front; once full,
// each push overwrites the oldest element.
class ReplayBuffer {
  public:
    explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
        if (capacity == 0) throw ConfigError("ReplayBuffer: capacity must be >= 1");
        storage_.resize(capacity);
    }

    void push(Transition t) {
        storage_[write_cursor_] = std::move(t);
        write_cursor_ = (write_cursor_ + 1) % capacity_;
        if (size_ < capacity_) ++size_;
        ++total_pushes_;
    }

    std::vector<Transition> sample(std::size_t batch_size, Rng& rng) const {
        if (batch_size < 1) throw ContractViolation("ReplayBuffer::sample: batch_size must be >= 1");
        if (size_ < batch_size)
            throw NotReadyError("ReplayBuffer::sample: have " + std::to_string(size_) +
                                " transitions, need " + std::to_string(batch_size));
        std::vector<Transition> batch;
        batch.reserve(batch_size);
        for (std::size_t i = 0; i < batch_size; ++i)
            batch.push_back(storage_[static_cast<std::size_t>(rng.uniform_int(static_cast<int>(size_)))]);
        return batch;
    }

    std::size_t size() const { return size_; }
    std::size_t capacity() const { return capacity_; }
    std::uint64_t total_pushes() const { return total_pushes_; }

    // Stored element in ring order (0 .. size-1); for tests and diagnostics.
    const Transition& at(std::size_t i) const {
        if (i >= size_) throw ContractViolation("ReplayBuffer::at: index out of range");
        return storage_[i];
    }

  private:
    std::vector<Transition> storage_;
    std::size_t capacity_ = 0;
    std::size_t write_cursor_ = 0;
    std::size_t size_ = 0;
    std::uint64_t total_pushes_ = 0;
};

}  // namespace fdqn
