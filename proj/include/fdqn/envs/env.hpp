#pragma once

#include <cstdint>
#include <string>

#include "fdqn/envs/frames.hpp"
#include "fdqn/errors.hpp"
#include "fdqn/observation.hpp"

namespace fdqn {

struct ObsShape {
    ObsKind kind = ObsKind::Vector;
    int dim = 0;  // vector observations
    int stack = 0, height = 0, width = 0;  // frame observations

    int flat_size() const { return kind == ObsKind::Vector ? dim : stack * height * width; }
};

struct EnvSpec {
    std::string name;
    int action_size = 0;
    ObsShape obs;
    int max_episode_steps = 0;
};

struct StepResult {
    Observation observation;
    float reward = 0.0f;
    bool done = false;
};

// An episodic environment. reset(seed) is deterministic per seed; after a
// step returns done=true the episode is over and step() must not be called
// again until reset().
class Env {
  public:
    virtual ~Env() = default;
    virtual const EnvSpec& spec() const = 0;
    virtual Observation reset(std::uint64_t seed) = 0;
    virtual StepResult step(int action) = 0;

    // Raw render of the current state for frame dumps; null for vector envs.
    virtual const Image8* native_frame() const { return nullptr; }

  protected:
    // Shared precondition checks for step().
    void require_step_ok(int action, bool started, bool done) const {
        if (!started || done)
            throw UsageError(spec().name + ": step() called before reset() or after episode end");
        if (action < 0 || action >= spec().action_size)
            throw ContractViolation(spec().name + ": action " + std::to_string(action) +
                                    " out of range [0," + std::to_string(spec().action_size) + ")");
    }
};

}  // namespace fdqn
