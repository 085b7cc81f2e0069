#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace fdqn {

// Dense row-major matrix. Used for observation batches and Q-value outputs.
template <typename T>
struct MatrixT {
    std::vector<T> data;
    int rows = 0;
    int cols = 0;

    MatrixT() = default;
    MatrixT(int r, int c) : data(static_cast<std::size_t>(r) * c, T(0)), rows(r), cols(c) {}

    T* row(int i) { return data.data() + static_cast<std::size_t>(i) * cols; }
    const T* row(int i) const { return data.data() + static_cast<std::size_t>(i) * cols; }

    T& operator()(int i, int j) { return data[static_cast<std::size_t>(i) * cols + j]; }
    const T& operator()(int i, int j) const { return data[static_cast<std::size_t>(i) * cols + j]; }

    bool all_finite() const {
        for (const T v : data)
            if (!std::isfinite(v)) return false;
        return true;
    }
};

using Matrix = MatrixT<float>;

}  // namespace fdqn
