#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "fdqn/errors.hpp"

namespace fdqn {

enum class ObsKind { Vector, Frames };

// One environment observation: a low-dimensional state vector, or a stack of
// grayscale frames kept 8-bit quantized and dequantized as v/255 when fed to
// the network. Plain value type; transitions store observations by value.
struct Observation {
    ObsKind kind = ObsKind::Vector;
    std::vector<float> vec;            // Vector
    std::vector<std::uint8_t> frames;  // Frames, stack*height*width bytes
    int stack = 0;
    int height = 0;
    int width = 0;

    static Observation from_vector(std::vector<float> values) {
        Observation o;
        o.kind = ObsKind::Vector;
        o.vec = std::move(values);
        return o;
    }

    static Observation from_frames(std::vector<std::uint8_t> data, int stack, int height, int width) {
        Observation o;
        o.kind = ObsKind::Frames;
        if (static_cast<std::size_t>(stack) * height * width != data.size())
            throw ContractViolation("Observation::from_frames: size does not match stack*height*width");
        o.frames = std::move(data);
        o.stack = stack;
        o.height = height;
        o.width = width;
        return o;
    }

    // Flattened length as seen by the network.
    int flat_size() const {
        return kind == ObsKind::Vector ? static_cast<int>(vec.size()) : stack * height * width;
    }

    // Writes the dequantized observation into dst (flat_size() floats).
    void write_flat(float* dst) const {
        if (kind == ObsKind::Vector) {
            for (std::size_t i = 0; i < vec.size(); ++i) dst[i] = vec[i];
        } else {
            for (std::size_t i = 0; i < frames.size(); ++i)
                dst[i] = static_cast<float>(frames[i]) * (1.0f / 255.0f);
        }
    }

    friend bool operator==(const Observation& a, const Observation& b) {
        return a.kind == b.kind && a.vec == b.vec && a.frames == b.frames && a.stack == b.stack &&
               a.height == b.height && a.width == b.width;
    }
};

}  // namespace fdqn
