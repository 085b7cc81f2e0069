#pragma once

#include <cstdint>
#include <deque>
#include <fstream>
#include <string>
#include <vector>

#include "fdqn/errors.hpp"
#include "fdqn/observation.hpp"

namespace fdqn {

// 8-bit grayscale image, row-major.
struct Image8 {
    int height = 0;
    int width = 0;
    std::vector<std::uint8_t> pixels;

    Image8() = default;
    Image8(int h, int w) : height(h), width(w), pixels(static_cast<std::size_t>(h) * w, 0) {}

    std::uint8_t& at(int y, int x) { return pixels[static_cast<std::size_t>(y) * width + x]; }
    std::uint8_t at(int y, int x) const { return pixels[static_cast<std::size_t>(y) * width + x]; }

    friend bool operator==(const Image8&, const Image8&) = default;
};

// Block-mean downsample to target size, rounding half up into 8 bits. The raw
// dimensions must be integer multiples of the target.
inline Image8 preprocess_frame(const Image8& raw, int target_h = 48, int target_w = 48) {
    if (target_h <= 0 || target_w <= 0 || raw.height % target_h != 0 || raw.width % target_w != 0)
        throw ContractViolation("preprocess_frame: raw dimensions must be integer multiples of target");
    const int fy = raw.height / target_h;
    const int fx = raw.width / target_w;
    const unsigned area = static_cast<unsigned>(fy) * static_cast<unsigned>(fx);
    Image8 out(target_h, target_w);
    for (int y = 0; y < target_h; ++y) {
        for (int x = 0; x < target_w; ++x) {
            unsigned sum = 0;
            for (int by = 0; by < fy; ++by)
                for (int bx = 0; bx < fx; ++bx) sum += raw.at(y * fy + by, x * fx + bx);
            out.at(y, x) = static_cast<std::uint8_t>((sum + area / 2) / area);
        }
    }
    return out;
}

// Sliding window over the K most recent preprocessed frames. At reset the
// initial frame is replicated K times; afterwards the oldest frame drops as
// each new one arrives.
class FrameStack {
  public:
    explicit FrameStack(int depth) : depth_(depth) {
        if (depth < 1) throw ConfigError("FrameStack: depth must be >= 1");
    }

    void reset(const Image8& frame) {
        frames_.assign(static_cast<std::size_t>(depth_), frame);
    }

    void push(const Image8& frame) {
        if (frames_.empty()) throw UsageError("FrameStack: push before reset");
        frames_.pop_front();
        frames_.push_back(frame);
    }

    int depth() const { return depth_; }

    Observation observation() const {
        if (frames_.empty()) throw UsageError("FrameStack: observation before reset");
        const int h = frames_.front().height;
        const int w = frames_.front().width;
        std::vector<std::uint8_t> data;
        data.reserve(static_cast<std::size_t>(depth_) * h * w);
        for (const auto& f : frames_) data.insert(data.end(), f.pixels.begin(), f.pixels.end());
        return Observation::from_frames(std::move(data), depth_, h, w);
    }

  private:
    int depth_;
    std::deque<Image8> frames_;
};

// Binary PGM (P5) dump, one 8-bit image per file.
inline void write_pgm(const std::string& path, const Image8& img) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("write_pgm: cannot open " + path);
    out << "P5\n" << img.width << " " << img.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
    if (!out) throw IoError("write_pgm: write failed for " + path);
}

}  // namespace fdqn
