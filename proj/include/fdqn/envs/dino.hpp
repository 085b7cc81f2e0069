#pragma once

#include <cmath>
#include <deque>

#include "fdqn/envs/env.hpp"
#include "fdqn/envs/frames.hpp"
#include "fdqn/rng.hpp"

namespace fdqn {

// Pixel runner in the spirit of the Chrome Dino game. A 96x96 binary frame
// shows a fixed-column runner, a ground line, and obstacles scrolling in from
// the right with seeded random sizes and gaps (>= 24 px). Actions {0: run,
// 1: jump}; a jump is a fixed ballistic arc (initial vertical velocity 7
// px/step, gravity 1 px/step^2). Scroll speed starts at 2 px/step and grows
// by 0.001 per step, so every run ends eventually. Reward +1 per surviving
// step; colliding with an obstacle ends the episode with reward 0.
//
// Observations are stacks of 4 preprocessed (48x48 block-mean) frames.
class DinoEnv final : public Env {
  public:
    static constexpr int kNative = 96;
    static constexpr int kGroundY = 80;   // first ground row; feet rest on it
    static constexpr int kDinoX = 16;     // fixed left edge of the runner
    static constexpr int kDinoWidth = 6;
    static constexpr int kDinoHeight = 10;
    static constexpr int kJumpVelocity = 7;
    static constexpr int kStackDepth = 4;
    static constexpr double kStartSpeed = 2.0;
    static constexpr double kSpeedGain = 0.001;

    DinoEnv() : stack_(kStackDepth) {
        spec_.name = "dino";
        spec_.action_size = 2;
        spec_.obs = ObsShape{ObsKind::Frames, 0, kStackDepth, kNative / 2, kNative / 2};
        spec_.max_episode_steps = 100000;
    }

    const EnvSpec& spec() const override { return spec_; }

    Observation reset(std::uint64_t seed) override {
        rng_ = Rng(seed);
        obstacles_.clear();
        speed_ = kStartSpeed;
        jump_height_ = 0;
        jump_velocity_ = 0;
        airborne_ = false;
        steps_ = 0;
        started_ = true;
        done_ = false;
        spawn_obstacle(static_cast<double>(kNative) - 1.0);
        next_gap_ = draw_gap();
        render();
        stack_.reset(preprocess_frame(frame_));
        return stack_.observation();
    }

    StepResult step(int action) override {
        require_step_ok(action, started_, done_);

        if (action == 1 && !airborne_) {
            airborne_ = true;
            jump_velocity_ = kJumpVelocity;
        }
        if (airborne_) {
            jump_height_ += jump_velocity_;
            jump_velocity_ -= 1;
            if (jump_height_ <= 0) {
                jump_height_ = 0;
                airborne_ = false;
            }
        }

        for (auto& ob : obstacles_) ob.x -= speed_;
        speed_ += kSpeedGain;
        while (!obstacles_.empty() && obstacles_.front().x + obstacles_.front().width < 0.0)
            obstacles_.pop_front();
        // New obstacle once the trailing gap behind the newest one is wide enough.
        if (obstacles_.empty() ||
            static_cast<double>(kNative) - (obstacles_.back().x + obstacles_.back().width) >= next_gap_) {
            spawn_obstacle(static_cast<double>(kNative));
            next_gap_ = draw_gap();
        }

        ++steps_;
        const bool crashed = collided();
        done_ = crashed || steps_ >= spec_.max_episode_steps;
        render();
        stack_.push(preprocess_frame(frame_));
        return {stack_.observation(), crashed ? 0.0f : 1.0f, done_};
    }

    // Current native 96x96 frame (pre-downsample), for dumps and inspection.
    const Image8* native_frame() const override { return &frame_; }

    double scroll_speed() const { return speed_; }
    bool grounded() const { return !airborne_; }

  private:
    struct Obstacle {
        double x = 0.0;  // left edge; rendered at lround(x)
        int width = 0;
        int height = 0;
    };

    void spawn_obstacle(double x) {
        Obstacle ob;
        ob.x = x;
        ob.width = 3 + rng_.uniform_int(4);    // 3..6
        ob.height = 8 + rng_.uniform_int(7);   // 8..14
        obstacles_.push_back(ob);
    }

    double draw_gap() { return static_cast<double>(40 + rng_.uniform_int(57)); }  // 40..96, >= 24

    bool collided() const {
        for (const auto& ob : obstacles_) {
            const int left = static_cast<int>(std::lround(ob.x));
            if (left < kDinoX + kDinoWidth && left + ob.width > kDinoX && jump_height_ < ob.height)
                return true;
        }
        return false;
    }

    void render() {
        frame_ = Image8(kNative, kNative);
        for (int y = kGroundY; y < kGroundY + 2; ++y)
            for (int x = 0; x < kNative; ++x) frame_.at(y, x) = 255;
        for (const auto& ob : obstacles_) {
            const int left = static_cast<int>(std::lround(ob.x));
            for (int y = kGroundY - ob.height; y < kGroundY; ++y)
                for (int x = std::max(0, left); x < std::min(kNative, left + ob.width); ++x)
                    frame_.at(y, x) = 255;
        }
        const int foot = kGroundY - jump_height_;
        for (int y = std::max(0, foot - kDinoHeight); y < foot; ++y)
            for (int x = kDinoX; x < kDinoX + kDinoWidth; ++x) frame_.at(y, x) = 255;
    }

    EnvSpec spec_;
    Rng rng_{0};
    std::deque<Obstacle> obstacles_;
    double speed_ = kStartSpeed;
    double next_gap_ = 0.0;
    int jump_height_ = 0;
    int jump_velocity_ = 0;
    bool airborne_ = false;
    Image8 frame_;
    FrameStack stack_;
    int steps_ = 0;
    bool started_ = false;
    bool done_ = false;
};

}  // namespace fdqn
