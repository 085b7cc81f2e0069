#pragma once

#include <algorithm>
#include <cmath>

#include "fdqn/envs/env.hpp"
#include "fdqn/rng.hpp"

namespace fdqn {

// Underpowered car in a valley, standard constants:
//   v <- clamp(v + 0.001*(a-1) - 0.0025*cos(3p), +-0.07)
//   p <- clamp(p + v, [-1.2, 0.6]), velocity zeroed at the left wall.
// Actions {0: push left, 1: coast, 2: push right}. Reward -1 per step; done
// at position >= 0.5 or the 200-step cap.
class MountainCarEnv final : public Env {
  public:
    static constexpr double kMinPos = -1.2;
    static constexpr double kMaxPos = 0.6;
    static constexpr double kMaxSpeed = 0.07;
    static constexpr double kGoalPos = 0.5;
    static constexpr double kForce = 0.001;
    static constexpr double kGravity = 0.0025;

    MountainCarEnv() {
        spec_.name = "mountaincar";
        spec_.action_size = 3;
        spec_.obs = ObsShape{ObsKind::Vector, 2, 0, 0, 0};
        spec_.max_episode_steps = 200;
    }

    const EnvSpec& spec() const override { return spec_; }

    Observation reset(std::uint64_t seed) override {
        Rng rng(seed);
        position_ = rng.uniform(-0.6, -0.4);
        velocity_ = 0.0;
        steps_ = 0;
        started_ = true;
        done_ = false;
        return observe();
    }

    StepResult step(int action) override {
        require_step_ok(action, started_, done_);
        velocity_ += (action - 1) * kForce - std::cos(3.0 * position_) * kGravity;
        velocity_ = std::clamp(velocity_, -kMaxSpeed, kMaxSpeed);
        position_ += velocity_;
        position_ = std::clamp(position_, kMinPos, kMaxPos);
        if (position_ <= kMinPos && velocity_ < 0.0) velocity_ = 0.0;
        ++steps_;
        done_ = position_ >= kGoalPos || steps_ >= spec_.max_episode_steps;
        return {observe(), -1.0f, done_};
    }

  private:
    Observation observe() const {
        return Observation::from_vector({static_cast<float>(position_), static_cast<float>(velocity_)});
    }

    EnvSpec spec_;
    double position_ = 0.0;
    double velocity_ = 0.0;
    int steps_ = 0;
    bool started_ = false;
    bool done_ = false;
};

}  // namespace fdqn
