#pragma once

#include <array>
#include <cmath>

#include "fdqn/envs/env.hpp"
#include "fdqn/rng.hpp"

namespace fdqn {

// Pole balancing on a cart, classic benchmark dynamics: gravity 9.8, cart
// mass 1.0, pole mass 0.1, half-length 0.5, force 10, Euler step 0.02.
// Actions {0: push left, 1: push right}. Reward +1 every step including the
// terminal one; done past +-12 degrees, |x| > 2.4, or 200 steps.
class CartPoleEnv final : public Env {
  public:
    static constexpr double kGravity = 9.8;
    static constexpr double kMassCart = 1.0;
    static constexpr double kMassPole = 0.1;
    static constexpr double kHalfLength = 0.5;
    static constexpr double kForceMag = 10.0;
    static constexpr double kTau = 0.02;
    static constexpr double kThetaLimit = 12.0 * 2.0 * M_PI / 360.0;
    static constexpr double kXLimit = 2.4;

    CartPoleEnv() {
        spec_.name = "cartpole";
        spec_.action_size = 2;
        spec_.obs = ObsShape{ObsKind::Vector, 4, 0, 0, 0};
        spec_.max_episode_steps = 200;
    }

    const EnvSpec& spec() const override { return spec_; }

    // State is (x, x_dot, theta, theta_dot); one Euler step under the given
    // horizontal force. Exposed so physics tests can apply zero force.
    static std::array<double, 4> dynamics(const std::array<double, 4>& s, double force) {
        const double x = s[0], x_dot = s[1], theta = s[2], theta_dot = s[3];
        const double total_mass = kMassCart + kMassPole;
        const double pml = kMassPole * kHalfLength;
        const double cos_t = std::cos(theta);
        const double sin_t = std::sin(theta);
        const double temp = (force + pml * theta_dot * theta_dot * sin_t) / total_mass;
        const double theta_acc =
            (kGravity * sin_t - cos_t * temp) / (kHalfLength * (4.0 / 3.0 - kMassPole * cos_t * cos_t / total_mass));
        const double x_acc = temp - pml * theta_acc * cos_t / total_mass;
        return {x + kTau * x_dot, x_dot + kTau * x_acc, theta + kTau * theta_dot, theta_dot + kTau * theta_acc};
    }

    Observation reset(std::uint64_t seed) override {
        Rng rng(seed);
        for (auto& v : state_) v = rng.uniform(-0.05, 0.05);
        steps_ = 0;
        started_ = true;
        done_ = false;
        return observe();
    }

    StepResult step(int action) override {
        require_step_ok(action, started_, done_);
        state_ = dynamics(state_, action == 1 ? kForceMag : -kForceMag);
        ++steps_;
        const bool failed = state_[0] < -kXLimit || state_[0] > kXLimit || state_[2] < -kThetaLimit ||
                            state_[2] > kThetaLimit;
        done_ = failed || steps_ >= spec_.max_episode_steps;
        return {observe(), 1.0f, done_};
    }

  private:
    Observation observe() const {
        return Observation::from_vector({static_cast<float>(state_[0]), static_cast<float>(state_[1]),
                                         static_cast<float>(state_[2]), static_cast<float>(state_[3])});
    }

    EnvSpec spec_;
    std::array<double, 4> state_{};
    int steps_ = 0;
    bool started_ = false;
    bool done_ = false;
};

}  // namespace fdqn
