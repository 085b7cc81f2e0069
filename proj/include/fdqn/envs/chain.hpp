#pragma once

#include "fdqn/envs/env.hpp"
#include "fdqn/rng.hpp"

namespace fdqn {

// Deterministic 5-state chain: states 0..4 observed one-hot, actions
// {0: left, 1: right}. Moving right from state 3 lands in the terminal state
// 4 and pays reward 1; everything else pays 0. Episodes start uniformly over
// the non-terminal states. Small enough that exact value iteration is
// tractable, which makes it a correctness probe for the whole learner.
class ChainEnv final : public Env {
  public:
    static constexpr int kStates = 5;

    ChainEnv() {
        spec_.name = "chain";
        spec_.action_size = 2;
        spec_.obs = ObsShape{ObsKind::Vector, kStates, 0, 0, 0};
        spec_.max_episode_steps = 100;
    }

    const EnvSpec& spec() const override { return spec_; }

    Observation reset(std::uint64_t seed) override {
        Rng rng(seed);
        state_ = rng.uniform_int(kStates - 1);  // 0..3
        steps_ = 0;
        started_ = true;
        done_ = false;
        return observe();
    }

    StepResult step(int action) override {
        require_step_ok(action, started_, done_);
        state_ = action == 0 ? std::max(state_ - 1, 0) : std::min(state_ + 1, kStates - 1);
        ++steps_;
        const bool reached_goal = state_ == kStates - 1;
        done_ = reached_goal || steps_ >= spec_.max_episode_steps;
        return {observe(), reached_goal ? 1.0f : 0.0f, done_};
    }

    int state() const { return state_; }

  private:
    Observation observe() const {
        std::vector<float> v(kStates, 0.0f);
        v[state_] = 1.0f;
        return Observation::from_vector(std::move(v));
    }

    EnvSpec spec_;
    int state_ = 0;
    int steps_ = 0;
    bool started_ = false;
    bool done_ = false;
};

}  // namespace fdqn
