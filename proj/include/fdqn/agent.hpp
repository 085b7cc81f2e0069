#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "fdqn/errors.hpp"
#include "fdqn/matrix.hpp"
#include "fdqn/nn.hpp"
#include "fdqn/replay.hpp"
#include "fdqn/rng.hpp"

namespace fdqn {

namespace detail {
// decay^t by binary exponentiation: IEEE multiplies only, so the result is
// identical on every platform (std::pow is not pinned that tightly).
inline double pow_uint(double base, std::uint64_t e) {
    double result = 1.0;
    double b = base;
    while (e != 0) {
        if (e & 1ull) result *= b;
        b *= b;
        e >>= 1;
    }
    return result;
}
}  // namespace detail

// Exploration rate schedule: eps(t) = max(eps_min, eps_max * decay^t).
struct EpsilonSchedule {
    double eps_max = 1.0;
    double eps_min = 0.01;
    double decay = 0.995;

    void validate() const {
        if (eps_max < 0.0 || eps_max > 1.0) throw ConfigError("epsilon.max must be in [0,1]");
        if (eps_min < 0.0 || eps_min > 1.0) throw ConfigError("epsilon.min must be in [0,1]");
        if (eps_min > eps_max) throw ConfigError("epsilon.min must be <= epsilon.max");
        if (decay <= 0.0 || decay > 1.0) throw ConfigError("epsilon.decay must be in (0,1]");
    }

    double at(std::uint64_t t) const { return std::max(eps_min, eps_max * detail::pow_uint(decay, t)); }
};

inline double epsilon_at(const EpsilonSchedule& sched, std::uint64_t t) { return sched.at(t); }

struct AgentConfig {
    double gamma = 0.99;
    double learning_rate = 0.0001;
    int batch_size = 1024;
    bool double_dqn = true;
    int target_sync_interval = 1;  // episodes between target syncs
    int learn_start = 1000;        // min buffer fill before updates begin
    int updates_per_step = 1;
    double grad_clip_norm = 0.0;  // 0 disables clipping

    void validate() const {
        if (gamma < 0.0 || gamma > 1.0) throw ConfigError("agent.gamma must be in [0,1]");
        if (learning_rate <= 0.0) throw ConfigError("agent.learning_rate must be > 0");
        if (batch_size < 1) throw ConfigError("agent.batch_size must be >= 1");
        if (target_sync_interval < 1) throw ConfigError("agent.target_sync_interval must be >= 1");
        if (learn_start < 0) throw ConfigError("agent.learn_start must be >= 0");
        if (updates_per_step < 1) throw ConfigError("agent.updates_per_step must be >= 1");
        if (grad_clip_norm < 0.0) throw ConfigError("agent.grad_clip_norm must be >= 0");
    }
};

// Ties resolve to the lowest index, everywhere, so runs replay identically
// across platforms.
inline int argmax_lowest(std::span<const float> values) {
    if (values.empty()) throw ContractViolation("argmax over empty vector");
    int best = 0;
    for (int i = 1; i < static_cast<int>(values.size()); ++i)
        if (values[i] > values[best]) best = i;
    return best;
}

// Epsilon-greedy over one Q-row. Draws the coin on every call so the random
// stream does not depend on eps.
inline int select_action(std::span<const float> q_row, double eps, Rng& rng) {
    if (q_row.empty()) throw ContractViolation("select_action: empty q_row");
    if (eps < 0.0 || eps > 1.0) throw ContractViolation("select_action: eps must be in [0,1]");
    const double coin = rng.uniform();
    if (coin < eps) return rng.uniform_int(static_cast<int>(q_row.size()));
    return argmax_lowest(q_row);
}

// Stacks the chosen observation of each transition into a batch matrix.
inline Matrix make_obs_batch(const std::vector<Transition>& batch, bool next) {
    if (batch.empty()) throw ContractViolation("make_obs_batch: empty batch");
    const int cols = (next ? batch[0].next_state : batch[0].state).flat_size();
    Matrix m(static_cast<int>(batch.size()), cols);
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const Observation& o = next ? batch[i].next_state : batch[i].state;
        if (o.flat_size() != cols)
            throw ContractViolation("make_obs_batch: inconsistent observation sizes in batch");
        o.write_flat(m.row(static_cast<int>(i)));
    }
    return m;
}

// TD regression targets. Terminal transitions take y = r. Otherwise:
//   DQN:        y = r + gamma * max_a' Q(s', a'; target)
//   Double DQN: y = r + gamma * Q(s', argmax_a' Q(s', a'; online); target)
// No parameters are mutated; y is a constant with respect to both networks.
inline std::vector<float> td_targets(const std::vector<Transition>& batch, const Parameters& online,
                                     const Parameters& target, double gamma, bool double_dqn) {
    if (gamma < 0.0 || gamma > 1.0) throw ContractViolation("td_targets: gamma must be in [0,1]");
    if (batch.empty()) throw ContractViolation("td_targets: empty batch");
    const Matrix next = make_obs_batch(batch, true);
    const Matrix q_target = forward(target, next);
    if (!q_target.all_finite()) throw NumericError("td_targets: NaN in target-network Q-values");
    Matrix q_online;
    if (double_dqn) {
        q_online = forward(online, next);
        if (!q_online.all_finite()) throw NumericError("td_targets: NaN in online-network Q-values");
    }
    const float g = static_cast<float>(gamma);
    std::vector<float> y(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const int row = static_cast<int>(i);
        if (batch[i].done) {
            y[i] = batch[i].reward;
            continue;
        }
        float bootstrap;
        if (double_dqn) {
            const int pick = argmax_lowest({q_online.row(row), static_cast<std::size_t>(q_online.cols)});
            bootstrap = q_target(row, pick);
        } else {
            bootstrap = q_target(row, argmax_lowest({q_target.row(row), static_cast<std::size_t>(q_target.cols)}));
        }
        y[i] = batch[i].reward + g * bootstrap;
    }
    return y;
}

// Online network theta, target network theta^-, and the optimizer state.
struct Agent {
    NetworkSpec spec;
    AgentConfig config;
    Parameters online;
    Parameters target;
    AdamState adam;

    static Agent create(const NetworkSpec& spec, const AgentConfig& config, std::uint64_t seed) {
        spec.validate();
        config.validate();
        Agent a;
        a.spec = spec;
        a.config = config;
        a.online = init_params(spec, seed);
        a.target = a.online;
        a.adam = AdamState::zeros_like(spec);
        return a;
    }
};

inline void sync_target(Agent& agent) { agent.target = agent.online; }

// One gradient step on the online network against frozen TD targets.
// The target network is untouched. Returns the batch loss.
inline float learn_step(Agent& agent, const std::vector<Transition>& batch) {
    if (batch.empty()) throw ContractViolation("learn_step: empty batch");
    const std::vector<float> y =
        td_targets(batch, agent.online, agent.target, agent.config.gamma, agent.config.double_dqn);
    const Matrix states = make_obs_batch(batch, false);
    std::vector<int> actions(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) actions[i] = batch[i].action;
    auto [loss, grads] = loss_and_grads(agent.online, states, actions, y);
    if (agent.config.grad_clip_norm > 0.0)
        clip_global_norm(grads, static_cast<float>(agent.config.grad_clip_norm));
    adam_step(agent.online, grads, agent.adam, static_cast<float>(agent.config.learning_rate));
    return loss;
}

}  // namespace fdqn
