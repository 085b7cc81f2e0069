#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include "fdqn/agent.hpp"
#include "fdqn/checkpoint.hpp"
#include "fdqn/config.hpp"
#include "fdqn/envs/registry.hpp"
#include "fdqn/log.hpp"
#include "fdqn/metrics.hpp"
#include "fdqn/replay.hpp"

namespace fdqn {

inline Matrix obs_to_row(const Observation& o) {
    Matrix m(1, o.flat_size());
    o.write_flat(m.row(0));
    return m;
}

struct EvalSummary {
    double mean = 0.0;
    double stddev = 0.0;
    double min = 0.0;
    double max = 0.0;
    int episodes = 0;
};

namespace detail {

inline double greedy_episode(Env& env, const Parameters& params, double eps, std::uint64_t env_seed,
                             Rng& policy) {
    Observation obs = env.reset(env_seed);
    double total = 0.0;
    bool done = false;
    while (!done) {
        const Matrix q = forward(params, obs_to_row(obs));
        const int a = select_action({q.row(0), static_cast<std::size_t>(q.cols)}, eps, policy);
        StepResult r = env.step(a);
        total += r.reward;
        obs = std::move(r.observation);
        done = r.done;
    }
    return total;
}

inline EvalSummary summarize(const std::vector<double>& rewards) {
    EvalSummary s;
    s.episodes = static_cast<int>(rewards.size());
    s.min = std::numeric_limits<double>::infinity();
    s.max = -std::numeric_limits<double>::infinity();
    double sum = 0.0;
    for (const double r : rewards) {
        sum += r;
        s.min = std::min(s.min, r);
        s.max = std::max(s.max, r);
    }
    s.mean = sum / rewards.size();
    double sq = 0.0;
    for (const double r : rewards) sq += (r - s.mean) * (r - s.mean);
    s.stddev = std::sqrt(sq / rewards.size());
    return s;
}

}  // namespace detail

// Greedy-with-eval_epsilon policy rollout; no learning, no buffer writes.
// Episode i draws its env seed and policy stream from (seed, i) alone, so the
// summary is identical whether episodes run sequentially or fanned out over
// threads.
inline EvalSummary evaluate(const Parameters& params, const std::string& env_name, int episodes,
                            double eval_epsilon, std::uint64_t seed, int threads = 1) {
    if (episodes < 1) throw ContractViolation("evaluate: episodes must be >= 1");
    if (eval_epsilon < 0.0 || eval_epsilon > 1.0)
        throw ContractViolation("evaluate: eval_epsilon must be in [0,1]");
    std::vector<double> rewards(static_cast<std::size_t>(episodes), 0.0);
    auto run_range = [&](int begin, int stride) {
        auto env = make_env(env_name);
        for (int i = begin; i < episodes; i += stride) {
            const std::string tag = "eval-" + std::to_string(i);
            Rng policy = make_stream(seed, tag + "-policy");
            rewards[static_cast<std::size_t>(i)] =
                detail::greedy_episode(*env, params, eval_epsilon, derive_seed(seed, tag + "-env"), policy);
        }
    };
    const int workers = std::max(1, std::min(threads, episodes));
    if (workers == 1) {
        run_range(0, 1);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) pool.emplace_back(run_range, w, workers);
        for (auto& t : pool) t.join();
    }
    return detail::summarize(rewards);
}

// Loads a checkpoint and evaluates it. The checkpoint's network must match
// the environment's observation and action shape; mismatches are rejected
// with both shapes in the message.
inline EvalSummary evaluate_checkpoint(const std::string& checkpoint_path, std::string env_name, int episodes,
                                       double eval_epsilon, std::uint64_t seed, int threads = 1) {
    auto [params, meta] = load_checkpoint(checkpoint_path);
    if (env_name.empty()) env_name = meta.env_name;
    const auto env = make_env(env_name);
    const EnvSpec& es = env->spec();
    const bool input_ok = params.spec.flat_input_size() == es.obs.flat_size();
    const bool actions_ok = params.spec.action_size == es.action_size;
    if (!input_ok || !actions_ok)
        throw ConfigError("checkpoint does not fit environment '" + env_name + "': checkpoint " +
                          describe_spec(params.spec) + " vs environment input=" +
                          std::to_string(es.obs.flat_size()) + " actions=" + std::to_string(es.action_size));
    return evaluate(params, env_name, episodes, eval_epsilon, seed, threads);
}

struct TrainResult {
    Parameters params;  // final online network
    std::vector<MetricsRecord> metrics;
    int episodes = 0;
};

// Runs the full training loop: per episode, epsilon-greedy experience
// collection into the replay buffer with one batch of updates per environment
// step once the buffer holds max(learn_start, batch_size) transitions, an
// epsilon decay tick at episode end, and a periodic target sync. Every random
// draw comes from a named substream of config.seed, so a (config, seed) pair
// pins the metrics file and checkpoint byte-for-byte.
inline TrainResult train(const TrainConfig& cfg) {
    validate_config(cfg);
    auto env = make_env(cfg.env_name);
    const NetworkSpec net_spec = resolve_network_spec(env->spec(), cfg);

    Agent agent = Agent::create(net_spec, cfg.agent, derive_seed(cfg.seed, "init"));
    Rng policy_rng = make_stream(cfg.seed, "policy");
    Rng replay_rng = make_stream(cfg.seed, "replay");
    Rng env_seed_rng = make_stream(cfg.seed, "env");
    Rng eval_seed_rng = make_stream(cfg.seed, "eval");
    ReplayBuffer buffer(cfg.memory_size);

    // Fail on unwritable outputs before any training work.
    if (!cfg.checkpoint_path.empty()) {
        const std::string probe = cfg.checkpoint_path + ".partial";
        {
            std::ofstream test(probe, std::ios::binary | std::ios::app);
            if (!test) throw IoError("train: checkpoint path is not writable: " + cfg.checkpoint_path);
        }
        std::filesystem::remove(probe);
    }
    std::ofstream metrics_out;
    if (!cfg.metrics_path.empty()) {
        metrics_out.open(cfg.metrics_path, std::ios::trunc);
        if (!metrics_out) throw IoError("train: metrics path is not writable: " + cfg.metrics_path);
    }

    const std::size_t learn_gate =
        std::max(static_cast<std::size_t>(cfg.agent.learn_start), static_cast<std::size_t>(cfg.agent.batch_size));

    TrainResult result;
    std::uint64_t global_step = 0;
    Parameters target_snapshot = agent.target;

    auto save_final = [&](int episodes_done) {
        if (cfg.checkpoint_path.empty()) return;
        CheckpointMeta meta{cfg.env_name, net_spec, episodes_done, cfg.seed};
        save_checkpoint(cfg.checkpoint_path, agent.online, meta);
    };

    for (int episode = 0; episode < cfg.num_episodes; ++episode) {
        const auto t0 = std::chrono::steady_clock::now();
        double eps = cfg.epsilon_per_step ? cfg.epsilon.at(global_step)
                                          : cfg.epsilon.at(static_cast<std::uint64_t>(episode));
        const double eps_logged = eps;

        Observation obs = env->reset(env_seed_rng.next_u64());
        double episode_reward = 0.0;
        double loss_sum = 0.0;
        std::uint64_t loss_count = 0;
        int steps = 0;
        bool done = false;
        while (!done) {
            if (cfg.epsilon_per_step) eps = cfg.epsilon.at(global_step);
            const Matrix q = forward(agent.online, obs_to_row(obs));
            const int action = select_action({q.row(0), static_cast<std::size_t>(q.cols)}, eps, policy_rng);
            StepResult sr = env->step(action);
            episode_reward += sr.reward;
            buffer.push(Transition{std::move(obs), action, sr.reward, sr.observation, sr.done});
            obs = std::move(sr.observation);
            done = sr.done;
            ++steps;
            ++global_step;

            if (buffer.size() >= learn_gate) {
                for (int u = 0; u < cfg.agent.updates_per_step; ++u) {
                    const auto batch = buffer.sample(static_cast<std::size_t>(cfg.agent.batch_size), replay_rng);
                    float loss = 0.0f;
                    std::string why;
                    try {
                        loss = learn_step(agent, batch);
                        if (!std::isfinite(loss)) why = "loss is not finite";
                    } catch (const NumericError& e) {
                        why = e.what();
                    }
                    if (!why.empty()) {
                        std::string where = "no diagnostic checkpoint (empty path)";
                        if (!cfg.checkpoint_path.empty()) {
                            CheckpointMeta meta{cfg.env_name, net_spec, episode, cfg.seed};
                            const std::string diag = cfg.checkpoint_path + ".diverged";
                            save_checkpoint(diag, agent.online, meta);
                            where = "diagnostic checkpoint at " + diag;
                        }
                        throw NumericError("training diverged at episode " + std::to_string(episode + 1) +
                                           " (" + why + "); " + where);
                    }
                    loss_sum += loss;
                    ++loss_count;
                }
            }
        }

        // target network must be bit-constant between syncs
        if (agent.target != target_snapshot)
            throw Error("internal invariant violated: target network changed without sync_target");
        if ((episode + 1) % cfg.agent.target_sync_interval == 0) {
            sync_target(agent);
            target_snapshot = agent.target;
        }

        MetricsRecord rec;
        rec.episode = episode + 1;
        rec.steps = steps;
        rec.episode_reward = episode_reward;
        rec.epsilon = eps_logged;
        rec.mean_loss = loss_count > 0 ? loss_sum / static_cast<double>(loss_count) : 0.0;
        rec.buffer_size = buffer.size();
        rec.wall_ms = cfg.log_wall_time
                          ? std::chrono::duration_cast<std::chrono::milliseconds>(
                                std::chrono::steady_clock::now() - t0)
                                .count()
                          : 0;
        if (metrics_out.is_open()) write_metrics(metrics_out, rec);
        result.metrics.push_back(rec);

        if (cfg.eval_every > 0 && (episode + 1) % cfg.eval_every == 0) {
            const EvalSummary s = evaluate(agent.online, cfg.env_name, cfg.eval_episodes, cfg.eval_epsilon,
                                           eval_seed_rng.next_u64());
            log_info("episode " + std::to_string(episode + 1) + ": eval mean " + std::to_string(s.mean) +
                     " min " + std::to_string(s.min) + " max " + std::to_string(s.max));
        } else if ((episode + 1) % 100 == 0) {
            log_debug("episode " + std::to_string(episode + 1) + ": reward " + std::to_string(episode_reward) +
                      " eps " + std::to_string(eps_logged) + " buffer " + std::to_string(buffer.size()));
        }
    }

    if (metrics_out.is_open()) {
        metrics_out.flush();
        if (!metrics_out) throw IoError("train: metrics write failed: " + cfg.metrics_path);
    }
    save_final(cfg.num_episodes);
    result.params = agent.online;
    result.episodes = cfg.num_episodes;
    return result;
}

}  // namespace fdqn
