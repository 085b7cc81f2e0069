#pragma once

#include <charconv>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "fdqn/agent.hpp"
#include "fdqn/envs/registry.hpp"
#include "fdqn/errors.hpp"
#include "fdqn/nn.hpp"

namespace fdqn {

// Full experiment definition. Defaults follow the reference hyperparameter
// table: lr 0.0001, gamma 0.99, epsilon 1.0 -> 0.01 with decay 0.995, memory
// 1e6, batch 1024. Desk presets below override the expensive knobs.
struct TrainConfig {
    std::string env_name = "cartpole";
    std::uint64_t seed = 0;
    int num_episodes = 10000;
    std::size_t memory_size = 1000000;
    AgentConfig agent;
    EpsilonSchedule epsilon;
    bool epsilon_per_step = false;  // decay clock: episodes by default
    std::vector<int> hidden_sizes;           // empty = default for env kind
    std::vector<ConvLayerSpec> conv_layers;  // empty = default for frames envs
    int eval_every = 0;  // episodes between mid-training evals, 0 = off
    int eval_episodes = 100;
    double eval_epsilon = 0.01;
    std::string checkpoint_path = "checkpoint.fdqn";
    std::string metrics_path = "metrics.log";
    bool log_wall_time = false;  // off keeps metrics files byte-reproducible
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
    T out{};
    const std::string v = trim(value);
    const auto* begin = v.data();
    const auto* end = v.data() + v.size();
    auto [ptr, ec] = std::from_chars(begin, end, out);
    if (ec != std::errc{} || ptr != end)
        throw ConfigError("config key '" + key + "': cannot parse '" + value + "'");
    return out;
}

inline double parse_real(const std::string& key, const std::string& value) {
    const std::string v = trim(value);
    try {
        std::size_t pos = 0;
        const double out = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return out;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': cannot parse '" + value + "'");
    }
}

inline bool parse_bool(const std::string& key, const std::string& value) {
    const std::string v = trim(value);
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ConfigError("config key '" + key + "': expected true/false, got '" + value + "'");
}

inline std::vector<int> parse_int_list(const std::string& key, const std::string& value) {
    std::vector<int> out;
    std::stringstream ss(trim(value));
    std::string item;
    while (std::getline(ss, item, ','))
        out.push_back(parse_number<int>(key, item));
    return out;
}

// "16x8x4,32x4x2" -> {out_channels, kernel, stride} per layer; "none" clears.
inline std::vector<ConvLayerSpec> parse_conv_list(const std::string& key, const std::string& value) {
    std::vector<ConvLayerSpec> out;
    const std::string v = trim(value);
    if (v == "none" || v.empty()) return out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::stringstream fields(trim(item));
        std::string f;
        std::vector<int> nums;
        while (std::getline(fields, f, 'x')) nums.push_back(parse_number<int>(key, f));
        if (nums.size() != 3)
            throw ConfigError("config key '" + key + "': conv layer '" + item +
                              "' must be out_channels x kernel x stride");
        out.push_back(ConvLayerSpec{nums[0], nums[1], nums[2]});
    }
    return out;
}

}  // namespace detail

// Applies one dotted-path assignment. Unknown keys are a hard error.
inline void set_config_key(TrainConfig& cfg, const std::string& key, const std::string& value) {
    using namespace detail;
    if (key == "env_name") cfg.env_name = trim(value);
    else if (key == "seed") cfg.seed = parse_number<std::uint64_t>(key, value);
    else if (key == "num_episodes") cfg.num_episodes = parse_number<int>(key, value);
    else if (key == "memory_size") cfg.memory_size = parse_number<std::size_t>(key, value);
    else if (key == "agent.gamma") cfg.agent.gamma = parse_real(key, value);
    else if (key == "agent.learning_rate") cfg.agent.learning_rate = parse_real(key, value);
    else if (key == "agent.batch_size") cfg.agent.batch_size = parse_number<int>(key, value);
    else if (key == "agent.double_dqn") cfg.agent.double_dqn = parse_bool(key, value);
    else if (key == "agent.target_sync_interval") cfg.agent.target_sync_interval = parse_number<int>(key, value);
    else if (key == "agent.learn_start") cfg.agent.learn_start = parse_number<int>(key, value);
    else if (key == "agent.updates_per_step") cfg.agent.updates_per_step = parse_number<int>(key, value);
    else if (key == "agent.grad_clip_norm") cfg.agent.grad_clip_norm = parse_real(key, value);
    else if (key == "epsilon.max") cfg.epsilon.eps_max = parse_real(key, value);
    else if (key == "epsilon.min") cfg.epsilon.eps_min = parse_real(key, value);
    else if (key == "epsilon.decay") cfg.epsilon.decay = parse_real(key, value);
    else if (key == "epsilon.per_step") cfg.epsilon_per_step = parse_bool(key, value);
    else if (key == "network.hidden_sizes") cfg.hidden_sizes = parse_int_list(key, value);
    else if (key == "network.conv") cfg.conv_layers = parse_conv_list(key, value);
    else if (key == "eval_every") cfg.eval_every = parse_number<int>(key, value);
    else if (key == "eval_episodes") cfg.eval_episodes = parse_number<int>(key, value);
    else if (key == "eval_epsilon") cfg.eval_epsilon = parse_real(key, value);
    else if (key == "checkpoint_path") cfg.checkpoint_path = trim(value);
    else if (key == "metrics_path") cfg.metrics_path = trim(value);
    else if (key == "log_wall_time") cfg.log_wall_time = parse_bool(key, value);
    else throw ConfigError("unknown config key '" + key + "'");
}

// "key = value" text form; '#' starts a comment, blank lines are skipped.
inline TrainConfig parse_config_text(const std::string& text, TrainConfig base = TrainConfig{}) {
    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        set_config_key(base, key, value);
    }
    return base;
}

// "key=value" override as given on a command line.
inline void apply_override(TrainConfig& cfg, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos)
        throw ConfigError("override '" + assignment + "' must look like key=value");
    set_config_key(cfg, detail::trim(assignment.substr(0, eq)), detail::trim(assignment.substr(eq + 1)));
}

inline void validate_config(const TrainConfig& cfg) {
    make_env(cfg.env_name);  // throws ConfigError for unknown names
    cfg.agent.validate();
    cfg.epsilon.validate();
    if (cfg.num_episodes < 0) throw ConfigError("num_episodes must be >= 0");
    if (cfg.memory_size < 1) throw ConfigError("memory_size must be >= 1");
    if (cfg.eval_every < 0) throw ConfigError("eval_every must be >= 0");
    if (cfg.eval_episodes < 1) throw ConfigError("eval_episodes must be >= 1");
    if (cfg.eval_epsilon < 0.0 || cfg.eval_epsilon > 1.0) throw ConfigError("eval_epsilon must be in [0,1]");
    for (const int h : cfg.hidden_sizes)
        if (h <= 0) throw ConfigError("network.hidden_sizes entries must be positive");
}

// Concrete network shape for an environment, with config overrides applied.
// Defaults: vector input -> two hidden layers of 64; frames input -> conv
// 16@8x8/4, conv 32@4x4/2, one hidden layer of 128.
inline NetworkSpec resolve_network_spec(const EnvSpec& env, const TrainConfig& cfg) {
    if (env.obs.kind == ObsKind::Vector) {
        if (!cfg.conv_layers.empty())
            throw ConfigError("network.conv requires a frames environment, but '" + env.name +
                              "' observes vectors");
        const std::vector<int> hidden = cfg.hidden_sizes.empty() ? std::vector<int>{64, 64} : cfg.hidden_sizes;
        return NetworkSpec::vector_input(env.obs.dim, hidden, env.action_size);
    }
    const std::vector<int> hidden = cfg.hidden_sizes.empty() ? std::vector<int>{128} : cfg.hidden_sizes;
    const std::vector<ConvLayerSpec> conv = cfg.conv_layers.empty()
                                                ? std::vector<ConvLayerSpec>{{16, 8, 4}, {32, 4, 2}}
                                                : cfg.conv_layers;
    return NetworkSpec::frames_input(env.obs.stack, env.obs.height, env.obs.width, conv, hidden,
                                     env.action_size);
}

// ---------------------------------------------------------------------------
// Presets. Desk presets trade the paper-scale batch for minutes-long runs.
// ---------------------------------------------------------------------------

inline TrainConfig preset_cartpole_desk() {
    TrainConfig cfg;
    cfg.env_name = "cartpole";
    cfg.num_episodes = 800;
    cfg.memory_size = 100000;
    cfg.agent.batch_size = 64;
    cfg.agent.learn_start = 1000;
    cfg.agent.learning_rate = 0.001;
    cfg.agent.double_dqn = true;
    cfg.hidden_sizes = {64, 64};
    return cfg;
}

inline TrainConfig preset_mountaincar_desk() {
    TrainConfig cfg;
    cfg.env_name = "mountaincar";
    cfg.num_episodes = 3000;
    cfg.memory_size = 100000;
    cfg.agent.batch_size = 64;
    cfg.agent.learn_start = 1000;
    cfg.agent.learning_rate = 0.001;
    cfg.agent.double_dqn = true;
    cfg.hidden_sizes = {64, 64};
    return cfg;
}

inline TrainConfig preset_dino_desk() {
    TrainConfig cfg;
    cfg.env_name = "dino";
    cfg.num_episodes = 300;
    cfg.memory_size = 20000;
    cfg.agent.batch_size = 32;
    cfg.agent.learn_start = 1000;
    cfg.agent.learning_rate = 0.0005;
    cfg.agent.double_dqn = true;
    cfg.epsilon.decay = 0.98;
    return cfg;
}

inline TrainConfig preset_chain() {
    TrainConfig cfg;
    cfg.env_name = "chain";
    cfg.num_episodes = 600;
    cfg.memory_size = 20000;
    cfg.agent.gamma = 0.9;
    cfg.agent.batch_size = 32;
    cfg.agent.learn_start = 200;
    cfg.agent.learning_rate = 0.002;
    cfg.epsilon.decay = 0.995;
    cfg.epsilon.eps_min = 0.05;
    cfg.hidden_sizes = {32, 32};
    return cfg;
}

}  // namespace fdqn
