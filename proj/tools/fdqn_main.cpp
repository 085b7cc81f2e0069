// fdqn: train, evaluate, and inspect Flexible DQN agents on the bundled
// environments. Exit codes: 0 success, 1 usage error, 2 config error,
// 3 runtime/numeric failure.

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "fdqn/fdqn.hpp"
#include "fdqn/gradcheck.hpp"

namespace fs = std::filesystem;

namespace {

std::string read_text_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw fdqn::ConfigError("cannot read config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Result files land under the --out root unless the configured path is absolute.
std::string under_root(const std::string& root, const std::string& path) {
    if (path.empty()) return path;
    fs::path p(path);
    if (p.is_absolute()) return path;
    return (fs::path(root) / p).string();
}

struct TrainArgs {
    std::string config_path;
    std::string out_dir = ".";
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::vector<std::string> overrides;
};

fdqn::TrainConfig load_train_config(const TrainArgs& args) {
    fdqn::TrainConfig cfg = fdqn::parse_config_text(read_text_file(args.config_path));
    if (args.seed_set) cfg.seed = args.seed;
    for (const auto& ov : args.overrides) fdqn::apply_override(cfg, ov);
    fs::create_directories(args.out_dir);
    cfg.checkpoint_path = under_root(args.out_dir, cfg.checkpoint_path);
    cfg.metrics_path = under_root(args.out_dir, cfg.metrics_path);
    fdqn::validate_config(cfg);
    return cfg;
}

int cmd_train(const TrainArgs& args) {
    const fdqn::TrainConfig cfg = load_train_config(args);
    const fdqn::TrainResult result = fdqn::train(cfg);
    double tail_reward = 0.0;
    const std::size_t tail = std::min<std::size_t>(10, result.metrics.size());
    for (std::size_t i = result.metrics.size() - tail; i < result.metrics.size(); ++i)
        tail_reward += result.metrics[i].episode_reward;
    std::printf("trained env:%s episodes:%d last10_mean_reward:%.6g checkpoint:%s metrics:%s\n",
                cfg.env_name.c_str(), result.episodes, tail > 0 ? tail_reward / tail : 0.0,
                cfg.checkpoint_path.c_str(), cfg.metrics_path.c_str());
    return 0;
}

struct EvalArgs {
    std::string checkpoint;
    std::string env_name;
    int episodes = 100;
    double epsilon = 0.01;
    std::uint64_t seed = 0;
    int threads = 1;
};

int cmd_eval(const EvalArgs& args) {
    const fdqn::EvalSummary s = fdqn::evaluate_checkpoint(args.checkpoint, args.env_name, args.episodes,
                                                          args.epsilon, args.seed, args.threads);
    std::printf("mean:%.6g stddev:%.6g min:%.6g max:%.6g episodes:%d\n", s.mean, s.stddev, s.min, s.max,
                s.episodes);
    return 0;
}

struct GradcheckArgs {
    int trials = 20;
    double tolerance = 1e-4;
};

int cmd_gradcheck(const GradcheckArgs& args) {
    if (args.trials < 1) throw fdqn::ConfigError("gradcheck: --trials must be >= 1");
    if (args.tolerance <= 0) throw fdqn::ConfigError("gradcheck: --tolerance must be > 0");
    double worst = 0.0;
    int failures = 0;
    for (int i = 0; i < args.trials; ++i) {
        const fdqn::GradCheckResult r = fdqn::run_gradcheck_trial(static_cast<std::uint64_t>(i));
        const bool ok = r.max_rel_err < args.tolerance;
        std::printf("trial %d: %s max_rel_err:%.3g %s\n", i, r.description.c_str(), r.max_rel_err,
                    ok ? "ok" : "FAIL");
        worst = std::max(worst, r.max_rel_err);
        if (!ok) ++failures;
    }
    std::printf("gradcheck trials:%d tolerance:%g worst:%.3g failures:%d\n", args.trials, args.tolerance,
                worst, failures);
    if (failures > 0)
        throw fdqn::NumericError("gradcheck: " + std::to_string(failures) + " trial(s) exceeded tolerance");
    return 0;
}

struct RolloutArgs {
    std::string checkpoint;
    std::string dump_dir;
    std::string out_dir = ".";
    int steps = 500;
};

int cmd_rollout(const RolloutArgs& args) {
    auto [params, meta] = fdqn::load_checkpoint(args.checkpoint);
    auto env = fdqn::make_env(meta.env_name);
    std::string dump;
    if (!args.dump_dir.empty()) {
        if (env->spec().obs.kind != fdqn::ObsKind::Frames)
            throw fdqn::ConfigError("--dump-frames: environment '" + meta.env_name + "' has no frames");
        dump = under_root(args.out_dir, args.dump_dir);
        fs::create_directories(dump);
    }
    fdqn::Rng episode_seeds = fdqn::make_stream(0, "rollout");
    int step = 0, episode = 0;
    while (step < args.steps) {
        fdqn::Observation obs = env->reset(episode_seeds.next_u64());
        double reward = 0.0;
        int ep_steps = 0;
        bool done = false;
        while (!done && step < args.steps) {
            const fdqn::Matrix q = fdqn::forward(params, fdqn::obs_to_row(obs));
            int best = 0;
            for (int a = 1; a < q.cols; ++a)
                if (q(0, a) > q(0, best)) best = a;
            fdqn::StepResult sr = env->step(best);
            reward += sr.reward;
            obs = std::move(sr.observation);
            done = sr.done;
            ++ep_steps;
            ++step;
            if (!dump.empty()) {
                char name[32];
                std::snprintf(name, sizeof(name), "frame_%06d.pgm", step);
                fdqn::write_pgm((fs::path(dump) / name).string(), *env->native_frame());
            }
        }
        ++episode;
        std::printf("episode:%d steps:%d reward:%.6g%s\n", episode, ep_steps, reward,
                    done ? "" : " (truncated by --steps)");
    }
    return 0;
}

struct SweepArgs {
    std::string config_path;
    std::string out_dir = ".";
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::vector<std::string> grids;
    int parallel = 1;
};

struct SweepCell {
    int index = 0;
    std::vector<std::string> overrides;
};

int cmd_sweep(const SweepArgs& args) {
    if (args.grids.empty()) throw fdqn::ConfigError("sweep: at least one --grid KEY=V1,V2,... is required");
    if (args.parallel < 1) throw fdqn::ConfigError("sweep: --parallel must be >= 1");

    // Cross product of all grid axes, in the order the flags were given.
    std::vector<std::pair<std::string, std::vector<std::string>>> axes;
    for (const auto& g : args.grids) {
        const auto eq = g.find('=');
        if (eq == std::string::npos) throw fdqn::ConfigError("sweep: --grid '" + g + "' must be KEY=V1,V2,...");
        const std::string key = g.substr(0, eq);
        std::vector<std::string> values;
        std::stringstream ss(g.substr(eq + 1));
        std::string v;
        while (std::getline(ss, v, ',')) values.push_back(v);
        if (values.empty()) throw fdqn::ConfigError("sweep: --grid '" + g + "' has no values");
        axes.emplace_back(key, values);
    }
    std::vector<SweepCell> cells{{0, {}}};
    for (const auto& [key, values] : axes) {
        std::vector<SweepCell> next;
        for (const auto& cell : cells) {
            for (const auto& v : values) {
                SweepCell c = cell;
                c.overrides.push_back(key + "=" + v);
                next.push_back(std::move(c));
            }
        }
        cells = std::move(next);
    }
    for (std::size_t i = 0; i < cells.size(); ++i) cells[i].index = static_cast<int>(i);

    fs::create_directories(args.out_dir);
    const fdqn::TrainConfig base = fdqn::parse_config_text(read_text_file(args.config_path));

    std::vector<std::string> manifest(cells.size());
    std::atomic<std::size_t> next_cell{0};
    std::atomic<bool> failed{false};
    std::string first_error;
    std::mutex error_mu;

    auto run_cells = [&] {
        for (;;) {
            const std::size_t i = next_cell.fetch_add(1);
            if (i >= cells.size() || failed.load()) return;
            char cell_name[32];
            std::snprintf(cell_name, sizeof(cell_name), "cell_%03d", cells[i].index);
            const fs::path cell_dir = fs::path(args.out_dir) / cell_name;
            try {
                fdqn::TrainConfig cfg = base;
                if (args.seed_set) cfg.seed = args.seed;
                for (const auto& ov : cells[i].overrides) fdqn::apply_override(cfg, ov);
                cfg.checkpoint_path = (cell_dir / fs::path(cfg.checkpoint_path).filename()).string();
                cfg.metrics_path = (cell_dir / fs::path(cfg.metrics_path).filename()).string();
                fdqn::validate_config(cfg);
                fs::create_directories(cell_dir);
                const fdqn::TrainResult r = fdqn::train(cfg);
                double tail = 0.0;
                const std::size_t n = std::min<std::size_t>(10, r.metrics.size());
                for (std::size_t k = r.metrics.size() - n; k < r.metrics.size(); ++k)
                    tail += r.metrics[k].episode_reward;
                std::string line = std::string("cell:") + cell_name;
                for (const auto& ov : cells[i].overrides) line += " " + ov;
                char buf[64];
                std::snprintf(buf, sizeof(buf), " last10_mean_reward:%.6g", n ? tail / n : 0.0);
                manifest[i] = line + buf;
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(error_mu);
                if (!failed.exchange(true)) first_error = e.what();
                return;
            }
        }
    };

    const int workers = std::max(1, std::min<int>(args.parallel, static_cast<int>(cells.size())));
    if (workers == 1) {
        run_cells();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(run_cells);
        for (auto& t : pool) t.join();
    }
    if (failed.load()) throw fdqn::Error("sweep: cell failed: " + first_error);

    std::ofstream mf(fs::path(args.out_dir) / "manifest.txt");
    if (!mf) throw fdqn::IoError("sweep: cannot write manifest");
    for (const auto& line : manifest) {
        mf << line << "\n";
        std::printf("%s\n", line.c_str());
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Flexible DQN training engine"};
    app.name("fdqn");
    app.require_subcommand(1);

    TrainArgs train_args;
    auto* train = app.add_subcommand("train", "Train an agent from a config file");
    train->add_option("--config", train_args.config_path, "Config file (key = value lines)")->required();
    train->add_option("--out", train_args.out_dir, "Root directory for result files");
    train->add_option("--seed", train_args.seed, "Master seed (overrides the config)")
        ->each([&](const std::string&) { train_args.seed_set = true; });
    train->add_option("--override", train_args.overrides, "Config override key=value (repeatable)");

    EvalArgs eval_args;
    auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint");
    eval->add_option("--checkpoint", eval_args.checkpoint, "Checkpoint file")->required();
    eval->add_option("--env", eval_args.env_name, "Environment name (default: from checkpoint)");
    eval->add_option("--episodes", eval_args.episodes, "Number of evaluation episodes");
    eval->add_option("--epsilon", eval_args.epsilon, "Exploration rate during evaluation");
    eval->add_option("--seed", eval_args.seed, "Evaluation seed");
    eval->add_option("--threads", eval_args.threads, "Worker threads (episodes stay deterministic)");

    GradcheckArgs grad_args;
    auto* gradcheck = app.add_subcommand("gradcheck", "Check analytic gradients against finite differences");
    gradcheck->add_option("--trials", grad_args.trials, "Number of random networks to test");
    gradcheck->add_option("--tolerance", grad_args.tolerance, "Max allowed relative error");

    RolloutArgs roll_args;
    auto* rollout = app.add_subcommand("rollout", "Run a greedy policy and optionally dump frames");
    rollout->add_option("--checkpoint", roll_args.checkpoint, "Checkpoint file")->required();
    rollout->add_option("--dump-frames", roll_args.dump_dir, "Directory for PGM frame dumps");
    rollout->add_option("--out", roll_args.out_dir, "Root directory for result files");
    rollout->add_option("--steps", roll_args.steps, "Total environment steps to run");

    SweepArgs sweep_args;
    auto* sweep = app.add_subcommand("sweep", "Train the cross product of grid values");
    sweep->add_option("--config", sweep_args.config_path, "Base config file")->required();
    sweep->add_option("--grid", sweep_args.grids, "Grid axis KEY=V1,V2,... (repeatable)");
    sweep->add_option("--out", sweep_args.out_dir, "Root directory for cell results");
    sweep->add_option("--seed", sweep_args.seed, "Master seed for every cell")
        ->each([&](const std::string&) { sweep_args.seed_set = true; });
    sweep->add_option("--parallel", sweep_args.parallel, "Run up to N cells concurrently");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        std::fputs(app.help().c_str(), stderr);
        return 1;
    }

    try {
        if (train->parsed()) return cmd_train(train_args);
        if (eval->parsed()) return cmd_eval(eval_args);
        if (gradcheck->parsed()) return cmd_gradcheck(grad_args);
        if (rollout->parsed()) return cmd_rollout(roll_args);
        if (sweep->parsed()) return cmd_sweep(sweep_args);
    } catch (const fdqn::ConfigError& e) {
        fdqn::log_error(e.what());
        return 2;
    } catch (const std::exception& e) {
        fdqn::log_error(e.what());
        return 3;
    }
    return 0;
}
