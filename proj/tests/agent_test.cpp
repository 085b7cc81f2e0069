#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "fdqn/agent.hpp"

using namespace fdqn;

namespace {

// Net whose Q-values are the output biases, independent of the input.
Parameters constant_q_net(std::vector<float> q) {
    const NetworkSpec spec = NetworkSpec::vector_input(2, {2}, static_cast<int>(q.size()));
    Parameters p = zero_params(spec);
    p.layers.back().bias = std::move(q);
    return p;
}

Transition make_transition(float reward, bool done) {
    Transition t;
    t.state = Observation::from_vector({0.5f, -0.5f});
    t.action = 0;
    t.reward = reward;
    t.next_state = Observation::from_vector({0.25f, 0.75f});
    t.done = done;
    return t;
}

Matrix obs_row(const Observation& o) {
    Matrix m(1, o.flat_size());
    o.write_flat(m.row(0));
    return m;
}

}  // namespace

TEST_CASE("epsilon schedule") {
    const EpsilonSchedule sched{1.0, 0.01, 0.995};

    SECTION("pinned values") {
        CHECK(sched.at(0) == 1.0);
        CHECK(sched.at(1) == Catch::Approx(0.995).epsilon(1e-14));
        CHECK(sched.at(920) == 0.01);
        CHECK(sched.at(1000000) == 0.01);
    }

    SECTION("matches max(eps_min, eps_max * decay^t) to 1e-12") {
        for (const std::uint64_t t : {0ull, 1ull, 10ull, 100ull, 919ull, 920ull, 1000000ull}) {
            const double expected = std::max(0.01, std::pow(0.995, static_cast<double>(t)));
            CHECK(std::abs(sched.at(t) - expected) < 1e-12);
        }
    }

    SECTION("floor first binds at t = 919") {
        // independent oracle: repeated multiplication until the floor is hit
        double raw = 1.0;
        std::uint64_t first_bind = 0;
        for (std::uint64_t t = 1; t <= 2000; ++t) {
            raw *= 0.995;
            if (raw <= 0.01) {
                first_bind = t;
                break;
            }
        }
        CHECK(first_bind == 919);
        CHECK(sched.at(918) > 0.01);
        CHECK(sched.at(919) == 0.01);
    }

    SECTION("non-increasing, never below the floor") {
        double prev = sched.at(0);
        for (std::uint64_t t = 1; t < 3000; ++t) {
            const double e = sched.at(t);
            CHECK(e <= prev);
            CHECK(e >= sched.eps_min);
            if (e < sched.eps_min + 1e-15 && prev < sched.eps_min + 1e-15) CHECK(e == prev);
            prev = e;
        }
    }

    SECTION("validation") {
        CHECK_THROWS_AS((EpsilonSchedule{0.5, 0.9, 0.995}.validate()), ConfigError);
        CHECK_THROWS_AS((EpsilonSchedule{1.0, 0.01, 0.0}.validate()), ConfigError);
        CHECK_THROWS_AS((EpsilonSchedule{1.5, 0.01, 0.995}.validate()), ConfigError);
    }
}

TEST_CASE("select_action") {
    SECTION("greedy picks the argmax") {
        Rng rng(0);
        const std::vector<float> q{0.1f, 0.9f, 0.3f};
        CHECK(select_action(q, 0.0, rng) == 1);
    }

    SECTION("ties break to the lowest index") {
        Rng rng(0);
        const std::vector<float> q{0.5f, 0.5f};
        CHECK(select_action(q, 0.0, rng) == 0);
    }

    SECTION("greedy consistency on random rows") {
        Rng rng(1);
        for (int trial = 0; trial < 200; ++trial) {
            std::vector<float> q(static_cast<std::size_t>(2 + rng.uniform_int(5)));
            for (auto& v : q) v = rng.uniform_float(-1.0f, 1.0f);
            const int pick = select_action(q, 0.0, rng);
            for (const float v : q) CHECK(q[static_cast<std::size_t>(pick)] >= v);
        }
    }

    SECTION("eps = 1 gives a uniform action distribution") {
        Rng rng(77);
        const std::vector<float> q{5.0f, -5.0f};  // argmax never picked on purpose
        int ones = 0;
        const int draws = 100000;
        for (int i = 0; i < draws; ++i) ones += select_action(q, 1.0, rng);
        const double freq = static_cast<double>(ones) / draws;
        CHECK(freq == Catch::Approx(0.5).margin(0.01));
    }

    SECTION("empty q_row is rejected") {
        Rng rng(0);
        CHECK_THROWS_AS(select_action(std::vector<float>{}, 0.0, rng), ContractViolation);
    }
}

TEST_CASE("td_targets") {
    SECTION("terminal transitions take y = r regardless of Q") {
        const Parameters target = constant_q_net({100.0f, 100.0f});
        const Parameters online = constant_q_net({7.0f, 7.0f});
        Transition t = make_transition(-1.0f, true);
        const auto y = td_targets({t}, online, target, 0.99, false);
        CHECK(y[0] == -1.0f);
        // terminal cutoff: next_state must not matter
        t.next_state = Observation::from_vector({123.0f, -9.0f});
        const auto y2 = td_targets({t}, online, target, 0.99, false);
        CHECK(y2[0] == -1.0f);
    }

    SECTION("plain target is r + gamma * max target-Q") {
        const Parameters target = constant_q_net({2.0f, 1.0f});
        const Parameters online = constant_q_net({0.0f, 0.0f});
        const auto y = td_targets({make_transition(1.0f, false)}, online, target, 0.99, false);
        CHECK(y[0] == Catch::Approx(2.98).epsilon(1e-6));
    }

    SECTION("double target evaluates the online argmax on the target net") {
        const Parameters online = constant_q_net({1.0f, 5.0f});
        const Parameters target = constant_q_net({10.0f, 2.0f});
        const Transition t = make_transition(0.0f, false);
        const auto y_double = td_targets({t}, online, target, 0.99, true);
        CHECK(y_double[0] == Catch::Approx(1.98).epsilon(1e-6));
        const auto y_plain = td_targets({t}, online, target, 0.99, false);
        CHECK(y_plain[0] == Catch::Approx(9.9).epsilon(1e-6));
    }

    SECTION("modes coincide when online == target, and plain >= double otherwise") {
        const NetworkSpec spec = NetworkSpec::vector_input(2, {8}, 3);
        std::vector<Transition> batch;
        Rng rng(5);
        for (int i = 0; i < 32; ++i) {
            Transition t;
            t.state = Observation::from_vector({rng.uniform_float(-1, 1), rng.uniform_float(-1, 1)});
            t.action = rng.uniform_int(3);
            t.reward = rng.uniform_float(-1, 1);
            t.next_state = Observation::from_vector({rng.uniform_float(-1, 1), rng.uniform_float(-1, 1)});
            t.done = rng.uniform_int(5) == 0;
            batch.push_back(t);
        }
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            const Parameters online = init_params(spec, seed);
            const auto same = td_targets(batch, online, online, 0.99, true);
            const auto same_plain = td_targets(batch, online, online, 0.99, false);
            CHECK(same == same_plain);

            const Parameters target = init_params(spec, seed + 1000);
            const auto y_plain = td_targets(batch, online, target, 0.99, false);
            const auto y_double = td_targets(batch, online, target, 0.99, true);
            for (std::size_t i = 0; i < batch.size(); ++i) CHECK(y_plain[i] >= y_double[i]);
        }
    }

    SECTION("gamma bounds and NaN detection") {
        const Parameters p = constant_q_net({0.0f, 0.0f});
        CHECK_THROWS_AS(td_targets({make_transition(0, false)}, p, p, 1.5, false), ContractViolation);
        Parameters bad = p;
        bad.layers.back().bias[0] = std::numeric_limits<float>::quiet_NaN();
        CHECK_THROWS_AS(td_targets({make_transition(0, false)}, p, bad, 0.99, false), NumericError);
    }
}

TEST_CASE("agent lifecycle") {
    const NetworkSpec spec = NetworkSpec::vector_input(2, {2}, 2);
    AgentConfig cfg;
    cfg.batch_size = 1;
    cfg.learn_start = 0;
    cfg.learning_rate = 0.001;
    cfg.gamma = 0.99;

    SECTION("create starts with target == online") {
        const Agent a = Agent::create(spec, cfg, 3);
        CHECK(a.online == a.target);
        CHECK(a.adam.t == 0);
    }

    SECTION("sync_target is exact and idempotent; learn_step leaves target alone") {
        Agent a = Agent::create(spec, cfg, 3);
        const Transition t = make_transition(5.0f, true);
        learn_step(a, {t});
        CHECK(a.online != a.target);
        const Parameters online_snapshot = a.online;
        sync_target(a);
        CHECK(a.target == a.online);
        sync_target(a);
        CHECK(a.target == online_snapshot);

        learn_step(a, {t});
        CHECK(a.target == online_snapshot);  // target untouched by learning
        CHECK(a.online != online_snapshot);
    }

    SECTION("targets equal to current Q give zero loss and unchanged online net") {
        Agent a = Agent::create(spec, cfg, 9);
        Transition t = make_transition(0.0f, true);
        const Matrix q = forward(a.online, obs_row(t.state));
        t.reward = q(0, t.action);  // done=true makes y = r = Q(s,a)
        const Parameters before = a.online;
        const float loss = learn_step(a, {t});
        CHECK(loss == 0.0f);
        CHECK(a.online == before);
        CHECK(a.adam.t == 1);
    }

    SECTION("learn_step equals td_targets + loss_and_grads + adam_step composed") {
        Agent a = Agent::create(spec, cfg, 11);
        const Transition t = make_transition(5.0f, true);

        Agent manual = a;
        const auto y = td_targets({t}, manual.online, manual.target, manual.config.gamma,
                                  manual.config.double_dqn);
        Matrix state(1, 2);
        t.state.write_flat(state.row(0));
        const auto [loss_manual, grads] = loss_and_grads(manual.online, state, {t.action}, y);
        adam_step(manual.online, grads, manual.adam,
                  static_cast<float>(manual.config.learning_rate));

        const float loss = learn_step(a, {t});
        CHECK(loss == loss_manual);
        CHECK(a.online == manual.online);
    }

    SECTION("first learn step applies the analytic Adam update to the output layer") {
        // identity hidden weights, so the output layer sees the state itself
        Agent a = Agent::create(spec, cfg, 0);
        a.online = zero_params(spec);
        a.online.layers[0].weights = {1.0f, 0.0f, 0.0f, 1.0f};
        a.online.layers[1].weights = {1.0f, 1.0f, 1.0f, -1.0f};
        sync_target(a);

        Transition t;
        t.state = Observation::from_vector({3.0f, 1.0f});
        t.action = 0;
        t.reward = 5.0f;
        t.done = true;
        t.next_state = t.state;

        const Parameters before = a.online;
        const float q0 = 4.0f;  // 1*3 + 1*1
        learn_step(a, {t});
        // g = 2 (Q - y) h = 2 (4-5) (3,1) = (-6,-2); first Adam step moves by
        // +lr g/(|g| + eps) against the gradient
        const float lr = static_cast<float>(cfg.learning_rate);
        const float g0 = 2.0f * (q0 - 5.0f) * 3.0f;
        const float g1 = 2.0f * (q0 - 5.0f) * 1.0f;
        CHECK(a.online.layers[1].weights[0] ==
              Catch::Approx(before.layers[1].weights[0] - lr * g0 / (std::abs(g0) + 1e-8f)).margin(1e-7));
        CHECK(a.online.layers[1].weights[1] ==
              Catch::Approx(before.layers[1].weights[1] - lr * g1 / (std::abs(g1) + 1e-8f)).margin(1e-7));
        // untouched action row
        CHECK(a.online.layers[1].weights[2] == before.layers[1].weights[2]);
        CHECK(a.online.layers[1].weights[3] == before.layers[1].weights[3]);
    }

    SECTION("regression to a fixed terminal target converges") {
        AgentConfig fast = cfg;
        fast.learning_rate = 0.01;
        Agent a = Agent::create(spec, fast, 4);
        Transition t = make_transition(5.0f, true);
        float q = 0.0f;
        int steps = 0;
        for (; steps < 2000; ++steps) {
            learn_step(a, {t});
            Matrix row(1, 2);
            t.state.write_flat(row.row(0));
            q = forward(a.online, row)(0, t.action);
            if (std::abs(q - 5.0f) < 0.01f) break;
        }
        INFO("converged after " << steps << " steps, Q = " << q);
        CHECK(std::abs(q - 5.0f) < 0.01f);
    }
}
