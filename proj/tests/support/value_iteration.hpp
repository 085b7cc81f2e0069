#pragma once

// Exact Q* for the 5-state chain by value iteration. Written against the
// chain's transition table directly so it stays independent of the
// environment implementation it is used to check.

#include <array>
#include <cmath>

namespace chain_oracle {

constexpr int kStates = 5;
constexpr int kActions = 2;

struct Outcome {
    int next = 0;
    double reward = 0.0;
    bool terminal = false;
};

inline Outcome chain_step(int state, int action) {
    const int next = action == 0 ? (state > 0 ? state - 1 : 0) : (state < kStates - 1 ? state + 1 : kStates - 1);
    const bool terminal = next == kStates - 1;
    return {next, terminal ? 1.0 : 0.0, terminal};
}

using QTable = std::array<std::array<double, kActions>, kStates>;

inline QTable q_star(double gamma, int sweeps = 1000) {
    QTable q{};
    for (int sweep = 0; sweep < sweeps; ++sweep) {
        QTable next{};
        for (int s = 0; s < kStates - 1; ++s) {
            for (int a = 0; a < kActions; ++a) {
                const Outcome o = chain_step(s, a);
                const double bootstrap = o.terminal ? 0.0 : std::max(q[o.next][0], q[o.next][1]);
                next[s][a] = o.reward + gamma * bootstrap;
            }
        }
        q = next;
    }
    return q;
}

// Lowest index wins ties, same convention as the agent's argmax.
inline int greedy(const QTable& q, int state) { return q[state][1] > q[state][0] ? 1 : 0; }

}  // namespace chain_oracle
