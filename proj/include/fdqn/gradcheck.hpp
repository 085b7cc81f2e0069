#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fdqn/nn.hpp"
#include "fdqn/rng.hpp"

namespace fdqn {

struct GradCheckResult {
    std::string description;
    double max_rel_err = 0.0;
};

// Relative error with a unit floor: |a-b| / max(1, |a|, |b|). Analytic and
// finite-difference gradients of a broken backward pass differ by the
// gradient's own magnitude, far above any sane tolerance.
inline double grad_rel_err(double analytic, double estimate) {
    const double denom = std::max({1.0, std::abs(analytic), std::abs(estimate)});
    return std::abs(analytic - estimate) / denom;
}

// Smallest |pre-activation| over all rectifier units, computed on a 64-bit
// mirror. Central differences are only meaningful when the h-ball around the
// parameters stays on one side of every rectifier kink, so trial batches that
// put a pre-activation inside the probe radius get redrawn.
inline double min_abs_relu_preactivation(const ParametersT<double>& params, const MatrixT<double>& batch) {
    const auto plan = layer_plan(params.spec);
    MatrixT<double> cur = batch;
    double min_abs = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < plan.size(); ++i) {
        LayerPlan p = plan[i];
        const bool relu = p.relu;
        p.relu = false;  // keep the raw pre-activation visible
        MatrixT<double> next(cur.rows, p.output_width());
        if (p.is_conv)
            detail::conv_forward(p, params.layers[i].weights, params.layers[i].bias, cur, next);
        else
            detail::dense_forward(p, params.layers[i].weights, params.layers[i].bias, cur, next);
        if (relu) {
            for (auto& v : next.data) {
                min_abs = std::min(min_abs, std::abs(v));
                v = std::max(v, 0.0);
            }
        }
        cur = std::move(next);
    }
    return min_abs;
}

// One gradient-check trial: a seeded random tiny network (every fourth trial
// convolutional), a random batch, random actions and targets; compares
// analytic gradients against the 64-bit central-difference oracle.
inline GradCheckResult run_gradcheck_trial(std::uint64_t seed, double h = 1e-4) {
    Rng rng(derive_seed(seed, "gradcheck-setup"));

    NetworkSpec spec;
    std::string desc;
    if (rng.uniform_int(4) == 0) {
        const int channels = 2 + rng.uniform_int(2);           // 2..3
        const int side = 8 + 2 * rng.uniform_int(2);           // 8 or 10
        const int out_ch = 3 + rng.uniform_int(3);             // 3..5
        const int hidden = 4 + rng.uniform_int(5);             // 4..8
        const int actions = 2 + rng.uniform_int(3);            // 2..4
        spec = NetworkSpec::frames_input(channels, side, side, {{out_ch, 3, 2}}, {hidden}, actions);
        desc = "conv " + std::to_string(channels) + "x" + std::to_string(side) + "x" + std::to_string(side) +
               " -> " + std::to_string(out_ch) + "@3x3/2 -> " + std::to_string(hidden) + " -> " +
               std::to_string(actions);
    } else {
        const int dim = 2 + rng.uniform_int(5);  // 2..6
        std::vector<int> hidden{3 + rng.uniform_int(6)};
        if (rng.uniform_int(2) == 1) hidden.push_back(3 + rng.uniform_int(6));
        const int actions = 2 + rng.uniform_int(3);
        spec = NetworkSpec::vector_input(dim, hidden, actions);
        desc = "mlp " + std::to_string(dim) + " -> " + std::to_string(hidden[0]) +
               (hidden.size() > 1 ? "," + std::to_string(hidden[1]) : "") + " -> " + std::to_string(actions);
    }

    const Parameters params = init_params(spec, derive_seed(seed, "gradcheck-params"));
    const int batch_size = 1 + rng.uniform_int(6);
    const double kink_margin = 50.0 * h;

    Matrix batch(batch_size, spec.flat_input_size());
    std::vector<int> actions(static_cast<std::size_t>(batch_size));
    std::vector<float> targets(static_cast<std::size_t>(batch_size));
    std::vector<double> targets64(static_cast<std::size_t>(batch_size));
    const ParametersT<double> p64 = params.cast<double>();
    for (int attempt = 0;; ++attempt) {
        if (attempt >= 200)
            throw NumericError("gradcheck: could not find a batch clear of rectifier kinks");
        Rng draw(derive_seed(seed, "gradcheck-batch-" + std::to_string(attempt)));
        for (auto& v : batch.data) v = draw.uniform_float(-1.0f, 1.0f);
        for (int i = 0; i < batch_size; ++i) {
            actions[static_cast<std::size_t>(i)] = draw.uniform_int(spec.action_size);
            const float y = draw.uniform_float(-2.0f, 2.0f);
            targets[static_cast<std::size_t>(i)] = y;
            targets64[static_cast<std::size_t>(i)] = static_cast<double>(y);
        }
        MatrixT<double> b64(batch.rows, batch.cols);
        b64.data.assign(batch.data.begin(), batch.data.end());
        if (min_abs_relu_preactivation(p64, b64) > kink_margin) break;
    }

    const auto [loss, grads] = loss_and_grads(params, batch, actions, targets);
    (void)loss;
    const ParametersT<double> est = finite_diff_grads(params, batch, actions, targets64, h);

    GradCheckResult result;
    result.description = desc + " batch=" + std::to_string(batch_size);
    for (std::size_t li = 0; li < grads.layers.size(); ++li) {
        for (std::size_t k = 0; k < grads.layers[li].weights.size(); ++k)
            result.max_rel_err = std::max(
                result.max_rel_err, grad_rel_err(grads.layers[li].weights[k], est.layers[li].weights[k]));
        for (std::size_t k = 0; k < grads.layers[li].bias.size(); ++k)
            result.max_rel_err =
                std::max(result.max_rel_err, grad_rel_err(grads.layers[li].bias[k], est.layers[li].bias[k]));
    }
    return result;
}

}  // namespace fdqn
