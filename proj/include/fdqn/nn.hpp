#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "fdqn/errors.hpp"
#include "fdqn/matrix.hpp"
#include "fdqn/observation.hpp"
#include "fdqn/rng.hpp"

namespace fdqn {

struct ConvLayerSpec {
    int out_channels = 0;
    int kernel = 0;
    int stride = 0;

    friend bool operator==(const ConvLayerSpec&, const ConvLayerSpec&) = default;
};

// Shape of the Q-network: vector input -> MLP, frames input -> conv stack
// followed by fully connected layers. Activation is the rectifier throughout,
// output layer is linear with one unit per action.
struct NetworkSpec {
    ObsKind input_kind = ObsKind::Vector;
    int input_dim = 0;  // vector input
    int in_channels = 0, in_height = 0, in_width = 0;  // frames input
    std::vector<ConvLayerSpec> conv_layers;
    std::vector<int> hidden_sizes;
    int action_size = 0;

    static NetworkSpec vector_input(int dim, std::vector<int> hidden, int actions) {
        NetworkSpec s;
        s.input_kind = ObsKind::Vector;
        s.input_dim = dim;
        s.hidden_sizes = std::move(hidden);
        s.action_size = actions;
        s.validate();
        return s;
    }

    static NetworkSpec frames_input(int channels, int height, int width, std::vector<ConvLayerSpec> conv,
                                    std::vector<int> hidden, int actions) {
        NetworkSpec s;
        s.input_kind = ObsKind::Frames;
        s.in_channels = channels;
        s.in_height = height;
        s.in_width = width;
        s.conv_layers = std::move(conv);
        s.hidden_sizes = std::move(hidden);
        s.action_size = actions;
        s.validate();
        return s;
    }

    static int conv_out(int size, int kernel, int stride) { return (size - kernel) / stride + 1; }

    int flat_input_size() const {
        return input_kind == ObsKind::Vector ? input_dim : in_channels * in_height * in_width;
    }

    void validate() const {
        if (action_size < 2) throw ConfigError("NetworkSpec: action_size must be >= 2");
        if (hidden_sizes.empty()) throw ConfigError("NetworkSpec: hidden_sizes must be non-empty");
        for (const int h : hidden_sizes)
            if (h <= 0) throw ConfigError("NetworkSpec: hidden sizes must be positive");
        if (input_kind == ObsKind::Vector) {
            if (input_dim <= 0) throw ConfigError("NetworkSpec: input_dim must be positive");
            if (!conv_layers.empty()) throw ConfigError("NetworkSpec: conv layers require frames input");
        } else {
            if (in_channels <= 0 || in_height <= 0 || in_width <= 0)
                throw ConfigError("NetworkSpec: frame dimensions must be positive");
            int h = in_height, w = in_width;
            for (const auto& c : conv_layers) {
                if (c.out_channels <= 0 || c.kernel <= 0 || c.stride <= 0)
                    throw ConfigError("NetworkSpec: conv layer dimensions must be positive");
                if (c.kernel > h || c.kernel > w)
                    throw ConfigError("NetworkSpec: conv kernel larger than its input");
                h = conv_out(h, c.kernel, c.stride);
                w = conv_out(w, c.kernel, c.stride);
                if (h < 1 || w < 1) throw ConfigError("NetworkSpec: conv output collapses below 1x1");
            }
        }
    }

    friend bool operator==(const NetworkSpec&, const NetworkSpec&) = default;
};

// ---------------------------------------------------------------------------
// Layer plan: concrete per-layer shapes derived from a NetworkSpec. Parameters
// and gradients follow this ordering exactly (conv stack, hidden, output).
// ---------------------------------------------------------------------------

struct LayerPlan {
    bool is_conv = false;
    bool relu = true;  // output layer is linear
    // conv fields
    int in_ch = 0, in_h = 0, in_w = 0;
    int out_ch = 0, kernel = 0, stride = 0;
    int out_h = 0, out_w = 0;
    // dense fields
    int in_size = 0, out_size = 0;

    std::size_t weight_count() const {
        return is_conv ? static_cast<std::size_t>(out_ch) * in_ch * kernel * kernel
                       : static_cast<std::size_t>(out_size) * in_size;
    }
    std::size_t bias_count() const { return is_conv ? out_ch : out_size; }
    int fan_in() const { return is_conv ? in_ch * kernel * kernel : in_size; }
    int output_width() const { return is_conv ? out_ch * out_h * out_w : out_size; }
};

inline std::vector<LayerPlan> layer_plan(const NetworkSpec& spec) {
    spec.validate();
    std::vector<LayerPlan> plan;
    int flat = spec.flat_input_size();
    if (spec.input_kind == ObsKind::Frames) {
        int c = spec.in_channels, h = spec.in_height, w = spec.in_width;
        for (const auto& cl : spec.conv_layers) {
            LayerPlan p;
            p.is_conv = true;
            p.in_ch = c;
            p.in_h = h;
            p.in_w = w;
            p.out_ch = cl.out_channels;
            p.kernel = cl.kernel;
            p.stride = cl.stride;
            p.out_h = NetworkSpec::conv_out(h, cl.kernel, cl.stride);
            p.out_w = NetworkSpec::conv_out(w, cl.kernel, cl.stride);
            plan.push_back(p);
            c = p.out_ch;
            h = p.out_h;
            w = p.out_w;
        }
        flat = c * h * w;
    }
    for (std::size_t i = 0; i <= spec.hidden_sizes.size(); ++i) {
        LayerPlan p;
        p.is_conv = false;
        const bool output = i == spec.hidden_sizes.size();
        p.in_size = flat;
        p.out_size = output ? spec.action_size : spec.hidden_sizes[i];
        p.relu = !output;
        plan.push_back(p);
        flat = p.out_size;
    }
    return plan;
}

// ---------------------------------------------------------------------------
// Parameters
// ---------------------------------------------------------------------------

template <typename T>
struct LayerParamsT {
    std::vector<T> weights;  // conv: (out_ch, in_ch, k, k) row-major; dense: (out, in)
    std::vector<T> bias;

    friend bool operator==(const LayerParamsT&, const LayerParamsT&) = default;
};

template <typename T>
struct ParametersT {
    NetworkSpec spec;
    std::vector<LayerParamsT<T>> layers;

    std::size_t scalar_count() const {
        std::size_t n = 0;
        for (const auto& l : layers) n += l.weights.size() + l.bias.size();
        return n;
    }

    bool all_finite() const {
        for (const auto& l : layers) {
            for (const T v : l.weights)
                if (!std::isfinite(v)) return false;
            for (const T v : l.bias)
                if (!std::isfinite(v)) return false;
        }
        return true;
    }

    template <typename U>
    ParametersT<U> cast() const {
        ParametersT<U> out;
        out.spec = spec;
        out.layers.reserve(layers.size());
        for (const auto& l : layers) {
            LayerParamsT<U> lu;
            lu.weights.assign(l.weights.begin(), l.weights.end());
            lu.bias.assign(l.bias.begin(), l.bias.end());
            out.layers.push_back(std::move(lu));
        }
        return out;
    }

    friend bool operator==(const ParametersT&, const ParametersT&) = default;
};

using Parameters = ParametersT<float>;
using Gradients = ParametersT<float>;

template <typename T>
ParametersT<T> zeros_like_t(const NetworkSpec& spec) {
    ParametersT<T> p;
    p.spec = spec;
    for (const auto& l : layer_plan(spec)) {
        LayerParamsT<T> lp;
        lp.weights.assign(l.weight_count(), T(0));
        lp.bias.assign(l.bias_count(), T(0));
        p.layers.push_back(std::move(lp));
    }
    return p;
}

inline Parameters zero_params(const NetworkSpec& spec) { return zeros_like_t<float>(spec); }

// Random init: weights uniform in +-sqrt(6/fan_in) per layer, biases zero.
// Draw order is fixed (layer by layer, flat weight order) so a seed pins the
// result bit-for-bit.
inline Parameters init_params(const NetworkSpec& spec, std::uint64_t seed) {
    Parameters p = zero_params(spec);
    Rng rng(seed);
    const auto plan = layer_plan(spec);
    for (std::size_t i = 0; i < plan.size(); ++i) {
        const float bound = std::sqrt(6.0f / static_cast<float>(plan[i].fan_in()));
        for (auto& w : p.layers[i].weights) w = rng.uniform_float(-bound, bound);
    }
    return p;
}

// ---------------------------------------------------------------------------
// Forward pass
// ---------------------------------------------------------------------------

// Post-activation outputs of every stage, kept for backprop. acts[0] is the
// input batch; the rectifier mask is recovered from post-activations (>0).
template <typename T>
struct ForwardTrace {
    std::vector<MatrixT<T>> acts;
};

namespace detail {

// Patch extraction (im2col): one row of `patches` per output position holding
// the receptive field in (ic, ky, kx) order.
template <typename T>
void extract_patches(const LayerPlan& p, const T* x, std::vector<T>& patches) {
    const int in_hw = p.in_h * p.in_w;
    T* dst = patches.data();
    for (int oy = 0; oy < p.out_h; ++oy) {
        for (int ox = 0; ox < p.out_w; ++ox) {
            const int iy0 = oy * p.stride;
            const int ix0 = ox * p.stride;
            for (int ic = 0; ic < p.in_ch; ++ic) {
                const T* xc = x + static_cast<std::size_t>(ic) * in_hw;
                for (int ky = 0; ky < p.kernel; ++ky) {
                    const T* xr = xc + static_cast<std::size_t>(iy0 + ky) * p.in_w + ix0;
                    for (int kx = 0; kx < p.kernel; ++kx) *dst++ = xr[kx];
                }
            }
        }
    }
}

// Convolution as a per-position product against the transposed kernel matrix.
// Accumulating across k with the output channels in the inner (contiguous)
// loop keeps the vector lanes independent.
template <typename T>
void conv_forward(const LayerPlan& p, const std::vector<T>& w, const std::vector<T>& b,
                  const MatrixT<T>& in, MatrixT<T>& out) {
    const int out_hw = p.out_h * p.out_w;
    const int cols = p.in_ch * p.kernel * p.kernel;
    std::vector<T> wt(static_cast<std::size_t>(cols) * p.out_ch);
    for (int oc = 0; oc < p.out_ch; ++oc)
        for (int k = 0; k < cols; ++k)
            wt[static_cast<std::size_t>(k) * p.out_ch + oc] = w[static_cast<std::size_t>(oc) * cols + k];

    std::vector<T> patches(static_cast<std::size_t>(out_hw) * cols);
    std::vector<T> acc(static_cast<std::size_t>(p.out_ch));
    for (int row = 0; row < in.rows; ++row) {
        extract_patches(p, in.row(row), patches);
        T* y = out.row(row);
        for (int pos = 0; pos < out_hw; ++pos) {
            const T* patch = patches.data() + static_cast<std::size_t>(pos) * cols;
            for (int oc = 0; oc < p.out_ch; ++oc) acc[oc] = b[oc];
            for (int k = 0; k < cols; ++k) {
                const T v = patch[k];
                const T* wk = wt.data() + static_cast<std::size_t>(k) * p.out_ch;
                for (int oc = 0; oc < p.out_ch; ++oc) acc[oc] += v * wk[oc];
            }
            for (int oc = 0; oc < p.out_ch; ++oc) {
                const T sum = acc[oc];
                y[static_cast<std::size_t>(oc) * out_hw + pos] = p.relu ? (sum > T(0) ? sum : T(0)) : sum;
            }
        }
    }
}

template <typename T>
void dense_forward(const LayerPlan& p, const std::vector<T>& w, const std::vector<T>& b,
                   const MatrixT<T>& in, MatrixT<T>& out) {
    std::vector<T> wt(static_cast<std::size_t>(p.in_size) * p.out_size);
    for (int o = 0; o < p.out_size; ++o)
        for (int i = 0; i < p.in_size; ++i)
            wt[static_cast<std::size_t>(i) * p.out_size + o] = w[static_cast<std::size_t>(o) * p.in_size + i];

    for (int row = 0; row < in.rows; ++row) {
        const T* x = in.row(row);
        T* y = out.row(row);
        for (int o = 0; o < p.out_size; ++o) y[o] = b[o];
        for (int i = 0; i < p.in_size; ++i) {
            const T v = x[i];
            const T* wr = wt.data() + static_cast<std::size_t>(i) * p.out_size;
            for (int o = 0; o < p.out_size; ++o) y[o] += v * wr[o];
        }
        if (p.relu)
            for (int o = 0; o < p.out_size; ++o) y[o] = y[o] > T(0) ? y[o] : T(0);
    }
}

}  // namespace detail

// Runs the network on a batch (rows = samples, cols = flattened observation).
// Pure: params and batch are untouched; repeated calls are bit-identical.
template <typename T>
MatrixT<T> forward_t(const ParametersT<T>& params, const MatrixT<T>& batch,
                     ForwardTrace<T>* trace = nullptr) {
    const auto plan = layer_plan(params.spec);
    if (params.layers.size() != plan.size())
        throw ContractViolation("forward: parameter layer count does not match spec");
    for (std::size_t i = 0; i < plan.size(); ++i) {
        if (params.layers[i].weights.size() != plan[i].weight_count() ||
            params.layers[i].bias.size() != plan[i].bias_count())
            throw ContractViolation("forward: layer " + std::to_string(i) + " shape mismatch");
    }
    if (batch.cols != params.spec.flat_input_size())
        throw ContractViolation("forward: batch width " + std::to_string(batch.cols) +
                                " does not match network input " +
                                std::to_string(params.spec.flat_input_size()));

    if (trace) {
        trace->acts.clear();
        trace->acts.push_back(batch);
    }
    MatrixT<T> cur = batch;
    for (std::size_t i = 0; i < plan.size(); ++i) {
        MatrixT<T> next(batch.rows, plan[i].output_width());
        if (plan[i].is_conv)
            detail::conv_forward(plan[i], params.layers[i].weights, params.layers[i].bias, cur, next);
        else
            detail::dense_forward(plan[i], params.layers[i].weights, params.layers[i].bias, cur, next);
        cur = std::move(next);
        if (trace) trace->acts.push_back(cur);
    }
    return cur;
}

inline Matrix forward(const Parameters& params, const Matrix& batch) { return forward_t(params, batch); }

// ---------------------------------------------------------------------------
// Loss and analytic gradients
// ---------------------------------------------------------------------------

namespace detail {

template <typename T>
void check_finite(const MatrixT<T>& m, const char* what) {
    if (!m.all_finite()) throw NumericError(std::string("non-finite values in ") + what);
}

template <typename T>
void conv_backward(const LayerPlan& p, const std::vector<T>& w, const MatrixT<T>& in,
                   const MatrixT<T>& dout, std::vector<T>& gw, std::vector<T>& gb, MatrixT<T>& din) {
    const int in_hw = p.in_h * p.in_w;
    const int out_hw = p.out_h * p.out_w;
    const int cols = p.in_ch * p.kernel * p.kernel;
    std::vector<T> patches(static_cast<std::size_t>(out_hw) * cols);
    std::vector<T> dpatch(static_cast<std::size_t>(cols));
    for (int row = 0; row < in.rows; ++row) {
        extract_patches(p, in.row(row), patches);
        const T* dy = dout.row(row);
        T* dx = din.row(row);
        for (int pos = 0; pos < out_hw; ++pos) {
            const T* patch = patches.data() + static_cast<std::size_t>(pos) * cols;
            std::fill(dpatch.begin(), dpatch.end(), T(0));
            bool any = false;
            for (int oc = 0; oc < p.out_ch; ++oc) {
                const T g = dy[static_cast<std::size_t>(oc) * out_hw + pos];
                if (g == T(0)) continue;
                any = true;
                gb[oc] += g;
                T* gwr = gw.data() + static_cast<std::size_t>(oc) * cols;
                const T* wr = w.data() + static_cast<std::size_t>(oc) * cols;
                for (int k = 0; k < cols; ++k) {
                    gwr[k] += g * patch[k];
                    dpatch[k] += g * wr[k];
                }
            }
            if (!any) continue;
            // scatter the patch gradient back onto the (overlapping) input cells
            const int oy = pos / p.out_w;
            const int ox = pos % p.out_w;
            const int iy0 = oy * p.stride;
            const int ix0 = ox * p.stride;
            const T* src = dpatch.data();
            for (int ic = 0; ic < p.in_ch; ++ic) {
                T* dxc = dx + static_cast<std::size_t>(ic) * in_hw;
                for (int ky = 0; ky < p.kernel; ++ky) {
                    T* dxr = dxc + static_cast<std::size_t>(iy0 + ky) * p.in_w + ix0;
                    for (int kx = 0; kx < p.kernel; ++kx) dxr[kx] += src[kx];
                    src += p.kernel;
                }
            }
        }
    }
}

template <typename T>
void dense_backward(const LayerPlan& p, const std::vector<T>& w, const MatrixT<T>& in,
                    const MatrixT<T>& dout, std::vector<T>& gw, std::vector<T>& gb, MatrixT<T>& din) {
    for (int row = 0; row < in.rows; ++row) {
        const T* x = in.row(row);
        const T* dy = dout.row(row);
        T* dx = din.row(row);
        for (int o = 0; o < p.out_size; ++o) {
            const T g = dy[o];
            if (g == T(0)) continue;
            gb[o] += g;
            T* gwr = gw.data() + static_cast<std::size_t>(o) * p.in_size;
            const T* wr = w.data() + static_cast<std::size_t>(o) * p.in_size;
            for (int i = 0; i < p.in_size; ++i) {
                gwr[i] += g * x[i];
                dx[i] += g * wr[i];
            }
        }
    }
}

}  // namespace detail

// Masked-MSE Q-learning loss: mean over the batch of (y_i - Q(s_i, a_i))^2,
// where only the taken action's output enters the loss. Returns the loss and
// exact analytic gradients with the same shapes as the parameters.
template <typename T>
std::pair<T, ParametersT<T>> loss_and_grads_t(const ParametersT<T>& params, const MatrixT<T>& batch,
                                              const std::vector<int>& actions,
                                              const std::vector<T>& targets) {
    if (batch.rows < 1) throw ContractViolation("loss_and_grads: empty batch");
    if (actions.size() != static_cast<std::size_t>(batch.rows) || targets.size() != actions.size())
        throw ContractViolation("loss_and_grads: batch, actions and targets must have equal length");
    for (const int a : actions)
        if (a < 0 || a >= params.spec.action_size)
            throw ContractViolation("loss_and_grads: action index out of range");
    detail::check_finite(batch, "batch");
    for (const T y : targets)
        if (!std::isfinite(y)) throw NumericError("non-finite values in targets");
    if (!params.all_finite()) throw NumericError("non-finite values in parameters");

    ForwardTrace<T> trace;
    const MatrixT<T> q = forward_t(params, batch, &trace);

    const auto plan = layer_plan(params.spec);
    ParametersT<T> grads = zeros_like_t<T>(params.spec);

    // Output gradient of the mean squared TD error; non-selected actions get 0.
    MatrixT<T> delta(q.rows, q.cols);
    double loss_acc = 0.0;
    const T inv_b = T(1) / static_cast<T>(q.rows);
    for (int i = 0; i < q.rows; ++i) {
        const T diff = q(i, actions[i]) - targets[i];
        loss_acc += static_cast<double>(diff) * static_cast<double>(diff);
        delta(i, actions[i]) = T(2) * diff * inv_b;
    }
    const T loss = static_cast<T>(loss_acc / q.rows);

    for (int li = static_cast<int>(plan.size()) - 1; li >= 0; --li) {
        const LayerPlan& p = plan[li];
        const MatrixT<T>& in = trace.acts[li];
        const MatrixT<T>& out = trace.acts[li + 1];
        if (p.relu) {  // post-activation > 0 marks the active rectifier units
            for (std::size_t k = 0; k < delta.data.size(); ++k)
                if (out.data[k] <= T(0)) delta.data[k] = T(0);
        }
        MatrixT<T> din(in.rows, in.cols);
        if (p.is_conv)
            detail::conv_backward(p, params.layers[li].weights, in, delta, grads.layers[li].weights,
                                  grads.layers[li].bias, din);
        else
            detail::dense_backward(p, params.layers[li].weights, in, delta, grads.layers[li].weights,
                                   grads.layers[li].bias, din);
        delta = std::move(din);
    }
    return {loss, std::move(grads)};
}

inline std::pair<float, Gradients> loss_and_grads(const Parameters& params, const Matrix& batch,
                                                  const std::vector<int>& actions,
                                                  const std::vector<float>& targets) {
    return loss_and_grads_t<float>(params, batch, actions, targets);
}

// ---------------------------------------------------------------------------
// Finite-difference oracle (64-bit)
// ---------------------------------------------------------------------------

template <typename T>
T masked_mse_loss(const ParametersT<T>& params, const MatrixT<T>& batch, const std::vector<int>& actions,
                  const std::vector<T>& targets) {
    const MatrixT<T> q = forward_t(params, batch);
    double acc = 0.0;
    for (int i = 0; i < q.rows; ++i) {
        const double d = static_cast<double>(q(i, actions[i])) - static_cast<double>(targets[i]);
        acc += d * d;
    }
    return static_cast<T>(acc / q.rows);
}

// Central-difference gradient estimate, (L(p+h e) - L(p-h e)) / 2h per scalar.
// Runs a 64-bit mirror of the forward pass regardless of the training
// precision; this is the test oracle for loss_and_grads.
inline ParametersT<double> finite_diff_grads(const Parameters& params, const Matrix& batch,
                                             const std::vector<int>& actions,
                                             const std::vector<double>& targets, double h = 1e-4) {
    if (h <= 0) throw ContractViolation("finite_diff_grads: h must be positive");
    ParametersT<double> p64 = params.cast<double>();
    MatrixT<double> b64;
    b64.rows = batch.rows;
    b64.cols = batch.cols;
    b64.data.assign(batch.data.begin(), batch.data.end());

    ParametersT<double> est = zeros_like_t<double>(params.spec);
    auto probe = [&](std::vector<double>& slot, std::vector<double>& out) {
        for (std::size_t k = 0; k < slot.size(); ++k) {
            const double orig = slot[k];
            slot[k] = orig + h;
            const double lp = masked_mse_loss(p64, b64, actions, targets);
            slot[k] = orig - h;
            const double lm = masked_mse_loss(p64, b64, actions, targets);
            slot[k] = orig;
            out[k] = (lp - lm) / (2.0 * h);
        }
    };
    for (std::size_t li = 0; li < p64.layers.size(); ++li) {
        probe(p64.layers[li].weights, est.layers[li].weights);
        probe(p64.layers[li].bias, est.layers[li].bias);
    }
    return est;
}

// ---------------------------------------------------------------------------
// Adam
// ---------------------------------------------------------------------------

struct AdamState {
    ParametersT<float> m;  // first moment, same shapes as the parameters
    ParametersT<float> v;  // second moment
    std::int64_t t = 0;
    float beta1 = 0.9f;
    float beta2 = 0.999f;
    float eps = 1e-8f;

    static AdamState zeros_like(const NetworkSpec& spec) {
        AdamState s;
        s.m = zeros_like_t<float>(spec);
        s.v = zeros_like_t<float>(spec);
        return s;
    }
};

// One Adam update with bias correction; mutates params and state in place.
inline void adam_step(Parameters& params, const Gradients& grads, AdamState& state, float lr) {
    if (lr <= 0) throw ContractViolation("adam_step: lr must be positive");
    if (grads.layers.size() != params.layers.size())
        throw ContractViolation("adam_step: gradient layer count mismatch");
    state.t += 1;
    const float c1 = 1.0f / (1.0f - static_cast<float>(std::pow(static_cast<double>(state.beta1), state.t)));
    const float c2 = 1.0f / (1.0f - static_cast<float>(std::pow(static_cast<double>(state.beta2), state.t)));
    for (std::size_t li = 0; li < params.layers.size(); ++li) {
        auto& pl = params.layers[li];
        const auto& gl = grads.layers[li];
        if (gl.weights.size() != pl.weights.size() || gl.bias.size() != pl.bias.size())
            throw ContractViolation("adam_step: layer " + std::to_string(li) + " shape mismatch");
        auto update = [&](std::vector<float>& p, const std::vector<float>& g, std::vector<float>& m,
                          std::vector<float>& v) {
            for (std::size_t k = 0; k < p.size(); ++k) {
                m[k] = state.beta1 * m[k] + (1.0f - state.beta1) * g[k];
                v[k] = state.beta2 * v[k] + (1.0f - state.beta2) * g[k] * g[k];
                const float mhat = m[k] * c1;
                const float vhat = v[k] * c2;
                p[k] -= lr * mhat / (std::sqrt(vhat) + state.eps);
            }
        };
        update(pl.weights, gl.weights, state.m.layers[li].weights, state.v.layers[li].weights);
        update(pl.bias, gl.bias, state.m.layers[li].bias, state.v.layers[li].bias);
    }
}

// Scales gradients so their global L2 norm is at most max_norm; returns the
// pre-clip norm. No-op when max_norm <= 0.
inline float clip_global_norm(Gradients& grads, float max_norm) {
    double sq = 0.0;
    for (const auto& l : grads.layers) {
        for (const float g : l.weights) sq += static_cast<double>(g) * g;
        for (const float g : l.bias) sq += static_cast<double>(g) * g;
    }
    const float norm = static_cast<float>(std::sqrt(sq));
    if (max_norm > 0.0f && norm > max_norm) {
        const float scale = max_norm / norm;
        for (auto& l : grads.layers) {
            for (float& g : l.weights) g *= scale;
            for (float& g : l.bias) g *= scale;
        }
    }
    return norm;
}

}  // namespace fdqn
