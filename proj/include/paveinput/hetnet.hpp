#pragma once
// Heteroscedastic multilayer perceptron.
//
// A ReLU stack ends in a linear layer with two units: the predicted mean mu
// and the predicted log-variance s = log sigma^2, both in normalized target
// units. Training minimizes the per-sample Gaussian negative log-likelihood
//
//     L(mu, s; y) = 0.5 * exp(-s) * (y - mu)^2 + 0.5 * s
//
// (additive constant dropped), averaged over the batch, with hand-written
// backpropagation and Adam.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "paveinput/data_adapter.hpp"
#include "paveinput/error.hpp"
#include "paveinput/random.hpp"

namespace paveinput::hetnet {

struct NetworkConfig {
    std::size_t input_dim = 9;
    std::vector<std::size_t> hidden_widths{8, 8, 8};
    std::uint64_t seed = 0;

    void validate() const {
        require(input_dim >= 1, "input_dim must be at least 1");
        for (auto w : hidden_widths) require(w >= 1, "hidden widths must be at least 1");
    }

    friend bool operator==(const NetworkConfig&, const NetworkConfig&) = default;
};

struct TrainConfig {
    std::size_t epochs = 100;
    std::size_t batch_size = 32;
    double learning_rate = 1e-3;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;
    std::uint64_t shuffle_seed = 0;

    void validate() const {
        require(epochs >= 1, "epochs must be at least 1");
        require(batch_size >= 1, "batch_size must be at least 1");
        require(learning_rate > 0.0, "learning_rate must be positive");
        require(adam_beta1 >= 0.0 && adam_beta1 < 1.0, "adam_beta1 must lie in [0, 1)");
        require(adam_beta2 >= 0.0 && adam_beta2 < 1.0, "adam_beta2 must lie in [0, 1)");
        require(adam_epsilon > 0.0, "adam_epsilon must be positive");
    }

    friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

/// Fully connected layer; `weights` is out x in, row-major.
struct DenseLayer {
    std::size_t in = 0;
    std::size_t out = 0;
    std::vector<double> weights;
    std::vector<double> bias;

    DenseLayer() = default;
    DenseLayer(std::size_t in_, std::size_t out_) : in(in_), out(out_), weights(in_ * out_, 0.0), bias(out_, 0.0) {}

    double& w(std::size_t o, std::size_t i) { return weights[o * in + i]; }
    double w(std::size_t o, std::size_t i) const { return weights[o * in + i]; }

    friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

inline constexpr std::size_t kMeanHead = 0;
inline constexpr std::size_t kLogVarHead = 1;

/// Hidden layers followed by the two-unit output layer. Gradients and Adam
/// moments reuse this type.
struct NetworkParams {
    std::vector<DenseLayer> layers;

    std::size_t input_dim() const { return layers.empty() ? 0 : layers.front().in; }
    std::size_t parameter_count() const {
        std::size_t n = 0;
        for (const auto& l : layers) n += l.weights.size() + l.bias.size();
        return n;
    }

    /// Same shapes, all zero.
    NetworkParams zeros_like() const {
        NetworkParams z;
        for (const auto& l : layers) z.layers.emplace_back(l.in, l.out);
        return z;
    }

    void validate() const {
        require(!layers.empty(), "network has no layers");
        for (std::size_t k = 0; k < layers.size(); ++k) {
            const auto& l = layers[k];
            require(l.in >= 1 && l.out >= 1, "layer with zero width");
            require(l.weights.size() == l.in * l.out && l.bias.size() == l.out, "layer storage does not match shape");
            if (k + 1 < layers.size()) require(layers[k + 1].in == l.out, "layer shapes do not chain");
            for (double v : l.weights) require(std::isfinite(v), "non-finite weight");
            for (double v : l.bias) require(std::isfinite(v), "non-finite bias");
        }
        require(layers.back().out == 2, "output layer must have exactly two units");
    }

    /// Pointers to every scalar, in layer order (weights, then bias).
    std::vector<double*> flat() {
        std::vector<double*> out;
        for (auto& l : layers) {
            for (auto& w : l.weights) out.push_back(&w);
            for (auto& b : l.bias) out.push_back(&b);
        }
        return out;
    }

    friend bool operator==(const NetworkParams&, const NetworkParams&) = default;
};

struct AdamState {
    NetworkParams m;
    NetworkParams v;
    std::uint64_t t = 0;

    static AdamState fresh(const NetworkParams& p) { return {p.zeros_like(), p.zeros_like(), 0}; }
};

struct TrainReport {
    std::vector<double> epoch_loss;
    double final_loss = 0.0;
    std::size_t epochs = 0;
    std::uint64_t adam_steps = 0;
};

struct Prediction {
    double mu = 0.0;
    double log_var = 0.0;
};

/// He-style init: weights ~ N(0, 2 / fan_in), biases zero (so the log-variance
/// head starts at sigma^2 = 1 in normalized units).
inline NetworkParams init_network(const NetworkConfig& cfg) {
    cfg.validate();
    Rng rng(cfg.seed);
    NetworkParams p;
    std::size_t fan_in = cfg.input_dim;
    auto add = [&](std::size_t out) {
        DenseLayer l(fan_in, out);
        const double sd = std::sqrt(2.0 / static_cast<double>(fan_in));
        for (auto& w : l.weights) w = rng.normal(0.0, sd);
        p.layers.push_back(std::move(l));
        fan_in = out;
    };
    for (auto w : cfg.hidden_widths) add(w);
    add(2);
    return p;
}

inline double nll_loss(double mu, double log_var, double y) {
    const double r = y - mu;
    return 0.5 * std::exp(-log_var) * r * r + 0.5 * log_var;
}

/// dL/dmu and dL/ds for one sample.
inline std::pair<double, double> nll_head_gradients(double mu, double log_var, double y) {
    const double r = y - mu;
    const double prec = std::exp(-log_var);
    return {-prec * r, 0.5 * (1.0 - prec * r * r)};
}

/// Reusable activation buffers for forward/backward passes.
class Workspace {
public:
    explicit Workspace(const NetworkParams& p) {
        pre_.resize(p.layers.size());
        act_.resize(p.layers.size() + 1);
        delta_.resize(p.layers.size());
        act_[0].resize(p.input_dim());
        for (std::size_t k = 0; k < p.layers.size(); ++k) {
            pre_[k].resize(p.layers[k].out);
            act_[k + 1].resize(p.layers[k].out);
            delta_[k].resize(p.layers[k].out);
        }
    }

    Prediction forward(const NetworkParams& p, std::span<const double> x) {
        if (x.size() != p.input_dim())
            throw DataError("input has " + std::to_string(x.size()) + " features, network expects " +
                            std::to_string(p.input_dim()));
        std::copy(x.begin(), x.end(), act_[0].begin());
        const std::size_t last = p.layers.size() - 1;
        for (std::size_t k = 0; k < p.layers.size(); ++k) {
            const auto& l = p.layers[k];
            const double* a = act_[k].data();
            for (std::size_t o = 0; o < l.out; ++o) {
                const double* wrow = l.weights.data() + o * l.in;
                double z = l.bias[o];
                for (std::size_t i = 0; i < l.in; ++i) z += wrow[i] * a[i];
                pre_[k][o] = z;
                act_[k + 1][o] = (k == last) ? z : (z > 0.0 ? z : 0.0);
            }
        }
        return {act_.back()[kMeanHead], act_.back()[kLogVarHead]};
    }

    /// Adds scale * dL/dtheta for the sample last passed to forward().
    void backward(const NetworkParams& p, double dmu, double ds, double scale, NetworkParams& grad) {
        const std::size_t last = p.layers.size() - 1;
        delta_[last][kMeanHead] = dmu * scale;
        delta_[last][kLogVarHead] = ds * scale;
        for (std::size_t k = last + 1; k-- > 0;) {
            const auto& l = p.layers[k];
            auto& g = grad.layers[k];
            const double* a = act_[k].data();
            const double* d = delta_[k].data();
            for (std::size_t o = 0; o < l.out; ++o) {
                const double dv = d[o];
                g.bias[o] += dv;
                if (dv == 0.0) continue;
                double* grow = g.weights.data() + o * l.in;
                for (std::size_t i = 0; i < l.in; ++i) grow[i] += dv * a[i];
            }
            if (k == 0) break;
            auto& prev = delta_[k - 1];
            std::fill(prev.begin(), prev.end(), 0.0);
            for (std::size_t o = 0; o < l.out; ++o) {
                const double dv = d[o];
                if (dv == 0.0) continue;
                const double* wrow = l.weights.data() + o * l.in;
                for (std::size_t i = 0; i < l.in; ++i) prev[i] += dv * wrow[i];
            }
            // ReLU derivative, taken as 0 at exactly 0.
            for (std::size_t i = 0; i < prev.size(); ++i)
                if (!(pre_[k - 1][i] > 0.0)) prev[i] = 0.0;
        }
    }

    /// Hidden pre-activations from the last forward() call.
    const std::vector<std::vector<double>>& pre_activations() const { return pre_; }

private:
    std::vector<std::vector<double>> pre_;
    std::vector<std::vector<double>> act_;
    std::vector<std::vector<double>> delta_;
};

inline Prediction forward(const NetworkParams& params, std::span<const double> x) {
    Workspace ws(params);
    return ws.forward(params, x);
}

/// Mean loss over the rows `idx` of (x, y).
inline double batch_loss(const NetworkParams& params, const Matrix& x, std::span<const double> y,
                         std::span<const std::size_t> idx) {
    require(!idx.empty(), "empty batch");
    Workspace ws(params);
    double total = 0.0;
    for (auto i : idx) {
        auto pr = ws.forward(params, x.row(i));
        total += nll_loss(pr.mu, pr.log_var, y[i]);
    }
    return total / static_cast<double>(idx.size());
}

inline std::vector<std::size_t> all_rows(std::size_t n) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    return idx;
}

inline double batch_loss(const NetworkParams& params, const Matrix& x, std::span<const double> y) {
    return batch_loss(params, x, y, all_rows(x.rows));
}

struct LossAndGradient {
    double loss = 0.0;
    NetworkParams gradient;
};

/// Exact gradient of the mean batch loss over rows `idx`.
inline LossAndGradient loss_gradients(const NetworkParams& params, const Matrix& x, std::span<const double> y,
                                      std::span<const std::size_t> idx, Workspace& ws) {
    require(!idx.empty(), "empty batch");
    require(x.rows == y.size(), "feature rows and targets differ in length");
    require(x.cols == params.input_dim(), "feature width does not match the network input");
    LossAndGradient out{0.0, params.zeros_like()};
    const double scale = 1.0 / static_cast<double>(idx.size());
    for (auto i : idx) {
        auto pr = ws.forward(params, x.row(i));
        out.loss += nll_loss(pr.mu, pr.log_var, y[i]);
        auto [dmu, ds] = nll_head_gradients(pr.mu, pr.log_var, y[i]);
        ws.backward(params, dmu, ds, scale, out.gradient);
    }
    out.loss *= scale;
    return out;
}

inline LossAndGradient loss_gradients(const NetworkParams& params, const Matrix& x, std::span<const double> y) {
    Workspace ws(params);
    return loss_gradients(params, x, y, all_rows(x.rows), ws);
}

/// One bias-corrected Adam update, in place.
inline void adam_step(NetworkParams& params, NetworkParams& grads, AdamState& state, const TrainConfig& cfg) {
    state.t += 1;
    const double t = static_cast<double>(state.t);
    const double b1 = cfg.adam_beta1, b2 = cfg.adam_beta2;
    const double c1 = 1.0 - std::pow(b1, t);
    const double c2 = 1.0 - std::pow(b2, t);
    for (std::size_t k = 0; k < params.layers.size(); ++k) {
        auto update = [&](std::vector<double>& p, const std::vector<double>& g, std::vector<double>& m,
                          std::vector<double>& v) {
            for (std::size_t i = 0; i < p.size(); ++i) {
                m[i] = b1 * m[i] + (1.0 - b1) * g[i];
                v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
                const double mhat = m[i] / c1;
                const double vhat = v[i] / c2;
                p[i] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.adam_epsilon);
            }
        };
        auto& L = params.layers[k];
        const auto& G = grads.layers[k];
        update(L.weights, G.weights, state.m.layers[k].weights, state.v.layers[k].weights);
        update(L.bias, G.bias, state.m.layers[k].bias, state.v.layers[k].bias);
    }
}

struct TrainResult {
    NetworkParams params;
    TrainReport report;
};

/// Mini-batch Adam. Each epoch reshuffles the rows with a stream seeded by
/// `shuffle_seed`; the final partial batch is kept.
inline TrainResult train(const Dataset& ds, const NetworkConfig& net_cfg, const TrainConfig& cfg) {
    net_cfg.validate();
    cfg.validate();
    ds.validate();
    require(ds.size() >= 1, "training set is empty");
    require(ds.features.cols == net_cfg.input_dim, "dataset has " + std::to_string(ds.features.cols) +
                                                       " features, network expects " +
                                                       std::to_string(net_cfg.input_dim));

    TrainResult res{init_network(net_cfg), {}};
    NetworkParams& params = res.params;
    AdamState state = AdamState::fresh(params);
    Workspace ws(params);
    Rng shuffle(cfg.shuffle_seed);
    const std::size_t n = ds.size();

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        const auto perm = random_permutation(n, shuffle);
        double epoch_total = 0.0;
        std::size_t batch_no = 0;
        for (std::size_t start = 0; start < n; start += cfg.batch_size, ++batch_no) {
            const std::size_t len = std::min(cfg.batch_size, n - start);
            std::span<const std::size_t> idx(perm.data() + start, len);
            auto lg = loss_gradients(params, ds.features, ds.target, idx, ws);
            if (!std::isfinite(lg.loss))
                throw NumericalError("non-finite training loss at epoch " + std::to_string(epoch + 1) + ", batch " +
                                     std::to_string(batch_no + 1));
            epoch_total += lg.loss * static_cast<double>(len);
            adam_step(params, lg.gradient, state, cfg);
        }
        res.report.epoch_loss.push_back(epoch_total / static_cast<double>(n));
    }
    for (const auto& l : params.layers) {
        for (double v : l.weights)
            if (!std::isfinite(v)) throw NumericalError("training produced non-finite weights");
        for (double v : l.bias)
            if (!std::isfinite(v)) throw NumericalError("training produced non-finite biases");
    }
    res.report.epochs = cfg.epochs;
    res.report.final_loss = res.report.epoch_loss.back();
    res.report.adam_steps = state.t;
    return res;
}

} // namespace paveinput::hetnet
