#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "paveinput/hetnet.hpp"
#include "support/oracles.hpp"

using namespace paveinput;
using namespace paveinput::hetnet;

namespace {

Dataset raw_dataset(const Matrix& x, const std::vector<double>& y) {
    Dataset ds;
    ds.features = x;
    ds.target = y;
    for (std::size_t j = 0; j < x.cols; ++j) {
        ds.stats.feature_names.push_back("x" + std::to_string(j));
        ds.stats.feature_kinds.push_back(ColumnKind::numeric);
        ds.stats.mean.push_back(0.0);
        ds.stats.stddev.push_back(1.0);
    }
    for (std::size_t i = 0; i < y.size(); ++i) ds.row_ids.push_back(i);
    return ds;
}

Dataset linear_noisy(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 g(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::normal_distribution<double> nd(0.0, 0.1);
    Matrix x(n, 1);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        x(i, 0) = u(g);
        y[i] = 2.0 * x(i, 0) + nd(g);
    }
    return raw_dataset(x, y);
}

} // namespace

TEST(InitNetwork, Shapes) {
    NetworkConfig cfg{1, {2}, 5};
    auto p = init_network(cfg);
    ASSERT_EQ(p.layers.size(), 2u);
    EXPECT_EQ(p.layers[0].in, 1u);
    EXPECT_EQ(p.layers[0].out, 2u);
    EXPECT_EQ(p.layers[1].in, 2u);
    EXPECT_EQ(p.layers[1].out, 2u);
    for (const auto& l : p.layers)
        for (double b : l.bias) EXPECT_EQ(b, 0.0);
    EXPECT_NO_THROW(p.validate());
}

TEST(InitNetwork, Deterministic) {
    NetworkConfig cfg;
    cfg.seed = 99;
    EXPECT_EQ(init_network(cfg), init_network(cfg));
    auto other = cfg;
    other.seed = 100;
    EXPECT_NE(init_network(cfg), init_network(other));
}

TEST(InitNetwork, HeVariance) {
    // 2000 units of fan-in 50: 1e5 weights.
    NetworkConfig cfg{50, {2000}, 11};
    auto p = init_network(cfg);
    const auto& w = p.layers[0].weights;
    ASSERT_EQ(w.size(), 100000u);
    double s2 = 0.0;
    for (double v : w) s2 += v * v;
    const double var = s2 / static_cast<double>(w.size());
    EXPECT_NEAR(var, 0.04, 0.05 * 0.04);
}

TEST(InitNetwork, RejectsZeroWidth) {
    EXPECT_THROW(init_network(NetworkConfig{9, {8, 0}, 1}), DataError);
    EXPECT_THROW(init_network(NetworkConfig{0, {8}, 1}), DataError);
}

TEST(Forward, HandSetLinear) {
    NetworkParams p;
    DenseLayer l(1, 2);
    l.w(kMeanHead, 0) = 2.0;
    l.bias[kMeanHead] = 1.0;
    p.layers.push_back(l);
    std::vector<double> x{3.0};
    auto pr = forward(p, x);
    EXPECT_DOUBLE_EQ(pr.mu, 7.0);
    EXPECT_DOUBLE_EQ(pr.log_var, 0.0);
}

TEST(Forward, ZeroNetwork) {
    auto p = init_network(NetworkConfig{3, {4, 4}, 1});
    for (auto& l : p.layers) std::fill(l.weights.begin(), l.weights.end(), 0.0);
    for (double v : {-3.0, 0.0, 12.5}) {
        std::vector<double> x{v, v, v};
        auto pr = forward(p, x);
        EXPECT_EQ(pr.mu, 0.0);
        EXPECT_EQ(pr.log_var, 0.0);
    }
}

TEST(Forward, ReluClampsNegative) {
    NetworkParams p;
    DenseLayer h(1, 1);
    h.w(0, 0) = 1.0;
    h.bias[0] = -5.0;
    DenseLayer o(1, 2);
    o.w(0, 0) = 3.0;
    o.w(1, 0) = -4.0;
    o.bias = {1.0, 0.5};
    p.layers = {h, o};
    std::vector<double> x{0.0};
    auto pr = forward(p, x);
    EXPECT_DOUBLE_EQ(pr.mu, 1.0);
    EXPECT_DOUBLE_EQ(pr.log_var, 0.5);
    x[0] = 7.0; // pre-activation 2
    pr = forward(p, x);
    EXPECT_DOUBLE_EQ(pr.mu, 7.0);
    EXPECT_DOUBLE_EQ(pr.log_var, -7.5);
}

TEST(Forward, WrongWidthRejected) {
    auto p = init_network(NetworkConfig{3, {4}, 1});
    std::vector<double> x{1.0, 2.0};
    EXPECT_THROW(forward(p, x), DataError);
}

TEST(NllLoss, Examples) {
    EXPECT_DOUBLE_EQ(nll_loss(1.3, 0.0, 1.3), 0.0);
    EXPECT_DOUBLE_EQ(nll_loss(0.0, 0.0, 1.0), 0.5);
    EXPECT_NEAR(nll_loss(0.0, std::log(4.0), 1.0), 0.8181, 5e-5);
    EXPECT_NEAR(nll_loss(0.0, std::log(4.0), 1.0), 0.125 + std::log(2.0), 1e-15);
}

TEST(NllLoss, HeadGradients) {
    auto [a_mu, a_s] = nll_head_gradients(0.0, 0.0, 1.0);
    EXPECT_DOUBLE_EQ(a_mu, -1.0);
    EXPECT_DOUBLE_EQ(a_s, 0.0);
    auto [b_mu, b_s] = nll_head_gradients(0.0, 0.0, 0.0);
    EXPECT_DOUBLE_EQ(b_mu, 0.0);
    EXPECT_DOUBLE_EQ(b_s, 0.5);
}

TEST(NllLoss, HeadGradientsMatchDifferences) {
    std::mt19937_64 g(3);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    const double h = 1e-6;
    for (int i = 0; i < 200; ++i) {
        const double mu = u(g), s = u(g), y = u(g);
        auto [dmu, ds] = nll_head_gradients(mu, s, y);
        EXPECT_NEAR(dmu, (nll_loss(mu + h, s, y) - nll_loss(mu - h, s, y)) / (2 * h), 1e-6);
        EXPECT_NEAR(ds, (nll_loss(mu, s + h, y) - nll_loss(mu, s - h, y)) / (2 * h), 1e-6);
    }
}

TEST(LossGradients, IdentityHeadSample) {
    NetworkParams p;
    p.layers.emplace_back(1, 2);
    Matrix x(1, 1);
    std::vector<double> y{1.0};
    auto lg = loss_gradients(p, x, y);
    EXPECT_DOUBLE_EQ(lg.loss, 0.5);
    EXPECT_DOUBLE_EQ(lg.gradient.layers[0].bias[kMeanHead], -1.0);
    EXPECT_DOUBLE_EQ(lg.gradient.layers[0].bias[kLogVarHead], 0.0);
}

TEST(LossGradients, MatchFiniteDifferences) {
    std::mt19937_64 g(2024);
    for (int trial = 0; trial < 5; ++trial) {
        auto p = oracle::random_network(9, {8, 8}, g);
        Matrix x;
        std::vector<double> y;
        oracle::random_batch(16, 9, g, x, y);
        auto lg = loss_gradients(p, x, y);
        auto chk = oracle::check_gradient(p, x, y, lg.gradient);
        EXPECT_LT(chk.max_rel_error, 1e-4) << "trial " << trial;
        EXPECT_GT(chk.checked, p.parameter_count() / 2);
    }
}

TEST(LossGradients, ZeroPreActivationHasZeroSlope) {
    // Hidden unit sits exactly at 0: its incoming weight gets no gradient.
    NetworkParams p;
    DenseLayer h(1, 1);
    h.w(0, 0) = 1.0;
    DenseLayer o(1, 2);
    o.w(0, 0) = 1.0;
    p.layers = {h, o};
    Matrix x(1, 1);
    std::vector<double> y{3.0};
    auto lg = loss_gradients(p, x, y);
    EXPECT_EQ(lg.gradient.layers[0].weights[0], 0.0);
    EXPECT_EQ(lg.gradient.layers[0].bias[0], 0.0);
}

TEST(AdamStep, UnitGradientFirstStep) {
    auto p = init_network(NetworkConfig{3, {4}, 1});
    auto before = p;
    auto g = p.zeros_like();
    for (auto* v : g.flat()) *v = 1.0;
    auto st = AdamState::fresh(p);
    TrainConfig cfg;
    adam_step(p, g, st, cfg);
    EXPECT_EQ(st.t, 1u);
    auto a = p.flat();
    auto b = before.flat();
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(*a[i] - *b[i], -1e-3 / (1.0 + 1e-8), 1e-15);
    EXPECT_NEAR(*a[0] - *b[0], -9.99999995e-4, 1e-11);
}

TEST(AdamStep, ZeroGradient) {
    auto p = init_network(NetworkConfig{3, {4}, 1});
    auto before = p;
    auto g = p.zeros_like();
    auto st = AdamState::fresh(p);
    adam_step(p, g, st, TrainConfig{});
    EXPECT_EQ(p, before);
    EXPECT_EQ(st.t, 1u);
}

TEST(AdamStep, StepSizeBoundedByLearningRate) {
    std::mt19937_64 gen(5);
    std::normal_distribution<double> nd(0.0, 10.0);
    auto p = init_network(NetworkConfig{4, {6}, 2});
    auto st = AdamState::fresh(p);
    TrainConfig cfg;
    for (int step = 0; step < 50; ++step) {
        auto before = p;
        auto g = p.zeros_like();
        for (auto* v : g.flat()) *v = nd(gen);
        adam_step(p, g, st, cfg);
        auto a = p.flat();
        auto b = before.flat();
        for (std::size_t i = 0; i < a.size(); ++i) ASSERT_LE(std::abs(*a[i] - *b[i]), 3.2e-3);
    }
}

TEST(Train, Deterministic) {
    auto ds = linear_noisy(200, 1);
    NetworkConfig net{1, {8, 8}, 3};
    TrainConfig cfg;
    cfg.epochs = 5;
    cfg.shuffle_seed = 4;
    auto a = train(ds, net, cfg);
    auto b = train(ds, net, cfg);
    EXPECT_EQ(a.params, b.params);
    EXPECT_EQ(a.report.epoch_loss, b.report.epoch_loss);
}

TEST(Train, LinearTargetLossDecreases) {
    auto ds = linear_noisy(500, 2);
    NetworkConfig net{1, {8, 8}, 5};
    TrainConfig cfg;
    cfg.epochs = 60;
    cfg.learning_rate = 3e-3;
    cfg.shuffle_seed = 6;
    auto r = train(ds, net, cfg);
    ASSERT_EQ(r.report.epoch_loss.size(), 60u);
    EXPECT_LT(r.report.final_loss, r.report.epoch_loss.front());
    // Well below the loss of the constant unit-variance predictor.
    EXPECT_LT(r.report.final_loss, 0.0);
    std::vector<double> x{0.5};
    EXPECT_NEAR(forward(r.params, x).mu, 1.0, 0.15);
}

TEST(Train, OneEpochOneBatchOneStep) {
    auto ds = linear_noisy(40, 3);
    TrainConfig cfg;
    cfg.epochs = 1;
    cfg.batch_size = 40;
    auto r = train(ds, NetworkConfig{1, {4}, 1}, cfg);
    EXPECT_EQ(r.report.adam_steps, 1u);
    cfg.batch_size = 1000;
    EXPECT_EQ(train(ds, NetworkConfig{1, {4}, 1}, cfg).report.adam_steps, 1u);
    cfg.epochs = 3;
    cfg.batch_size = 16; // partial last batch kept
    EXPECT_EQ(train(ds, NetworkConfig{1, {4}, 1}, cfg).report.adam_steps, 9u);
}

TEST(Train, ShapeMismatchRejected) {
    auto ds = linear_noisy(20, 3);
    EXPECT_THROW(train(ds, NetworkConfig{9, {4}, 1}, TrainConfig{}), DataError);
}

TEST(Train, DivergenceRaisesNumericalError) {
    auto ds = linear_noisy(64, 4);
    for (auto& v : ds.target) v *= 1e200;
    TrainConfig cfg;
    cfg.epochs = 3;
    EXPECT_THROW(train(ds, NetworkConfig{1, {4}, 1}, cfg), NumericalError);
}

TEST(Train, RecoversInputDependentNoise) {
    // sigma = 0.3 for x < 0 and 1.0 for x > 0, mean x.
    std::mt19937_64 g(77);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::normal_distribution<double> nd(0.0, 1.0);
    const std::size_t n = 4000;
    Matrix x(n, 1);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        x(i, 0) = u(g);
        y[i] = x(i, 0) + (x(i, 0) < 0.0 ? 0.3 : 1.0) * nd(g);
    }
    TrainConfig cfg;
    cfg.epochs = 40;
    cfg.learning_rate = 3e-3;
    cfg.shuffle_seed = 1;
    auto r = train(raw_dataset(x, y), NetworkConfig{1, {16, 16}, 2}, cfg);
    for (auto [xv, sigma] : {std::pair{-0.5, 0.3}, std::pair{0.5, 1.0}}) {
        std::vector<double> in{xv};
        const double s = std::exp(0.5 * forward(r.params, in).log_var);
        EXPECT_GT(s, sigma / 1.5) << xv;
        EXPECT_LT(s, sigma * 1.5) << xv;
    }
}
