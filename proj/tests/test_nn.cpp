#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "ucl/errors.hpp"
#include "ucl/nn/adam.hpp"
#include "ucl/nn/layers.hpp"

using namespace ucl;
using namespace ucl::nn;

namespace {

Tensor random_tensor(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c) {
    Tensor t(r, c);
    for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = uniform(rng, -1.0, 1.0);
    return t;
}

double rel_err(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-8}); }

} // namespace

TEST(Activations, KnownValues) {
    EXPECT_EQ(sigmoid(0.0), 0.5);
    EXPECT_EQ(silu(0.0), 0.0);
    Tensor x(1, 3);
    x << -1.0, 0.0, 2.0;
    const Tensor r = relu(x);
    EXPECT_EQ(r(0, 0), 0.0);
    EXPECT_EQ(r(0, 2), 2.0);
    EXPECT_EQ(sigmoid(Tensor::Zero(2, 2))(1, 1), 0.5);
}

TEST(Activations, BackwardMatchesFiniteDifference) {
    std::mt19937_64 rng(1);
    Tensor x = random_tensor(rng, 3, 5);
    const Tensor dy = Tensor::Ones(3, 5);
    const Tensor ds = silu_backward(x, dy);
    const Tensor dg = sigmoid_backward(sigmoid(x), dy);
    const double h = 1e-6;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double v = x.data()[i];
        EXPECT_NEAR(ds.data()[i], (silu(v + h) - silu(v - h)) / (2 * h), 1e-8);
        EXPECT_NEAR(dg.data()[i], (sigmoid(v + h) - sigmoid(v - h)) / (2 * h), 1e-8);
    }
}

TEST(Sinusoidal, ZeroIdAlternates) {
    const auto e = sinusoidal_embed(0, 8);
    for (Eigen::Index j = 0; j < 8; ++j) EXPECT_EQ(e(j), j % 2 == 0 ? 0.0 : 1.0);
}

TEST(Sinusoidal, FormulaAndRange) {
    const std::size_t h = 16;
    const auto e = sinusoidal_embed(5, h);
    for (std::size_t j = 0; j < h / 2; ++j) {
        const double f = 5.0 / std::pow(10000.0, 2.0 * static_cast<double>(j) / h);
        EXPECT_NEAR(e(2 * j), std::sin(f), 1e-12);
        EXPECT_NEAR(e(2 * j + 1), std::cos(f), 1e-12);
    }
    for (std::size_t i = 0; i < 64; ++i) {
        const auto v = sinusoidal_embed(i, h);
        EXPECT_LE(v.cwiseAbs().maxCoeff(), 1.0);
    }
}

TEST(Sinusoidal, DistinctIds) {
    double min_gap = 1e9;
    for (std::size_t i = 0; i < 64; ++i) {
        for (std::size_t j = i + 1; j < 64; ++j) {
            min_gap = std::min(min_gap, (sinusoidal_embed(i, 32) - sinusoidal_embed(j, 32)).norm());
        }
    }
    EXPECT_GT(min_gap, 0.0);
}

TEST(Sinusoidal, OddDimensionRejected) { EXPECT_THROW(sinusoidal_embed(1, 7), ConfigError); }

TEST(Linear, GradientsMatchFiniteDifference) {
    std::mt19937_64 rng(2);
    Linear lin("l", 4, 3);
    lin.init_uniform(rng);
    lin.bias.value = random_tensor(rng, 1, 3);
    Tensor x = random_tensor(rng, 5, 4);
    const Tensor g = random_tensor(rng, 5, 3);
    // L = sum(g .* (x W^T + b))
    auto loss = [&] { return (lin.forward(x).array() * g.array()).sum(); };
    lin.weight.zero_grad();
    lin.bias.zero_grad();
    const Tensor dx = lin.backward(x, g);
    const double h = 1e-6;
    for (Parameter* p : {&lin.weight, &lin.bias}) {
        for (Eigen::Index i = 0; i < p->value.size(); ++i) {
            const double v = p->value.data()[i];
            p->value.data()[i] = v + h;
            const double lp = loss();
            p->value.data()[i] = v - h;
            const double lm = loss();
            p->value.data()[i] = v;
            EXPECT_LT(rel_err(p->grad.data()[i], (lp - lm) / (2 * h)), 1e-6);
        }
    }
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double v = x.data()[i];
        x.data()[i] = v + h;
        const double lp = loss();
        x.data()[i] = v - h;
        const double lm = loss();
        x.data()[i] = v;
        EXPECT_LT(rel_err(dx.data()[i], (lp - lm) / (2 * h)), 1e-6);
    }
}

TEST(Linear, InitBound) {
    std::mt19937_64 rng(3);
    Linear lin("l", 16, 8);
    lin.init_uniform(rng);
    EXPECT_LE(lin.weight.value.cwiseAbs().maxCoeff(), std::sqrt(1.0 / 16));
    EXPECT_EQ(lin.bias.value.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Adam, ZeroGradientLeavesParameters) {
    Parameter p("p", 2, 2);
    p.value << 1, 2, 3, 4;
    const Tensor before = p.value;
    std::vector<Parameter*> ps{&p};
    auto st = make_adam_state(ps);
    st.m[0].setConstant(0.5);
    adam_step(ps, st);
    // The first moment decays by beta1; the update uses the decayed moment.
    EXPECT_NEAR(st.m[0](0, 0), 0.45, 1e-15);
    EXPECT_EQ(st.v[0](0, 0), 0.0);
    Parameter q("q", 1, 3);
    q.value.setConstant(7);
    std::vector<Parameter*> qs{&q};
    auto sq = make_adam_state(qs);
    for (int i = 0; i < 10; ++i) adam_step(qs, sq);
    EXPECT_EQ(q.value(0, 1), 7.0);
    EXPECT_EQ(sq.t, 10u);
    (void)before;
}

TEST(Adam, ConstantGradientStepApproachesLearningRate) {
    Parameter p("p", 1, 2);
    std::vector<Parameter*> ps{&p};
    auto st = make_adam_state(ps, AdamConfig{.lr = 1e-3});
    p.grad << 3.0, -0.01;
    Tensor prev = p.value;
    Tensor step;
    for (int i = 0; i < 2000; ++i) {
        adam_step(ps, st);
        step = p.value - prev;
        prev = p.value;
    }
    // m_hat = g and v_hat = g^2, so the step tends to -lr * g / (|g| + eps).
    EXPECT_NEAR(step(0, 0), -1e-3 * 3.0 / (3.0 + 1e-8), 1e-9);
    EXPECT_NEAR(step(0, 1), 1e-3 * 0.01 / (0.01 + 1e-8), 1e-9);
}

TEST(Adam, QuadraticBowl) {
    Parameter p("p", 1, 3);
    p.value << 2.0, -1.0, 0.5;
    const Eigen::RowVector3d target(0.3, 0.1, -0.2);
    std::vector<Parameter*> ps{&p};
    auto st = make_adam_state(ps, AdamConfig{.lr = 1e-2});
    int steps = 0;
    while (steps < 5000) {
        const Eigen::RowVector3d diff = p.value.row(0) - target;
        if (diff.cwiseAbs().maxCoeff() < 1e-6) break;
        p.grad.row(0) = 2 * diff;
        adam_step(ps, st);
        ++steps;
    }
    EXPECT_LT((p.value.row(0) - Eigen::RowVectorXd(target)).cwiseAbs().maxCoeff(), 1e-6);
    EXPECT_LE(steps, 5000);
}
