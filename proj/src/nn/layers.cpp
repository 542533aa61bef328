#include "ucl/nn/layers.hpp"

#include <cmath>

#include "ucl/errors.hpp"

namespace ucl::nn {

Linear::Linear(std::string name, std::size_t in, std::size_t out)
    : weight(name + ".weight", static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(in)),
      bias(name + ".bias", 1, static_cast<Eigen::Index>(out)) {}

void Linear::init_uniform(std::mt19937_64& rng) {
    const double bound = std::sqrt(1.0 / static_cast<double>(in_features()));
    for (Eigen::Index i = 0; i < weight.value.size(); ++i) weight.value.data()[i] = uniform(rng, -bound, bound);
    bias.value.setZero();
}

Tensor Linear::forward(const Tensor& x) const {
    if (x.cols() != weight.value.cols()) throw std::invalid_argument(weight.name + ": input width mismatch");
    Tensor y = x * weight.value.transpose();
    y.rowwise() += bias.value.row(0);
    return y;
}

void Linear::accumulate(const Tensor& x, const Tensor& dy) {
    if (dy.cols() != weight.value.rows() || dy.rows() != x.rows()) {
        throw std::invalid_argument(weight.name + ": gradient shape mismatch");
    }
    weight.grad.noalias() += dy.transpose() * x;
    bias.grad.row(0) += dy.colwise().sum();
}

Tensor Linear::backward(const Tensor& x, const Tensor& dy) {
    accumulate(x, dy);
    return dy * weight.value;
}

Tensor relu(const Tensor& x) { return x.cwiseMax(0.0); }

Tensor relu_backward(const Tensor& x, const Tensor& dy) {
    return (x.array() > 0.0).select(dy, Tensor::Zero(dy.rows(), dy.cols()));
}

Tensor sigmoid(const Tensor& x) { return x.unaryExpr([](double v) { return sigmoid(v); }); }

Tensor sigmoid_backward(const Tensor& y, const Tensor& dy) { return dy.array() * y.array() * (1.0 - y.array()); }

Tensor silu(const Tensor& x) { return x.unaryExpr([](double v) { return silu(v); }); }

Tensor silu_backward(const Tensor& x, const Tensor& dy) {
    return dy.array() * x.unaryExpr([](double v) {
        const double s = sigmoid(v);
        return s * (1.0 + v * (1.0 - s));
    }).array();
}

RowVector sinusoidal_embed(std::size_t i, std::size_t h) {
    if (h == 0 || h % 2 != 0) throw ConfigError("sinusoidal embedding dimension must be even and positive");
    RowVector e(static_cast<Eigen::Index>(h));
    for (std::size_t j = 0; j < h / 2; ++j) {
        const double freq = std::pow(10000.0, static_cast<double>(2 * j) / static_cast<double>(h));
        const double arg = static_cast<double>(i) / freq;
        e[static_cast<Eigen::Index>(2 * j)] = std::sin(arg);
        e[static_cast<Eigen::Index>(2 * j + 1)] = std::cos(arg);
    }
    return e;
}

} // namespace ucl::nn
