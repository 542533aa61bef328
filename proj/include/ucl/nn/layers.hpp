#pragma once

#include <cstddef>
#include <random>
#include <string>
#include <vector>

#include "ucl/nn/tensor.hpp"

namespace ucl::nn {

/// Trainable tensor with its accumulated gradient.
struct Parameter {
    std::string name;
    Tensor value;
    Tensor grad;

    Parameter() = default;
    Parameter(std::string n, Eigen::Index rows, Eigen::Index cols)
        : name(std::move(n)), value(Tensor::Zero(rows, cols)), grad(Tensor::Zero(rows, cols)) {}

    void zero_grad() { grad.setZero(); }
    std::size_t size() const { return static_cast<std::size_t>(value.size()); }
};

/// y = x W^T + b on a batch x of shape (B, in). The layer holds no
/// activations; callers keep the input around for backward().
class Linear {
public:
    Linear() = default;
    Linear(std::string name, std::size_t in, std::size_t out);

    /// W ~ U(-sqrt(1/in), sqrt(1/in)), b = 0.
    void init_uniform(std::mt19937_64& rng);

    Tensor forward(const Tensor& x) const;
    /// Accumulates dW, db and returns dL/dx.
    Tensor backward(const Tensor& x, const Tensor& dy);
    /// Accumulates dW, db only.
    void accumulate(const Tensor& x, const Tensor& dy);

    std::size_t in_features() const { return static_cast<std::size_t>(weight.value.cols()); }
    std::size_t out_features() const { return static_cast<std::size_t>(weight.value.rows()); }

    Parameter weight;
    Parameter bias;
};

Tensor relu(const Tensor& x);
Tensor relu_backward(const Tensor& x, const Tensor& dy);
Tensor silu(const Tensor& x);
Tensor silu_backward(const Tensor& x, const Tensor& dy);
Tensor sigmoid(const Tensor& x);
/// Uses the forward output y = sigmoid(x).
Tensor sigmoid_backward(const Tensor& y, const Tensor& dy);

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
inline double silu(double x) { return x * sigmoid(x); }

/// Entry 2j = sin(i / 10000^(2j/h)), entry 2j+1 = cos(same). h must be even.
RowVector sinusoidal_embed(std::size_t i, std::size_t h);

} // namespace ucl::nn
