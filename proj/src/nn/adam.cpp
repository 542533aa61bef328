#include "ucl/nn/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace ucl::nn {

AdamState make_adam_state(const std::vector<Parameter*>& params, AdamConfig cfg) {
    AdamState s;
    s.cfg = cfg;
    for (const auto* p : params) {
        s.m.push_back(Tensor::Zero(p->value.rows(), p->value.cols()));
        s.v.push_back(Tensor::Zero(p->value.rows(), p->value.cols()));
    }
    return s;
}

void adam_step(const std::vector<Parameter*>& params, AdamState& state) {
    if (params.size() != state.m.size()) throw std::invalid_argument("adam: parameter list changed");
    ++state.t;
    const auto& c = state.cfg;
    const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.t));
    for (std::size_t i = 0; i < params.size(); ++i) {
        auto& p = *params[i];
        if (p.grad.rows() != p.value.rows() || p.grad.cols() != p.value.cols()) {
            throw std::invalid_argument("adam: gradient shape mismatch for " + p.name);
        }
        auto& m = state.m[i];
        auto& v = state.v[i];
        m = c.beta1 * m + (1.0 - c.beta1) * p.grad;
        v = c.beta2 * v + (1.0 - c.beta2) * p.grad.cwiseProduct(p.grad);
        p.value.array() -= c.lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + c.eps);
    }
}

} // namespace ucl::nn
