#pragma once

#include <cstdint>
#include <vector>

#include "ucl/nn/layers.hpp"

namespace ucl::nn {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// Moment estimates for one parameter list.
struct AdamState {
    std::vector<Tensor> m;
    std::vector<Tensor> v;
    std::uint64_t t = 0;
    AdamConfig cfg;
};

AdamState make_adam_state(const std::vector<Parameter*>& params, AdamConfig cfg = {});

/// One bias-corrected Adam update of every parameter from its .grad.
void adam_step(const std::vector<Parameter*>& params, AdamState& state);

} // namespace ucl::nn
