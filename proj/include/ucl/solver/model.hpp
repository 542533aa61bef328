#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ucl/nn/layers.hpp"

namespace ucl::solver {

using nn::Tensor;

struct ModelShape {
    std::uint32_t depth = 4;
    std::uint32_t width = 512;
    std::uint32_t hidden = 128;
    std::uint32_t bucket_len = 512;
    /// One set of weights for every bucket (selected by a sinusoidal id
    /// embedding), or an independent output head per bucket.
    bool shared = true;
    /// Number of bucket heads; only meaningful when !shared.
    std::uint32_t num_buckets = 1;

    bool operator==(const ModelShape&) const = default;
};

/// Bucket-shared decoder: (normalized counters, bucket id) -> bucket_len
/// estimates in (0, 1).
///
///   rows:   per-row  w -> h -> h (ReLU, ReLU), then h -> h (ReLU)
///   fuse:   d*h -> h, the shallow representation s
///   embed:  SiLU(sinusoidal(i)) -> 2h, split into (scale_i, shift_i)
///   trunk:  scale_i * s + shift_i -> h -> h (ReLU, ReLU)
///   head:   h -> L, Sigmoid
///
/// With shared == false the embedding is dropped and bucket i uses head i.
class SolverModel {
public:
    /// Activations of one forward pass, consumed by backward().
    struct Trace {
        Eigen::Index batch = 0;
        std::vector<std::size_t> buckets;
        Tensor x0, a1, h1, a2, h2, a3, h3;
        Tensor fused_in, shallow;
        Tensor emb_in, emb_act, emb_out;
        Tensor z, t1a, t1, t2a, t2;
        Tensor out;
    };

    SolverModel(const ModelShape& shape, std::uint64_t seed);

    const ModelShape& shape() const { return shape_; }
    std::uint64_t seed() const { return seed_; }
    std::size_t input_size() const { return std::size_t{shape_.depth} * shape_.width; }

    /// y: (B, d*w). Returns (B, buckets.size() * L); row s is the concatenation
    /// of the requested buckets' outputs for sample s.
    Tensor forward(const Tensor& y, std::span<const std::size_t> buckets, Trace* trace = nullptr) const;

    /// Accumulates parameter gradients for dL/d(output) and returns dL/dy
    /// (an empty tensor when want_input_grad is false).
    Tensor backward(const Trace& trace, const Tensor& d_out, bool want_input_grad);

    std::vector<nn::Parameter*> parameters();
    std::vector<const nn::Parameter*> parameters() const;
    void zero_grad();
    /// Sets every output-head bias to `logit`, so an all-zero trunk yields sigmoid(logit).
    void set_output_bias(double logit);
    std::size_t parameter_count() const;
    /// Closed form of parameter_count() for a shape.
    static std::size_t parameter_count(const ModelShape& shape);

private:
    void check_bucket(std::size_t b) const;

    ModelShape shape_;
    std::uint64_t seed_;
    nn::Linear fc1_, fc2_, fc3_, fuse_, embed_, trunk1_, trunk2_;
    std::vector<nn::Linear> heads_;
};

/// Number of logical buckets covering n registry positions.
inline std::size_t bucket_count(std::size_t n, std::uint32_t bucket_len) { return (n + bucket_len - 1) / bucket_len; }

/// One bucket for one normalized measurement vector. Throws
/// std::out_of_range unless bucket_id < ceil(n / L).
std::vector<double> forward_bucket(const SolverModel& model, std::span<const double> y_norm, std::size_t bucket_id,
                                   std::size_t n);

} // namespace ucl::solver
