#include "ucl/solver/model.hpp"

#include <stdexcept>
#include <string>

#include "ucl/errors.hpp"

namespace ucl::solver {

namespace {

Tensor reshape(const Tensor& t, Eigen::Index rows, Eigen::Index cols) {
    return Eigen::Map<const Tensor>(t.data(), rows, cols);
}

} // namespace

SolverModel::SolverModel(const ModelShape& shape, std::uint64_t seed)
    : shape_(shape),
      seed_(seed),
      fc1_("rows.fc1", shape.width, shape.hidden),
      fc2_("rows.fc2", shape.hidden, shape.hidden),
      fc3_("rows.fc3", shape.hidden, shape.hidden),
      fuse_("fuse", std::size_t{shape.depth} * shape.hidden, shape.hidden),
      embed_("embed", shape.hidden, 2 * std::size_t{shape.hidden}),
      trunk1_("trunk.fc1", shape.hidden, shape.hidden),
      trunk2_("trunk.fc2", shape.hidden, shape.hidden) {
    if (shape.depth == 0 || shape.width == 0 || shape.bucket_len == 0) throw ConfigError("model dimensions must be positive");
    if (shape.hidden < 2 || shape.hidden % 2 != 0) throw ConfigError("buckets.hidden must be even and >= 2");
    if (!shape.shared && shape.num_buckets == 0) throw ConfigError("unshared model needs num_buckets >= 1");

    const std::size_t heads = shape.shared ? 1 : shape.num_buckets;
    for (std::size_t b = 0; b < heads; ++b) {
        heads_.emplace_back("head" + (shape.shared ? std::string() : std::to_string(b)), shape.hidden, shape.bucket_len);
    }

    std::mt19937_64 rng(seed);
    for (auto* layer : {&fc1_, &fc2_, &fc3_, &fuse_, &embed_, &trunk1_, &trunk2_}) layer->init_uniform(rng);
    for (auto& h : heads_) h.init_uniform(rng);
    // scale_i starts near 1 and shift_i near 0.
    embed_.bias.value.leftCols(shape.hidden).setOnes();
}

void SolverModel::check_bucket(std::size_t b) const {
    if (!shape_.shared && b >= shape_.num_buckets) {
        throw std::out_of_range("bucket " + std::to_string(b) + " has no head in the unshared model");
    }
}

Tensor SolverModel::forward(const Tensor& y, std::span<const std::size_t> buckets, Trace* trace) const {
    const auto d = static_cast<Eigen::Index>(shape_.depth);
    const auto w = static_cast<Eigen::Index>(shape_.width);
    const auto h = static_cast<Eigen::Index>(shape_.hidden);
    const auto L = static_cast<Eigen::Index>(shape_.bucket_len);
    if (y.cols() != d * w) throw std::invalid_argument("solver input must have depth * width columns");
    for (auto b : buckets) check_bucket(b);

    const Eigen::Index batch = y.rows();
    const auto nb = static_cast<Eigen::Index>(buckets.size());

    Trace local;
    Trace& t = trace ? *trace : local;
    t.batch = batch;
    t.buckets.assign(buckets.begin(), buckets.end());

    t.x0 = reshape(y, batch * d, w);
    t.a1 = fc1_.forward(t.x0);
    t.h1 = nn::relu(t.a1);
    t.a2 = fc2_.forward(t.h1);
    t.h2 = nn::relu(t.a2);
    t.a3 = fc3_.forward(t.h2);
    t.h3 = nn::relu(t.a3);
    t.fused_in = reshape(t.h3, batch, d * h);
    t.shallow = fuse_.forward(t.fused_in);

    t.z.resize(batch * nb, h);
    if (shape_.shared) {
        t.emb_in.resize(nb, h);
        for (Eigen::Index b = 0; b < nb; ++b) t.emb_in.row(b) = nn::sinusoidal_embed(buckets[b], shape_.hidden);
        t.emb_act = nn::silu(t.emb_in);
        t.emb_out = embed_.forward(t.emb_act);
        for (Eigen::Index s = 0; s < batch; ++s) {
            for (Eigen::Index b = 0; b < nb; ++b) {
                t.z.row(s * nb + b) = t.shallow.row(s).cwiseProduct(t.emb_out.row(b).head(h)) + t.emb_out.row(b).tail(h);
            }
        }
    } else {
        for (Eigen::Index s = 0; s < batch; ++s) {
            for (Eigen::Index b = 0; b < nb; ++b) t.z.row(s * nb + b) = t.shallow.row(s);
        }
    }

    t.t1a = trunk1_.forward(t.z);
    t.t1 = nn::relu(t.t1a);
    t.t2a = trunk2_.forward(t.t1);
    t.t2 = nn::relu(t.t2a);

    Tensor logits;
    if (shape_.shared) {
        logits = heads_[0].forward(t.t2);
    } else {
        logits.resize(batch * nb, L);
        for (Eigen::Index b = 0; b < nb; ++b) {
            Tensor rows(batch, h);
            for (Eigen::Index s = 0; s < batch; ++s) rows.row(s) = t.t2.row(s * nb + b);
            const Tensor o = heads_[buckets[b]].forward(rows);
            for (Eigen::Index s = 0; s < batch; ++s) logits.row(s * nb + b) = o.row(s);
        }
    }
    t.out = nn::sigmoid(logits);
    return reshape(t.out, batch, nb * L);
}

Tensor SolverModel::backward(const Trace& t, const Tensor& d_out, bool want_input_grad) {
    const auto d = static_cast<Eigen::Index>(shape_.depth);
    const auto w = static_cast<Eigen::Index>(shape_.width);
    const auto h = static_cast<Eigen::Index>(shape_.hidden);
    const auto L = static_cast<Eigen::Index>(shape_.bucket_len);
    const Eigen::Index batch = t.batch;
    const auto nb = static_cast<Eigen::Index>(t.buckets.size());
    if (d_out.rows() != batch || d_out.cols() != nb * L) throw std::invalid_argument("output gradient shape mismatch");

    const Tensor d_logits = nn::sigmoid_backward(t.out, reshape(d_out, batch * nb, L));

    Tensor d_t2;
    if (shape_.shared) {
        d_t2 = heads_[0].backward(t.t2, d_logits);
    } else {
        d_t2.resize(batch * nb, h);
        for (Eigen::Index b = 0; b < nb; ++b) {
            Tensor rows(batch, h);
            Tensor grads(batch, L);
            for (Eigen::Index s = 0; s < batch; ++s) {
                rows.row(s) = t.t2.row(s * nb + b);
                grads.row(s) = d_logits.row(s * nb + b);
            }
            const Tensor dr = heads_[t.buckets[b]].backward(rows, grads);
            for (Eigen::Index s = 0; s < batch; ++s) d_t2.row(s * nb + b) = dr.row(s);
        }
    }

    const Tensor d_t1 = trunk2_.backward(t.t1, nn::relu_backward(t.t2a, d_t2));
    const Tensor d_z = trunk1_.backward(t.z, nn::relu_backward(t.t1a, d_t1));

    Tensor d_shallow = Tensor::Zero(batch, h);
    if (shape_.shared) {
        Tensor d_emb = Tensor::Zero(nb, 2 * h);
        for (Eigen::Index s = 0; s < batch; ++s) {
            for (Eigen::Index b = 0; b < nb; ++b) {
                const auto g = d_z.row(s * nb + b);
                d_shallow.row(s) += g.cwiseProduct(t.emb_out.row(b).head(h));
                d_emb.row(b).head(h) += g.cwiseProduct(t.shallow.row(s));
                d_emb.row(b).tail(h) += g;
            }
        }
        embed_.accumulate(t.emb_act, d_emb);
    } else {
        for (Eigen::Index s = 0; s < batch; ++s) {
            for (Eigen::Index b = 0; b < nb; ++b) d_shallow.row(s) += d_z.row(s * nb + b);
        }
    }

    const Tensor d_fused = fuse_.backward(t.fused_in, d_shallow);
    const Tensor d_h3 = reshape(d_fused, batch * d, h);
    const Tensor d_h2 = fc3_.backward(t.h2, nn::relu_backward(t.a3, d_h3));
    const Tensor d_h1 = fc2_.backward(t.h1, nn::relu_backward(t.a2, d_h2));
    const Tensor d_a1 = nn::relu_backward(t.a1, d_h1);
    if (!want_input_grad) {
        fc1_.accumulate(t.x0, d_a1);
        return {};
    }
    const Tensor d_x0 = fc1_.backward(t.x0, d_a1);
    return reshape(d_x0, batch, d * w);
}

std::vector<nn::Parameter*> SolverModel::parameters() {
    std::vector<nn::Parameter*> out;
    auto add = [&](nn::Linear& l) {
        out.push_back(&l.weight);
        out.push_back(&l.bias);
    };
    add(fc1_);
    add(fc2_);
    add(fc3_);
    add(fuse_);
    if (shape_.shared) add(embed_);
    add(trunk1_);
    add(trunk2_);
    for (auto& hd : heads_) add(hd);
    return out;
}

std::vector<const nn::Parameter*> SolverModel::parameters() const {
    auto mut = const_cast<SolverModel*>(this)->parameters();
    return {mut.begin(), mut.end()};
}

void SolverModel::zero_grad() {
    for (auto* p : parameters()) p->zero_grad();
}

void SolverModel::set_output_bias(double logit) {
    for (auto& hd : heads_) hd.bias.value.setConstant(logit);
}

std::size_t SolverModel::parameter_count() const {
    std::size_t n = 0;
    for (const auto* p : parameters()) n += p->size();
    return n;
}

std::size_t SolverModel::parameter_count(const ModelShape& s) {
    const std::size_t d = s.depth, w = s.width, h = s.hidden, L = s.bucket_len;
    std::size_t n = (w * h + h) + 2 * (h * h + h) + (d * h * h + h) + 2 * (h * h + h);
    const std::size_t head = h * L + L;
    if (s.shared) {
        n += h * 2 * h + 2 * h;
        n += head;
    } else {
        n += head * s.num_buckets;
    }
    return n;
}

std::vector<double> forward_bucket(const SolverModel& model, std::span<const double> y_norm, std::size_t bucket_id,
                                   std::size_t n) {
    if (bucket_id >= bucket_count(n, model.shape().bucket_len)) {
        throw std::out_of_range("bucket id " + std::to_string(bucket_id) + " out of range for " + std::to_string(n) +
                                " keys");
    }
    if (y_norm.size() != model.input_size()) throw std::invalid_argument("measurement length mismatch");
    const Tensor y = Eigen::Map<const Tensor>(y_norm.data(), 1, static_cast<Eigen::Index>(y_norm.size()));
    const std::size_t ids[1] = {bucket_id};
    const Tensor out = model.forward(y, ids);
    return {out.data(), out.data() + out.size()};
}

} // namespace ucl::solver
