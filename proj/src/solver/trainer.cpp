#include "ucl/solver/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "ucl/errors.hpp"

namespace ucl::solver {

SlidingWindow::SlidingWindow(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw ConfigError("training.window_len must be >= 1");
}

void SlidingWindow::push(Snapshot snap) {
    if (items_.size() == capacity_) items_.pop_front();
    items_.push_back(std::move(snap));
}

void write_train_csv(std::ostream& out, const TrainReport& report, bool equivariance) {
    out << "epoch,loss_measurement," << (equivariance ? "loss_equiv," : "") << "loss_sparse,total\n";
    const auto old_prec = out.precision(12);
    for (const auto& e : report.epochs) {
        out << e.epoch << ',' << e.loss.measurement << ',';
        if (equivariance) out << e.loss.equiv << ',';
        out << e.loss.sparse << ',' << e.loss.total << '\n';
    }
    out.precision(old_prec);
}

LossParts composite_loss(SolverModel& model, const LinearOperator& a, const Tensor& y, double lambda,
                         bool equivariance, const DeltaFn& delta, bool want_grad) {
    const std::size_t n = a.cols();
    const std::size_t m = a.rows();
    if (n == 0) throw std::invalid_argument("composite_loss needs at least one registry key");
    if (static_cast<std::size_t>(y.cols()) != m || m != model.input_size()) {
        throw std::invalid_argument("measurement width does not match the operator");
    }
    const Eigen::Index batch = y.rows();
    const double inv_b = 1.0 / static_cast<double>(batch);
    const std::size_t nb = bucket_count(n, model.shape().bucket_len);
    std::vector<std::size_t> ids(nb);
    std::iota(ids.begin(), ids.end(), 0);

    SolverModel::Trace t1;
    const Tensor out1 = model.forward(y, ids, &t1);
    Tensor g1 = Tensor::Zero(batch, out1.cols());

    LossParts parts;
    Tensor y2(batch, static_cast<Eigen::Index>(m));
    Tensor xprime(batch, static_cast<Eigen::Index>(n));
    std::vector<double> r(m), back(n);

    for (Eigen::Index s = 0; s < batch; ++s) {
        std::span<const double> x(out1.row(s).data(), n);
        a.apply(x, r);
        for (std::size_t j = 0; j < m; ++j) r[j] -= y(s, static_cast<Eigen::Index>(j));
        for (double v : r) parts.measurement += v * v;
        for (double v : x) parts.sparse += lambda * std::abs(v);
        if (want_grad) {
            a.apply_transpose(r, back);
            double* g = g1.row(s).data();
            for (std::size_t i = 0; i < n; ++i) g[i] += (2.0 * back[i] + lambda * (x[i] >= 0 ? 1.0 : -1.0)) * inv_b;
        }
        if (equivariance) {
            const auto d = delta(x, static_cast<std::size_t>(s));
            if (d.size() != n) throw std::invalid_argument("transform increment length mismatch");
            double* xp = xprime.row(s).data();
            for (std::size_t i = 0; i < n; ++i) xp[i] = x[i] + d[i];
            a.apply(std::span<const double>(xp, n), std::span<double>(y2.row(s).data(), m));
        }
    }

    if (equivariance) {
        SolverModel::Trace t2;
        const Tensor out2 = model.forward(y2, ids, &t2);
        Tensor g2 = Tensor::Zero(batch, out2.cols());
        for (Eigen::Index s = 0; s < batch; ++s) {
            const double* xh = out2.row(s).data();
            const double* xp = xprime.row(s).data();
            double* ga = g1.row(s).data();
            double* gb = g2.row(s).data();
            for (std::size_t i = 0; i < n; ++i) {
                const double e = xh[i] - xp[i];
                parts.equiv += e * e;
                gb[i] = 2.0 * e * inv_b;
                ga[i] -= 2.0 * e * inv_b;
            }
        }
        if (want_grad) {
            const Tensor gy2 = model.backward(t2, g2, true);
            for (Eigen::Index s = 0; s < batch; ++s) {
                a.apply_transpose(std::span<const double>(gy2.row(s).data(), m), back);
                double* g = g1.row(s).data();
                for (std::size_t i = 0; i < n; ++i) g[i] += back[i];
            }
        }
    }
    if (want_grad) model.backward(t1, g1, false);

    parts.measurement *= inv_b;
    parts.equiv *= inv_b;
    parts.sparse *= inv_b;
    parts.total = parts.measurement + parts.equiv + parts.sparse;
    return parts;
}

Trainer::Trainer(SolverModel& model, const TrainConfig& cfg, std::uint32_t sampling_interval, std::uint64_t seed,
                 SensingMode mode)
    : model_(model),
      cfg_(cfg),
      hot_increment_(cfg.hot_increment ? cfg.hot_increment : sampling_interval),
      mode_(mode),
      rng_(seed) {
    cfg_.validate();
    adam_ = nn::make_adam_state(model_.parameters(), nn::AdamConfig{.lr = cfg_.lr});
}

void Trainer::calibrate_output(const std::vector<Normalized>& samples, const LinearOperator& a) {
    // Mean per-key mass of a row: sum |y_row| / n, averaged over rows and samples.
    const std::size_t m = a.rows();
    const std::size_t d = model_.shape().depth;
    double mass = 0;
    for (const auto& s : samples) {
        for (std::size_t j = 0; j < m; ++j) mass += std::abs(s.y[j]);
    }
    mass /= static_cast<double>(samples.size() * d * a.cols());
    const double p = std::clamp(mass, 1e-6, 0.5);
    model_.set_output_bias(std::log(p / (1 - p)));
}

EpochLoss Trainer::run_epoch(const SlidingWindow& window, const LinearOperator& a, std::span<const std::size_t> hot) {
    ++epoch_;
    std::vector<Normalized> samples;
    samples.reserve(window.size());
    for (const auto& snap : window) {
        if (auto norm = normalize(snap, mode_)) samples.push_back(std::move(*norm));
    }
    EpochLoss result{.epoch = epoch_, .loss = {}};
    if (samples.empty() || a.cols() == 0) return result;
    if (epoch_ == 1) calibrate_output(samples, a);

    std::vector<std::size_t> order(samples.size());
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = order.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(nn::uniform01(rng_) * static_cast<double>(i));
        std::swap(order[i - 1], order[std::min(j, i - 1)]);
    }

    const std::size_t m = a.rows();
    const std::vector<std::size_t> hot_indices(hot.begin(), hot.end());
    const auto params = model_.parameters();
    double seen = 0;

    for (std::size_t start = 0; start < order.size(); start += cfg_.batch_size) {
        const std::size_t count = std::min<std::size_t>(cfg_.batch_size, order.size() - start);
        Tensor y(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(m));
        std::vector<double> scales(count);
        std::vector<std::uint64_t> seeds(count);
        for (std::size_t k = 0; k < count; ++k) {
            const auto& smp = samples[order[start + k]];
            std::copy(smp.y.begin(), smp.y.end(), y.row(static_cast<Eigen::Index>(k)).data());
            scales[k] = smp.scale;
            seeds[k] = rng_();
        }
        const DeltaFn delta = [&](std::span<const double> x, std::size_t s) {
            TransformSpec spec{.c = hot_increment_,
                               .hot_indices = hot_indices,
                               .cold_fraction = cfg_.cold_fraction,
                               .unit = 1,
                               .seed = seeds[s]};
            return apply_transform(x, spec, scales[s]).delta;
        };

        model_.zero_grad();
        const auto parts = composite_loss(model_, a, y, cfg_.lambda, cfg_.equivariance, delta, true);
        if (!std::isfinite(parts.total)) {
            throw DivergenceError("training diverged at epoch " + std::to_string(epoch_) + ", batch " +
                                  std::to_string(start / cfg_.batch_size) + " (loss " + std::to_string(parts.total) +
                                  ")");
        }
        nn::adam_step(params, adam_);

        const double w = static_cast<double>(count);
        result.loss.measurement += parts.measurement * w;
        result.loss.equiv += parts.equiv * w;
        result.loss.sparse += parts.sparse * w;
        result.loss.total += parts.total * w;
        seen += w;
    }
    result.loss.measurement /= seen;
    result.loss.equiv /= seen;
    result.loss.sparse /= seen;
    result.loss.total /= seen;
    return result;
}

TrainReport Trainer::train(const SlidingWindow& window, const LinearOperator& a, std::span<const std::size_t> hot,
                           const std::function<void(const EpochLoss&)>& on_epoch) {
    if (window.empty()) throw std::invalid_argument("cannot train on an empty window");
    TrainReport report;
    std::vector<nn::Tensor> best;
    std::uint32_t stale = 0;
    const auto params = model_.parameters();

    for (std::uint32_t e = 0; e < cfg_.epochs; ++e) {
        const auto loss = run_epoch(window, a, hot);
        report.epochs.push_back(loss);
        if (on_epoch) on_epoch(loss);
        if (best.empty() || loss.loss.total < report.best_loss) {
            report.best_loss = loss.loss.total;
            report.best_epoch = loss.epoch;
            best.clear();
            for (const auto* p : params) best.push_back(p->value);
            stale = 0;
        } else if (++stale >= cfg_.patience) {
            report.early_stopped = true;
            break;
        }
    }
    for (std::size_t i = 0; i < params.size(); ++i) params[i]->value = best[i];
    return report;
}

} // namespace ucl::solver
