#include "ucl/controlplane.hpp"

#include "ucl/solver/transform.hpp"

namespace ucl {

void KeyRegistry::handle_report(const KeyReport& report) {
    auto [it, inserted] = index_.try_emplace(report.key, keys_.size());
    if (inserted) {
        keys_.push_back(report.key);
        hot_.push_back(0);
        ++version_;
    }
    if (report.flag == ReportFlag::hot && !hot_[it->second]) {
        hot_[it->second] = 1;
        ++hot_count_;
        ++version_;
    }
}

std::optional<std::size_t> KeyRegistry::position(const Key& key) const {
    const auto it = index_.find(key);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::vector<std::size_t> KeyRegistry::hot_positions() const {
    std::vector<std::size_t> out;
    out.reserve(hot_count_);
    for (std::size_t i = 0; i < hot_.size(); ++i) {
        if (hot_[i]) out.push_back(i);
    }
    return out;
}

QueryContext::QueryContext(std::shared_ptr<const solver::SolverModel> model, std::optional<Snapshot> snap,
                           std::shared_ptr<const KeyRegistry> registry, HeavyFilter filter, SensingMode mode)
    : model_(std::move(model)), snap_(std::move(snap)), registry_(std::move(registry)), filter_(std::move(filter)) {
    const std::size_t n = registry_->size();
    if (snap_ && n > 0) {
        estimates_ = solver::recover_full(*model_, *snap_, n, mode);
    } else {
        estimates_.assign(n, 0);
    }
}

Count QueryContext::query(const Key& key) const {
    Count sketch_part = 0;
    if (const auto pos = registry_->position(key)) sketch_part = estimates_[*pos];
    return sketch_part + filter_.query(key);
}

ControlPlane::ControlPlane(std::size_t window_len, std::shared_ptr<const solver::SolverModel> initial)
    : window_(window_len), model_(std::move(initial)) {}

void ControlPlane::on_report(const KeyReport& report) {
    std::lock_guard lock(mu_);
    const auto before = registry_.version();
    registry_.handle_report(report);
    if (registry_.version() != before) registry_copy_.reset();
}

void ControlPlane::on_snapshot(Snapshot snap) {
    std::lock_guard lock(mu_);
    window_.push(std::move(snap));
}

void ControlPlane::publish(std::shared_ptr<const solver::SolverModel> model) {
    std::lock_guard lock(mu_);
    model_ = std::move(model);
}

std::shared_ptr<const KeyRegistry> ControlPlane::registry_locked() const {
    if (!registry_copy_) registry_copy_ = std::make_shared<const KeyRegistry>(registry_);
    return registry_copy_;
}

ControlPlane::TrainingView ControlPlane::training_view() const {
    std::lock_guard lock(mu_);
    return TrainingView{registry_locked(), window_};
}

std::shared_ptr<const KeyRegistry> ControlPlane::registry() const {
    std::lock_guard lock(mu_);
    return registry_locked();
}

std::shared_ptr<const solver::SolverModel> ControlPlane::model() const {
    std::lock_guard lock(mu_);
    return model_;
}

std::optional<Snapshot> ControlPlane::latest_snapshot() const {
    std::lock_guard lock(mu_);
    if (window_.empty()) return std::nullopt;
    return window_.back();
}

std::size_t ControlPlane::window_size() const {
    std::lock_guard lock(mu_);
    return window_.size();
}

QueryContext ControlPlane::freeze_epoch(const HeavyFilter& filter, SensingMode mode) const {
    std::shared_ptr<const KeyRegistry> reg;
    std::optional<Snapshot> snap;
    std::shared_ptr<const solver::SolverModel> model;
    {
        std::lock_guard lock(mu_);
        reg = registry_locked();
        if (!window_.empty()) snap = window_.back();
        model = model_;
    }
    return QueryContext(std::move(model), std::move(snap), std::move(reg), filter, mode);
}

} // namespace ucl
