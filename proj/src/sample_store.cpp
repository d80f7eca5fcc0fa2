#include <collab/sample_store.hpp>

namespace collab {

SubsetStats::SubsetStats(SubsetKey key) : key_(key) {
    const auto n = static_cast<Eigen::Index>(key.size());
    mean_ = Eigen::VectorXd::Zero(n);
    comoment_ = Eigen::MatrixXd::Zero(n, n);
}

void SubsetStats::add(std::span<const double> observation) {
    if (observation.size() != key_.size())
        throw Error(ErrorCode::DimensionMismatch, "observation length does not match subset");
    const Eigen::Map<const Eigen::VectorXd> x(observation.data(), mean_.size());
    ++count_;
    const Eigen::VectorXd delta = x - mean_;
    mean_ += delta / static_cast<double>(count_);
    comoment_.noalias() += delta * (x - mean_).transpose();
}

void SampleStore::add(SubsetKey subset, std::span<const double> observation) {
    if (subset.empty()) throw Error(ErrorCode::InvalidSubset, "empty subset");
    auto it = stats_.find(subset);
    if (it == stats_.end()) it = stats_.emplace(subset, SubsetStats(subset)).first;
    it->second.add(observation);
}

long SampleStore::count(SubsetKey subset) const {
    const auto* s = find(subset);
    return s ? s->count() : 0;
}

const SubsetStats* SampleStore::find(SubsetKey subset) const {
    auto it = stats_.find(subset);
    return it == stats_.end() ? nullptr : &it->second;
}

const SubsetStats& SampleStore::at(SubsetKey subset) const {
    const auto* s = find(subset);
    if (!s) throw Error(ErrorCode::NoSamples, "no samples for subset {" + subset.label() + "}");
    return *s;
}

long SampleStore::total_count() const {
    long n = 0;
    for (const auto& [key, s] : stats_) n += s.count();
    return n;
}

} // namespace collab
