#pragma once

#include <collab/model.hpp>

#include <Eigen/Dense>

#include <map>
#include <span>
#include <vector>

namespace collab {

/// Sufficient statistics of every observation collected for one subset.
///
/// Stored as running means and centred co-moments (Welford updates), which
/// carry the same information as raw sums and cross-products but stay
/// accurate over long horizons. sum() and sum_of_products() recover the raw
/// forms.
class SubsetStats {
public:
    explicit SubsetStats(SubsetKey key);

    SubsetKey key() const { return key_; }
    long count() const { return count_; }

    void add(std::span<const double> observation);

    /// Sample mean of the member at local position i.
    double mean(std::size_t i) const { return mean_(static_cast<Eigen::Index>(i)); }
    /// Sum over samples of (x_i - mean_i)(x_j - mean_j).
    double comoment(std::size_t i, std::size_t j) const {
        return comoment_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
    double sum(std::size_t i) const { return static_cast<double>(count_) * mean(i); }
    double sum_of_products(std::size_t i, std::size_t j) const {
        return comoment(i, j) + static_cast<double>(count_) * mean(i) * mean(j);
    }
    /// Mean of a sensor given by its global index.
    double mean_of(std::size_t sensor) const { return mean(key_.local_index(sensor)); }

    const Eigen::VectorXd& means() const { return mean_; }
    const Eigen::MatrixXd& comoments() const { return comoment_; }

private:
    SubsetKey key_;
    long count_ = 0;
    Eigen::VectorXd mean_;
    Eigen::MatrixXd comoment_;
};

/// Per-subset counts and sufficient statistics. Single writer.
class SampleStore {
public:
    void add(SubsetKey subset, std::span<const double> observation);
    void add(SubsetKey subset, const Eigen::VectorXd& observation) {
        add(subset, std::span<const double>(observation.data(), static_cast<std::size_t>(observation.size())));
    }

    long count(SubsetKey subset) const;
    /// nullptr when nothing was collected for the subset.
    const SubsetStats* find(SubsetKey subset) const;
    const SubsetStats& at(SubsetKey subset) const;

    const std::map<SubsetKey, SubsetStats>& subsets() const { return stats_; }
    long total_count() const;

private:
    std::map<SubsetKey, SubsetStats> stats_;
};

} // namespace collab
