#pragma once

#include <collab/error.hpp>

#include <Eigen/Dense>

#include <cstdint>
#include <initializer_list>
#include <map>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace collab {

// Sensor indices are 0-based throughout the library; sensor 0 is the one
// whose mean is being estimated. Labels printed for humans are 1-based.

using Rng = std::mt19937_64;

/// Derives an independent seed for substream `stream` of `master` (splitmix64
/// over master ^ golden-ratio * (stream + 1)). Replication r of an experiment
/// uses derive_seed(seed, r).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

inline constexpr double kPdTolerance = 1e-10;

/// Multivariate Gaussian world: means, standard deviations and a unit-diagonal
/// correlation matrix with off-diagonal entries in [0, 1). Immutable once built.
class GaussianModel {
public:
    static GaussianModel validate(std::vector<double> means, std::vector<double> std_devs,
                                  const std::vector<std::vector<double>>& correlations);
    static GaussianModel validate(std::vector<double> means, std::vector<double> std_devs,
                                  const Eigen::MatrixXd& correlations);

    std::size_t dim() const { return means_.size(); }
    const std::vector<double>& means() const { return means_; }
    const std::vector<double>& std_devs() const { return std_devs_; }
    double mean(std::size_t k) const { return means_.at(k); }
    double sigma(std::size_t k) const { return std_devs_.at(k); }
    double rho(std::size_t k, std::size_t l) const { return corr_(k, l); }
    const Eigen::MatrixXd& correlations() const { return corr_; }
    const Eigen::MatrixXd& covariance() const { return cov_; }

private:
    GaussianModel() = default;

    std::vector<double> means_;
    std::vector<double> std_devs_;
    Eigen::MatrixXd corr_;
    Eigen::MatrixXd cov_;
};

/// Resource accounting: alpha is the communication cost per extra observation,
/// budget_e the resource per sensor per slot, horizon_t the number of slots.
struct ResourceSpec {
    double alpha = 0.0;
    double budget_e = 1.0;
    long horizon_t = 1;

    static ResourceSpec validate(double alpha, double budget_e, long horizon_t);
};

/// A nonempty set of sensor indices, stored as a bitmask (K <= 32).
class SubsetKey {
public:
    static constexpr std::size_t kMaxSensors = 32;

    SubsetKey() = default;
    SubsetKey(std::initializer_list<std::size_t> members);
    explicit SubsetKey(std::span<const std::size_t> members);

    static SubsetKey from_mask(std::uint32_t mask) {
        SubsetKey key;
        key.mask_ = mask;
        return key;
    }
    static SubsetKey single(std::size_t k) { return SubsetKey{k}; }
    static SubsetKey pair(std::size_t k, std::size_t l) { return SubsetKey{k, l}; }

    std::uint32_t mask() const { return mask_; }
    bool empty() const { return mask_ == 0; }
    std::size_t size() const;
    bool contains(std::size_t k) const { return k < kMaxSensors && ((mask_ >> k) & 1u) != 0; }
    bool contains_target() const { return contains(0); }
    /// Position of sensor k inside members(); k must be a member.
    std::size_t local_index(std::size_t k) const;
    std::vector<std::size_t> members() const;
    std::size_t max_member() const;

    /// Throws InvalidSubset when empty or reaching past `dim`.
    void check(std::size_t dim) const;

    /// 1-based label, e.g. "1,2".
    std::string label() const;
    static SubsetKey parse_label(const std::string& label);

    friend bool operator==(SubsetKey a, SubsetKey b) { return a.mask_ == b.mask_; }
    friend auto operator<=>(SubsetKey a, SubsetKey b) {
        if (a.size() != b.size()) return a.size() <=> b.size();
        return a.mask_ <=> b.mask_;
    }

private:
    std::uint32_t mask_ = 0;
};

/// Resource cost of observing `subset` from sensor 0's point of view:
/// 1 + alpha * (|subset| - 1).
double cost_of_subset(SubsetKey subset, double alpha);

/// Covariance of the model restricted to `subset`, in members() order.
Eigen::MatrixXd subset_covariance(const GaussianModel& model, SubsetKey subset);

/// One draw of (X_k : k in subset). Uncached; see Sampler for repeated use.
Eigen::VectorXd draw_joint(const GaussianModel& model, SubsetKey subset, Rng& rng);

/// Draws joint observations using a Cholesky factor cached per subset.
/// Single-owner: each replication holds its own Sampler.
class Sampler {
public:
    explicit Sampler(const GaussianModel& model) : model_(&model) {}

    Eigen::VectorXd draw(SubsetKey subset, Rng& rng);
    const GaussianModel& model() const { return *model_; }

private:
    struct Factor {
        Eigen::VectorXd mean;
        Eigen::MatrixXd lower;
    };
    const Factor& factor(SubsetKey subset);

    const GaussianModel* model_;
    std::map<std::uint32_t, Factor> cache_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

} // namespace collab
