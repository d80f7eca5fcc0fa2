#pragma once

#include <collab/model.hpp>

#include <Eigen/Dense>

#include <map>

namespace collab {

/// Static data-collection policy: probability p_S of observing exactly the
/// subset S in a slot, with the remainder going to "observe nothing".
class StaticPolicy {
public:
    StaticPolicy() = default;
    /// Builds a policy from nonzero subset probabilities; p_empty is the
    /// remainder. Throws InvalidArgument if probabilities leave [0, 1] or sum
    /// past 1 (beyond 1e-12).
    static StaticPolicy from_probs(std::map<SubsetKey, double> probs);

    const std::map<SubsetKey, double>& probs() const { return probs_; }
    double prob(SubsetKey subset) const;
    double p_empty() const { return p_empty_; }

    /// Expected resource spend per slot. Subsets containing sensor 0 cost
    /// cost_of_subset(); subsets without it cost alpha per received value.
    double expected_cost(double alpha) const;
    bool feasible(double alpha, double budget_e, double tol = 1e-12) const;

private:
    std::map<SubsetKey, double> probs_;
    double p_empty_ = 1.0;
};

/// Information about mu_0 in one marginal sample: 1 / sigma_0^2.
double fi_marginal(const GaussianModel& model);

/// Information about mu_0 carried by one joint sample of `subset` when all
/// other means are known: the (0,0) entry of the inverse subset covariance.
/// Zero for subsets without sensor 0. Closed forms for up to three members,
/// Cholesky inversion above that.
double fi_subset(const GaussianModel& model, SubsetKey subset);

/// Expected information per slot, sum_S p_S * fi_subset(S).
double expected_fi(const StaticPolicy& policy, const GaussianModel& model);

/// Fisher information matrix about all K means (all unknown). Each subset's
/// inverse covariance is embedded at its members' coordinates.
Eigen::MatrixXd fim_scenario2(const StaticPolicy& policy, const GaussianModel& model);

/// Diagonal entry of the inverse FIM. For a singular FIM the pseudo-inverse
/// is used when coordinate `index` is identifiable, otherwise +infinity.
double crb_entry(const Eigen::MatrixXd& fim, std::size_t index);

} // namespace collab
