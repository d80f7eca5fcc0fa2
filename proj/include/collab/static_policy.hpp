#pragma once

#include <collab/fisher.hpp>
#include <collab/model.hpp>

#include <string>
#include <vector>

namespace collab {

/// Critical correlation sqrt(alpha / (alpha + 1)) above which one joint
/// sample of (X_0, X_j) beats alpha + 1 marginal samples of X_0.
double bivariate_threshold(double alpha);

/// One pairwise comparison between two sample types, per unit of resource.
struct SubsetComparison {
    SubsetKey first;
    SubsetKey second;
    SubsetKey winner;
    /// fi(first)/cost(first) - fi(second)/cost(second), in FI per resource unit.
    double margin = 0.0;
};

struct ThresholdReport {
    double alpha = 0.0;
    double rho_star = 0.0;
    std::vector<SubsetComparison> comparisons;
};

/// Threshold plus per-resource comparisons of {0} against every {0, j}.
ThresholdReport threshold_report(const GaussianModel& model, double alpha);

/// True iff one trivariate sample (X_0, X_j, X_k) carries more information
/// than (2a+1)/(a+1) bivariate samples of (X_0, X_j), where rho12 = rho(0,j),
/// rho13 = rho(0,k), rho23 = rho(j,k). Evaluated as
///   a * (1 + 4 r12 r13 r23 - r12^2 - r23^2 - r12^2 r23^2 - 2 r13^2)
///     < r13^2 + r12^2 r23^2 - 2 r12 r13 r23,
/// which stays correct when the bracket is not positive.
bool trivariate_beats_bivariate(double rho12, double rho13, double rho23, double alpha);
/// Same comparison against (X_0, X_k) samples (rho12 and rho13 swapped).
bool trivariate_beats_bivariate_13(double rho12, double rho13, double rho23, double alpha);
/// True iff one trivariate sample beats 2a+1 marginal samples of X_0.
bool trivariate_beats_univariate(double rho12, double rho13, double rho23, double alpha);

/// Closed-form optimal two-sensor policy. Ties at rho^2 == a/(a+1) resolve
/// to the all-joint row.
StaticPolicy table3_policy(double alpha, double budget_e, double rho12);

struct LpSolution {
    StaticPolicy policy;
    double objective = 0.0;
    bool mass_constraint_active = false;
    bool budget_constraint_active = false;
    /// Best objective minus the solution objective over every enumerated
    /// vertex; zero for the returned optimum.
    double certificate_gap = 0.0;
    std::size_t vertices_examined = 0;
};

/// Maximises expected information about mu_0 over subsets containing sensor 0
/// with at most `max_subset_size` members (0 means K), subject to
/// sum p <= 1 and sum p * cost <= E. With two coupling constraints every
/// vertex has at most two nonzero coordinates, so all singleton and pair
/// vertices are enumerated. Among optimal vertices (relative tolerance 1e-12)
/// the one with the most collaboration mass sum p_S (|S| - 1) wins.
LpSolution solve_scenario1_lp(const GaussianModel& model, double alpha, double budget_e,
                              std::size_t max_subset_size = 0);

/// Optimal policy when every mean is unknown: all budget on marginal
/// samples of X_0, p_0 = min(E, 1). Independent of the correlations.
StaticPolicy solve_scenario2(const GaussianModel& model, double alpha, double budget_e);

/// (I^{-1})_{0,0} of the two-sensor all-means-unknown FIM for per-slot
/// probabilities (p1, p2, p12). +infinity when mu_0 is not identifiable.
double crb_scenario2_bivariate(double p1, double p2, double p12, const GaussianModel& model);

/// Sample type with the largest information per unit of resource among
/// {0}, {0,j}, {0,k}, {0,j,k}; ties go to the earlier (cheaper) entry.
enum class SampleType { Univariate, Bivariate12, Bivariate13, Trivariate, Invalid };
std::string to_string(SampleType type);
SampleType best_trivariate_sample_type(double rho12, double rho13, double rho23, double alpha);

} // namespace collab
