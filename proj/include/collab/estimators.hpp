#pragma once

#include <collab/model.hpp>
#include <collab/sample_store.hpp>

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace collab {

enum class EstimatorKind {
    SampleMean,
    UmvueBivariate,
    UmvueTrivariate,
    UmvueSubset,
    Wilks,
    Bishwal,
    JointSampleMean,
    KalmanFused,
    MleScenario1,
    MleScenario2,
};

std::string to_string(EstimatorKind kind);

/// Point estimate of a mean. `variance` is empty when only an empirical
/// variance exists (the regression-coefficient estimator and anything fused
/// with it).
struct Estimate {
    double value = 0.0;
    std::optional<double> variance;
    std::vector<std::pair<SubsetKey, double>> weights_used;
    EstimatorKind source = EstimatorKind::SampleMean;
    /// Subset whose samples produced this estimate (unset for fused ones).
    std::optional<SubsetKey> subset;
};

/// Fusion weights; nonnegative and summing to one.
struct KalmanWeights {
    std::vector<double> g;
};

// --- single-source estimators ---------------------------------------------

/// Sample mean of marginal samples of `sensor`; variance sigma^2 / N.
Estimate sample_mean(const SampleStore& store, const GaussianModel& model, std::size_t sensor = 0);

/// x1bar - rho sigma1/sigmaj (xjbar - mu_j) over joint samples of {0, j}.
Estimate umvue_bivariate(const SampleStore& store, const GaussianModel& model, std::size_t j);

/// Trivariate UMVUE over joint samples of {0, j, k}.
Estimate umvue_trivariate(const SampleStore& store, const GaussianModel& model, std::size_t j = 1,
                          std::size_t k = 2);

/// Regression-adjusted mean for any subset containing sensor 0, using known
/// means of the other members; variance 1 / (N * fi_subset).
Estimate umvue_subset(const SampleStore& store, const GaussianModel& model, SubsetKey subset);

/// Two-sensor estimate of mu_0 with both means unknown, from marginal samples
/// of X_0 and X_1 and joint samples of (X_0, X_1). Same value as the
/// likelihood maximiser.
Estimate wilks_bivariate(const SampleStore& store, double sigma1, double sigma2, double rho);

/// Variance of wilks_bivariate for counts (n1, n2, n12):
/// (n12 + n2 (1 - rho^2)) sigma1^2 / Delta, Delta = n12 n + n1 n2 (1 - rho^2).
double wilks_variance(long n1, long n2, long n12, double rho, double sigma1);
/// Same variance through ratios a = n1/n12, b = n2/n12:
/// (1 + b(1-rho^2)) / (1 + a + b + a b (1-rho^2)) * sigma1^2 / n12.
double wilks_variance_ratio_form(long n1, long n2, long n12, double rho, double sigma1);

/// Regression estimator with unknown correlation and known mu_j:
/// x1bar - beta_hat (xjbar - mu_j). Requires N >= 3. When the regressor
/// spread is below 1e-12 the plain x1bar of those samples is returned.
Estimate bishwal_bivariate(const SampleStore& store, const std::vector<double>& known_means,
                           std::size_t j);

/// x1bar over the joint samples of `subset`; unbiased fallback.
Estimate joint_sample_mean(const SampleStore& store, SubsetKey subset);

// --- weights and fusion -----------------------------------------------------

KalmanWeights optimal_weights_bivariate(long n1, long n12, double rho);
/// Inverse-variance weights; infinite variances get weight zero.
KalmanWeights optimal_weights_general(const std::vector<double>& variances);
/// g_i = N_i / sum N.
KalmanWeights heuristic_weights_counts(const std::vector<long>& counts);

/// sum g_i * estimate_i; analytic variance sum g_i^2 Var_i when every
/// component has one. Components are assumed independent.
Estimate kalman_fuse(const std::vector<Estimate>& estimates, const KalmanWeights& weights);

/// Fuses the UMVUE of every subset containing sensor 0 present in the store,
/// with inverse-variance weights (known correlations and other means).
Estimate fuse_known_correlations(const SampleStore& store, const GaussianModel& model);

/// Fuses the marginal sample mean with one regression estimator per
/// bivariate subset {0, j}, weighted by sample counts (unknown correlations).
/// Bivariate subsets with fewer than three samples contribute their plain
/// x1bar.
Estimate fuse_unknown_correlations(const SampleStore& store, const std::vector<double>& known_means);

// --- maximum likelihood -----------------------------------------------------

/// MLE of mu_0 from marginal samples of X_0 and joint samples of (X_0, X_j),
/// mu_j known.
Estimate mle_scenario1_bivariate(const SampleStore& store, const GaussianModel& model,
                                 std::size_t j = 1);

/// Joint MLE (mu_0, mu_1) with both means unknown, two sensors.
std::pair<Estimate, Estimate> mle_scenario2_bivariate(const SampleStore& store, double sigma1,
                                                      double sigma2, double rho);

/// Joint MLE of all means when every mean is unknown and the covariance is
/// known (generalised least squares over every subset in the store).
/// Returns the estimate of `sensor`.
Estimate mle_scenario2_general(const SampleStore& store, const GaussianModel& model,
                               std::size_t sensor = 0);

} // namespace collab
