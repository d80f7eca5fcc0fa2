#pragma once

#include <collab/bandit.hpp>
#include <collab/fisher.hpp>
#include <collab/model.hpp>
#include <collab/static_policy.hpp>

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace collab {

/// One policy to simulate: either adaptive (scenario 3) or a static
/// distribution over subsets.
struct PolicyEntry {
    std::string name;
    std::optional<PolicySpec> adaptive;
    std::optional<StaticPolicy> fixed;
};

struct ExperimentConfig {
    ExperimentConfig(GaussianModel m, ResourceSpec r) : model(std::move(m)), resources(r) {}

    GaussianModel model;
    ResourceSpec resources;
    int scenario = 3;
    std::vector<PolicyEntry> policies;
    long replications = 100;
    std::uint64_t seed = 0;
    std::string output;
    /// Slots (1-based, ascending, within [1, T]) at which the squared error is recorded.
    std::vector<long> metric_grid;
    /// 0 picks std::thread::hardware_concurrency().
    unsigned threads = 0;

    /// Throws InvalidConfig on R < 1, a bad grid, or a policy that does
    /// not fit the scenario.
    void validate() const;
};

/// step, 2 step, ... up to T, with T always included.
std::vector<long> default_metric_grid(long horizon_t, long step);

struct MsePoint {
    long slot = 0;
    /// NaN until every replication has an estimate.
    double mse = 0.0;
    double std_error = 0.0;
    long defined = 0;
};

struct MseTrajectory {
    std::string policy;
    std::vector<MsePoint> points;

    /// True when no grid point has an estimate in every replication.
    bool empty() const;
    double final_mse() const;
};

/// Cumulative spend per replication, stored as (slot, cumulative spend)
/// steps; spend is constant between steps.
class ResourceLedger {
public:
    explicit ResourceLedger(std::size_t replications = 0) : steps_(replications) {}

    void record(std::size_t replication, long slot, double cumulative);
    double spend_at(std::size_t replication, long slot) const;
    std::size_t replications() const { return steps_.size(); }
    const std::vector<std::pair<long, double>>& steps(std::size_t replication) const {
        return steps_.at(replication);
    }

    /// Largest spend(t) - (t E + alpha + 1) over every slot and replication;
    /// the invariant holds when this is <= 0.
    double worst_excess(double alpha, double budget_e) const;
    bool holds(double alpha, double budget_e) const { return worst_excess(alpha, budget_e) <= 1e-9; }

private:
    std::vector<std::vector<std::pair<long, double>>> steps_;
};

struct PolicyRun {
    MseTrajectory trajectory;
    ResourceLedger ledger;
    std::vector<std::uint64_t> seeds;
    /// Average pulls per arm over replications; empty for static runs.
    std::vector<double> mean_pulls;
};

/// Seed of replication r: derive_seed(config.seed, r). Every policy sees the
/// same replication seeds.
std::vector<std::uint64_t> replication_seeds(const ExperimentConfig& config);

/// Runs fn(r) for r in [0, n) on up to `threads` workers.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn);

/// Per-slot categorical draws from `policy`; the estimator follows the
/// scenario (1: optimal-weight fusion, 2: two-sensor MLE or GLS, 3:
/// count-weight fusion).
PolicyRun run_static(const ExperimentConfig& config, const StaticPolicy& policy,
                     const std::string& label = "static");

/// Scenario 3 adaptive policy over min(total_rounds, floor(T / slots)) rounds.
PolicyRun run_adaptive(const ExperimentConfig& config, const PolicySpec& policy);

/// Runs every entry of config.policies in order.
std::vector<PolicyRun> run_experiment(const ExperimentConfig& config);

/// Best arm under the true correlations: arm 0 earns c / sigma1^2 per round
/// (c = marginals_per_pull), arm j earns 1 / ((1 - rho_0j^2) sigma1^2).
/// Rewards within a relative 1e-12 tie and go to the lower index.
std::size_t oracle_static_arm(const GaussianModel& model, double alpha, double budget_e);

// --- analytic figure data ----------------------------------------------------

struct RegionCell {
    double rho12 = 0.0;
    double rho13 = 0.0;
    SampleType winner = SampleType::Invalid;
    /// Information per unit of resource of univariate, (0,1), (0,2), (0,1,2) samples.
    double per_resource[4] = {0.0, 0.0, 0.0, 0.0};
};

/// resolution x resolution grid with rho = i / resolution, i in [0, resolution).
std::vector<RegionCell> region_grid(double alpha, double rho23, int resolution);
/// CSV columns: rho12, rho13, winner, fi_univariate, fi_bivariate_12,
/// fi_bivariate_13, fi_trivariate (information per resource unit; empty when invalid).
void emit_region_grid(std::ostream& out, double alpha, double rho23, int resolution);

struct CrbPoint {
    double p1 = 0.0;
    double p12 = 0.0;
    double crb = 0.0;
    bool feasible = true;
};

/// p1 on `points` evenly spaced values in [0, 1], p12 = min(1 - p1, (E - p1) / (alpha + 1)).
/// Scenario 1: 1 / expected FI; scenario 2: the all-means-unknown bound.
/// Points with p12 < 0 are infeasible and carry crb = +inf.
std::vector<CrbPoint> crb_curve(int scenario, double alpha, double budget_e, double rho, int points);
/// CSV columns: p1, p12, crb, feasible.
void emit_crb_curve(std::ostream& out, int scenario, double alpha, double budget_e, double rho, int points);

/// CSV columns: slot, policy, mse, stderr.
void write_mse_csv(std::ostream& out, const std::vector<MseTrajectory>& trajectories);

// --- five-sensor adaptive experiment ----------------------------------------------

/// Correlations rho(0, j) for settings 'a'..'d'; other pairs use
/// rho(k, l) = rho(0, k) rho(0, l), which keeps the matrix positive definite.
std::vector<double> fig6_target_correlations(char setting);
GaussianModel fig6_model(char setting);
GaussianModel factor_model(const std::vector<double>& target_correlations, double mean = 1.0,
                           double sigma = 1.0);

/// DOUBLE-F, DOUBLE-Z, UCB-F, UCB-Z, ETC, ARM-1 .. ARM-K.
std::vector<std::string> fig6_policy_names(std::size_t sensors);

struct Fig6Options {
    long runs = 100;
    std::uint64_t seed = 0;
    long horizon_t = 5000;
    long grid_step = 10;
    unsigned threads = 0;
    double alpha = 2.0;
    double budget_e = 0.6;
};

ExperimentConfig fig6_config(char setting, const Fig6Options& options);

} // namespace collab
