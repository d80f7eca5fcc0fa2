#pragma once

#include <collab/estimators.hpp>
#include <collab/model.hpp>
#include <collab/sample_store.hpp>

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace collab {

// Arms are 0-based: arm 0 pulls marginal samples of X_0, arm j >= 1 pulls one
// joint sample of (X_0, X_j). There are K arms for K sensors.

/// Decision-round layout for a resource spec.
struct RoundSchedule {
    long slots_per_round = 1;
    /// Samples of X_0 collected when arm 0 is pulled.
    long marginals_per_pull = 1;
    /// floor(T E / (alpha + 1)).
    long total_rounds = 0;

    /// Rounds that fit inside the horizon: min(total_rounds, floor(T / slots_per_round)).
    long playable_rounds(long horizon_t) const;
    /// Last slot (1-based) of round tau (1-based); samples land there.
    long end_slot(long tau) const { return tau * slots_per_round; }
};

RoundSchedule make_schedule(const ResourceSpec& resources);

/// Smallest |rho_hat| treated as degenerate; surrogates clamp there.
inline constexpr double kRhoClamp = 1.0 - 1e-9;

/// Sample correlation of the joint samples of {0, j}.
double sample_correlation(const SampleStore& store, std::size_t j);
/// 1 / ((1 - rho_hat^2) sigma1^2). Requires two joint samples of {0, j}.
double surrogate_fi(const SampleStore& store, std::size_t j, double sigma1);
/// atanh(rho_hat). Requires two joint samples of {0, j}.
double surrogate_z(const SampleStore& store, std::size_t j);
/// Reference reward of arm 0 under the z flavour: atanh(sqrt(alpha / (1 + alpha))).
double arm_one_z(double alpha);
/// sqrt(a ln(1/epsilon) / (2 n)).
double ci_width(double a, double epsilon, long n);

/// Rounds ceil(eta^l), l >= 1, up to `limit`, ascending and deduplicated.
std::vector<long> exploration_points(double eta, long limit);
bool in_exploration_set(long tau, double eta);

enum class Flavor { F, Z };
enum class PolicyKind { Double, Ucb, Etc, FixedArm };

/// Reward recorded for arm 0 under the F flavour: the constant 1, or the
/// per-round information c / sigma1^2 with c = marginals_per_pull.
enum class ArmOneReward { Constant, PerRound };

struct PolicySpec {
    PolicyKind kind = PolicyKind::Ucb;
    Flavor flavor = Flavor::Z;
    double eta = 2.0;
    double ucb_a = 4.0;
    /// ETC explores while the round's first slot is <= explore_until.
    long explore_until = 100;
    double etc_level = 0.05;
    std::size_t fixed_arm = 0;
    ArmOneReward arm_one_reward = ArmOneReward::Constant;

    /// DOUBLE-F, DOUBLE-Z, UCB-F, UCB-Z, ETC, ARM-1 .. ARM-K (1-based arm labels).
    static PolicySpec parse(const std::string& name);
    std::string name() const;
};

/// Everything one replication of an adaptive run carries. The model is used
/// only to draw samples; policies see sigma_1, the other means and alpha.
struct BanditState {
    BanditState(const GaussianModel& model, const ResourceSpec& resources, PolicySpec policy,
                std::uint64_t seed);
    // The sampler points at `model`, so the state stays put.
    BanditState(const BanditState&) = delete;
    BanditState& operator=(const BanditState&) = delete;

    std::size_t arms() const { return pulls.size(); }

    GaussianModel model;
    ResourceSpec resources;
    PolicySpec policy;
    RoundSchedule schedule;

    /// Rounds completed so far; the next round is tau = round + 1.
    long round = 0;
    std::vector<long> pulls;
    std::vector<double> reward;
    SampleStore store;
    std::optional<Estimate> estimate;
    double spent = 0.0;

    bool committed = false;
    std::size_t commit_arm = 0;

    Rng rng;
    Sampler sampler;
};

std::size_t double_step(BanditState& state, Flavor flavor);
std::size_t ucb_step(BanditState& state, Flavor flavor);
std::size_t etc_step(BanditState& state);
/// Dispatches on state.policy.
std::size_t select_arm(BanditState& state);

/// Draws the arm's samples, updates counts, surrogate and spend, then
/// refreshes the fused estimate with count weights. Does not advance `round`.
void collect_and_process(BanditState& state, std::size_t arm);

/// select_arm + collect_and_process + round increment. Returns the arm pulled.
std::size_t play_round(BanditState& state);

/// Two-sided t test of rho = 0 at `level` on n joint samples, as used by
/// ETC at its switch point. False when n < 3.
bool correlation_significant(double rho_hat, long n, double level);

} // namespace collab
