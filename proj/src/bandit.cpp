#include <collab/bandit.hpp>

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>

namespace collab {

namespace {

// Ratios such as 3 / 0.6 land a few ulps off an integer in binary; snap them
// before taking floor/ceil so the schedule matches the exact rational value.
double snap(double x) {
    const double r = std::round(x);
    return std::abs(x - r) <= 1e-9 * std::max(1.0, std::abs(x)) ? r : x;
}

long ceil_snapped(double x) { return static_cast<long>(std::ceil(snap(x))); }
long floor_snapped(double x) { return static_cast<long>(std::floor(snap(x))); }

std::size_t argmax_first(const std::vector<double>& v) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i)
        if (v[i] > v[best]) best = i;
    return best;
}

double clamp_rho(double r) { return std::clamp(r, -kRhoClamp, kRhoClamp); }

} // namespace

long RoundSchedule::playable_rounds(long horizon_t) const {
    return std::min(total_rounds, horizon_t / slots_per_round);
}

RoundSchedule make_schedule(const ResourceSpec& resources) {
    const double a1 = resources.alpha + 1.0;
    const double e = resources.budget_e;
    RoundSchedule s;
    if (e >= a1) {
        s.slots_per_round = 1;
        s.marginals_per_pull = 1;
    } else if (e >= 1.0) {
        s.slots_per_round = ceil_snapped(a1 / e);
        s.marginals_per_pull = s.slots_per_round;
    } else {
        s.slots_per_round = ceil_snapped(a1 / e);
        s.marginals_per_pull = floor_snapped(a1);
    }
    s.total_rounds = floor_snapped(static_cast<double>(resources.horizon_t) * e / a1);
    return s;
}

double sample_correlation(const SampleStore& store, std::size_t j) {
    const SubsetStats* s = store.find(SubsetKey{0, j});
    if (!s || s->count() < 2)
        throw Error(ErrorCode::InsufficientSamples, "correlation needs two joint samples");
    const double sxx = s->comoment(0, 0);
    const double syy = s->comoment(1, 1);
    if (!(sxx > 0.0 && syy > 0.0)) return 0.0;
    return s->comoment(0, 1) / std::sqrt(sxx * syy);
}

double surrogate_fi(const SampleStore& store, std::size_t j, double sigma1) {
    const double r = clamp_rho(sample_correlation(store, j));
    return 1.0 / ((1.0 - r * r) * sigma1 * sigma1);
}

double surrogate_z(const SampleStore& store, std::size_t j) {
    return std::atanh(clamp_rho(sample_correlation(store, j)));
}

double arm_one_z(double alpha) { return std::atanh(std::sqrt(alpha / (1.0 + alpha))); }

double ci_width(double a, double epsilon, long n) {
    if (n < 1) return std::numeric_limits<double>::infinity();
    return std::sqrt(a * std::log(1.0 / epsilon) / (2.0 * static_cast<double>(n)));
}

std::vector<long> exploration_points(double eta, long limit) {
    if (!(eta > 1.0)) throw Error(ErrorCode::InvalidArgument, "eta must be > 1");
    std::vector<long> points;
    for (int l = 1;; ++l) {
        const double v = std::ceil(snap(std::pow(eta, l)));
        if (v > static_cast<double>(limit)) break;
        const long p = static_cast<long>(v);
        if (points.empty() || points.back() != p) points.push_back(p);
    }
    return points;
}

bool in_exploration_set(long tau, double eta) {
    if (!(eta > 1.0)) throw Error(ErrorCode::InvalidArgument, "eta must be > 1");
    for (int l = 1;; ++l) {
        const double v = std::ceil(snap(std::pow(eta, l)));
        if (v == static_cast<double>(tau)) return true;
        if (v > static_cast<double>(tau)) return false;
    }
}

PolicySpec PolicySpec::parse(const std::string& name) {
    std::string up = name;
    for (auto& ch : up) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
    PolicySpec spec;
    if (up == "DOUBLE-F" || up == "DOUBLE-Z") {
        spec.kind = PolicyKind::Double;
        spec.flavor = up.back() == 'F' ? Flavor::F : Flavor::Z;
    } else if (up == "UCB-F" || up == "UCB-Z") {
        spec.kind = PolicyKind::Ucb;
        spec.flavor = up.back() == 'F' ? Flavor::F : Flavor::Z;
    } else if (up == "ETC") {
        spec.kind = PolicyKind::Etc;
    } else if (up.rfind("ARM-", 0) == 0) {
        spec.kind = PolicyKind::FixedArm;
        long label = 0;
        try {
            std::size_t used = 0;
            label = std::stol(up.substr(4), &used);
            if (used != up.size() - 4) label = 0;
        } catch (const std::exception&) {
            label = 0;
        }
        if (label < 1) throw Error(ErrorCode::InvalidConfig, "bad fixed-arm policy '" + name + "'");
        spec.fixed_arm = static_cast<std::size_t>(label - 1);
    } else {
        throw Error(ErrorCode::InvalidConfig, "unknown adaptive policy '" + name + "'");
    }
    return spec;
}

std::string PolicySpec::name() const {
    const std::string suffix = flavor == Flavor::F ? "-F" : "-Z";
    switch (kind) {
    case PolicyKind::Double: return "DOUBLE" + suffix;
    case PolicyKind::Ucb: return "UCB" + suffix;
    case PolicyKind::Etc: return "ETC";
    case PolicyKind::FixedArm: return "ARM-" + std::to_string(fixed_arm + 1);
    }
    return "unknown";
}

BanditState::BanditState(const GaussianModel& m, const ResourceSpec& r, PolicySpec p, std::uint64_t seed)
    : model(m), resources(r), policy(p), schedule(make_schedule(r)), pulls(m.dim(), 0),
      reward(m.dim(), 0.0), rng(seed), sampler(model) {
    if (policy.kind == PolicyKind::FixedArm && policy.fixed_arm >= m.dim())
        throw Error(ErrorCode::InvalidConfig, "fixed arm outside [1, K]");
}

std::size_t double_step(BanditState& state, Flavor flavor) {
    (void)flavor;  // the flavour only changes how rewards were recorded
    const long tau = state.round + 1;
    const auto k = static_cast<long>(state.arms());
    if (tau <= 2 * k) return static_cast<std::size_t>(tau % k);
    if (in_exploration_set(tau, state.policy.eta)) {
        std::uniform_int_distribution<std::size_t> pick(0, state.arms() - 1);
        return pick(state.rng);
    }
    return argmax_first(state.reward);
}

std::size_t ucb_step(BanditState& state, Flavor flavor) {
    (void)flavor;
    const long tau = state.round + 1;
    const auto k = static_cast<long>(state.arms());
    if (tau <= 2 * k) return static_cast<std::size_t>(tau % k);
    const double eps = 1.0 / static_cast<double>(tau);
    std::vector<double> ucb(state.arms());
    for (std::size_t j = 0; j < ucb.size(); ++j)
        ucb[j] = state.reward[j] + ci_width(state.policy.ucb_a, eps, state.pulls[j]);
    return argmax_first(ucb);
}

bool correlation_significant(double rho_hat, long n, double level) {
    if (n < 3) return false;
    const double r = std::abs(rho_hat);
    if (r >= 1.0) return true;
    const double df = static_cast<double>(n - 2);
    const double t = r * std::sqrt(df) / std::sqrt(1.0 - r * r);
    boost::math::students_t dist(df);
    const double crit = boost::math::quantile(boost::math::complement(dist, level / 2.0));
    return t > crit;
}

std::size_t etc_step(BanditState& state) {
    if (state.committed) return state.commit_arm;
    const long tau = state.round + 1;
    const long first_slot = (tau - 1) * state.schedule.slots_per_round + 1;
    const auto joint_arms = static_cast<long>(state.arms()) - 1;
    if (first_slot <= state.policy.explore_until)
        return static_cast<std::size_t>(1 + (tau - 1) % joint_arms);

    const double threshold = std::sqrt(state.resources.alpha / (state.resources.alpha + 1.0));
    std::size_t best = 0;
    double best_rho = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 1; j < state.arms(); ++j) {
        const long n = state.store.count(SubsetKey{0, j});
        if (n < 3) continue;
        const double r = sample_correlation(state.store, j);
        if (!correlation_significant(r, n, state.policy.etc_level) || !(r > threshold)) continue;
        if (r > best_rho) {
            best_rho = r;
            best = j;
        }
    }
    state.committed = true;
    state.commit_arm = best;
    return best;
}

std::size_t select_arm(BanditState& state) {
    switch (state.policy.kind) {
    case PolicyKind::Double: return double_step(state, state.policy.flavor);
    case PolicyKind::Ucb: return ucb_step(state, state.policy.flavor);
    case PolicyKind::Etc: return etc_step(state);
    case PolicyKind::FixedArm: return state.policy.fixed_arm;
    }
    throw Error(ErrorCode::InvalidConfig, "unknown policy kind");
}

void collect_and_process(BanditState& state, std::size_t arm) {
    if (arm >= state.arms()) throw Error(ErrorCode::InvalidArgument, "arm out of range");
    const double sigma1 = state.model.sigma(0);
    if (arm == 0) {
        const SubsetKey key{0};
        for (long i = 0; i < state.schedule.marginals_per_pull; ++i)
            state.store.add(key, state.sampler.draw(key, state.rng));
        state.spent += static_cast<double>(state.schedule.marginals_per_pull);
        if (state.policy.flavor == Flavor::Z)
            state.reward[0] = arm_one_z(state.resources.alpha);
        else if (state.policy.arm_one_reward == ArmOneReward::PerRound)
            state.reward[0] = static_cast<double>(state.schedule.marginals_per_pull) / (sigma1 * sigma1);
        else
            state.reward[0] = 1.0;
    } else {
        const SubsetKey key{0, arm};
        state.store.add(key, state.sampler.draw(key, state.rng));
        state.spent += 1.0 + state.resources.alpha;
        if (state.store.count(key) >= 2)
            state.reward[arm] = state.policy.flavor == Flavor::F ? surrogate_fi(state.store, arm, sigma1)
                                                                 : surrogate_z(state.store, arm);
    }
    ++state.pulls[arm];
    state.estimate = fuse_unknown_correlations(state.store, state.model.means());
}

std::size_t play_round(BanditState& state) {
    const std::size_t arm = select_arm(state);
    collect_and_process(state, arm);
    ++state.round;
    return arm;
}

} // namespace collab
