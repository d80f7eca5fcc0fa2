#include <collab/harness.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iomanip>
#include <limits>
#include <mutex>
#include <thread>

namespace collab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool undefined_estimate(const Error& e) {
    return e.code() == ErrorCode::NoSamples || e.code() == ErrorCode::Unidentifiable;
}

double subset_spend(SubsetKey key, double alpha) {
    return key.contains_target() ? cost_of_subset(key, alpha) : alpha * static_cast<double>(key.size());
}

// Squared errors of one replication on the metric grid; NaN where undefined.
using ErrorRow = std::vector<double>;

MseTrajectory aggregate(const std::string& label, const std::vector<long>& grid,
                        const std::vector<ErrorRow>& rows) {
    MseTrajectory traj;
    traj.policy = label;
    traj.points.reserve(grid.size());
    const auto r = static_cast<double>(rows.size());
    for (std::size_t g = 0; g < grid.size(); ++g) {
        MsePoint pt;
        pt.slot = grid[g];
        double sum = 0.0;
        for (const auto& row : rows) {
            if (std::isnan(row[g])) continue;
            ++pt.defined;
            sum += row[g];
        }
        if (pt.defined < static_cast<long>(rows.size())) {
            pt.mse = kNaN;
            pt.std_error = kNaN;
        } else {
            pt.mse = sum / r;
            double ss = 0.0;
            for (const auto& row : rows) ss += (row[g] - pt.mse) * (row[g] - pt.mse);
            pt.std_error = rows.size() > 1 ? std::sqrt(ss / (r - 1.0) / r) : 0.0;
        }
        traj.points.push_back(pt);
    }
    return traj;
}

std::optional<double> static_estimate(int scenario, const SampleStore& store, const GaussianModel& model) {
    try {
        switch (scenario) {
        case 1: return fuse_known_correlations(store, model).value;
        case 2:
            if (model.dim() == 2)
                return wilks_bivariate(store, model.sigma(0), model.sigma(1), model.rho(0, 1)).value;
            return mle_scenario2_general(store, model, 0).value;
        default: return fuse_unknown_correlations(store, model.means()).value;
        }
    } catch (const Error& e) {
        if (undefined_estimate(e)) return std::nullopt;
        throw;
    }
}

} // namespace

void ExperimentConfig::validate() const {
    if (replications < 1) throw Error(ErrorCode::InvalidConfig, "replications must be >= 1");
    if (scenario < 1 || scenario > 3) throw Error(ErrorCode::InvalidConfig, "scenario must be 1, 2 or 3");
    if (resources.horizon_t < 1) throw Error(ErrorCode::InvalidConfig, "T must be >= 1");
    if (metric_grid.empty()) throw Error(ErrorCode::InvalidConfig, "metric grid is empty");
    for (std::size_t i = 0; i < metric_grid.size(); ++i) {
        if (metric_grid[i] < 1 || metric_grid[i] > resources.horizon_t)
            throw Error(ErrorCode::InvalidConfig, "metric grid slot outside [1, T]");
        if (i > 0 && metric_grid[i] <= metric_grid[i - 1])
            throw Error(ErrorCode::InvalidConfig, "metric grid must be strictly increasing");
    }
    if (policies.empty()) throw Error(ErrorCode::InvalidConfig, "no policies");
    for (const auto& p : policies) {
        if (p.adaptive.has_value() == p.fixed.has_value())
            throw Error(ErrorCode::InvalidConfig, "policy '" + p.name + "' must be adaptive or static");
        if (p.adaptive) {
            if (scenario != 3)
                throw Error(ErrorCode::InvalidConfig, "adaptive policy '" + p.name + "' needs scenario 3");
            if (p.adaptive->kind == PolicyKind::FixedArm && p.adaptive->fixed_arm >= model.dim())
                throw Error(ErrorCode::InvalidConfig, "fixed arm outside [1, K] in '" + p.name + "'");
        } else {
            for (const auto& [key, prob] : p.fixed->probs()) {
                (void)prob;
                try {
                    key.check(model.dim());
                } catch (const Error& e) {
                    throw Error(ErrorCode::InvalidConfig, std::string("policy '") + p.name + "': " + e.what());
                }
            }
        }
    }
}

std::vector<long> default_metric_grid(long horizon_t, long step) {
    if (horizon_t < 1 || step < 1) throw Error(ErrorCode::InvalidArgument, "grid needs T >= 1 and step >= 1");
    std::vector<long> grid;
    for (long t = step; t <= horizon_t; t += step) grid.push_back(t);
    if (grid.empty() || grid.back() != horizon_t) grid.push_back(horizon_t);
    return grid;
}

bool MseTrajectory::empty() const {
    return std::none_of(points.begin(), points.end(), [](const MsePoint& p) { return !std::isnan(p.mse); });
}

double MseTrajectory::final_mse() const { return points.empty() ? kNaN : points.back().mse; }

void ResourceLedger::record(std::size_t replication, long slot, double cumulative) {
    auto& s = steps_.at(replication);
    if (!s.empty() && slot < s.back().first)
        throw Error(ErrorCode::InvalidArgument, "ledger slots must be nondecreasing");
    if (!s.empty() && s.back().first == slot)
        s.back().second = cumulative;
    else
        s.emplace_back(slot, cumulative);
}

double ResourceLedger::spend_at(std::size_t replication, long slot) const {
    const auto& s = steps_.at(replication);
    auto it = std::upper_bound(s.begin(), s.end(), slot,
                               [](long t, const std::pair<long, double>& step) { return t < step.first; });
    return it == s.begin() ? 0.0 : std::prev(it)->second;
}

double ResourceLedger::worst_excess(double alpha, double budget_e) const {
    // spend(t) - t E is largest on a step's first slot, so steps suffice.
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& s : steps_)
        for (const auto& [slot, spend] : s)
            worst = std::max(worst, spend - (static_cast<double>(slot) * budget_e + alpha + 1.0));
    return worst;
}

std::vector<std::uint64_t> replication_seeds(const ExperimentConfig& config) {
    std::vector<std::uint64_t> seeds(static_cast<std::size_t>(config.replications));
    for (std::size_t r = 0; r < seeds.size(); ++r) seeds[r] = derive_seed(config.seed, r);
    return seeds;
}

void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned w = 0; w < threads; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

PolicyRun run_static(const ExperimentConfig& config, const StaticPolicy& policy, const std::string& label) {
    config.validate();
    const auto& grid = config.metric_grid;
    const long horizon = config.resources.horizon_t;
    const double alpha = config.resources.alpha;
    const double truth = config.model.mean(0);

    std::vector<std::pair<SubsetKey, double>> cdf;
    double acc = 0.0;
    for (const auto& [key, p] : policy.probs()) {
        key.check(config.model.dim());
        acc += p;
        cdf.emplace_back(key, acc);
    }

    PolicyRun run;
    run.seeds = replication_seeds(config);
    run.ledger = ResourceLedger(run.seeds.size());
    std::vector<ErrorRow> rows(run.seeds.size(), ErrorRow(grid.size(), kNaN));

    parallel_for(run.seeds.size(), config.threads, [&](std::size_t r) {
        Rng rng(run.seeds[r]);
        Sampler sampler(config.model);
        SampleStore store;
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        double spent = 0.0;
        std::vector<std::pair<long, double>> steps;
        std::size_t g = 0;
        for (long t = 1; t <= horizon && g < grid.size(); ++t) {
            const double u = unit(rng);
            for (const auto& [key, c] : cdf) {
                if (u < c) {
                    store.add(key, sampler.draw(key, rng));
                    spent += subset_spend(key, alpha);
                    steps.emplace_back(t, spent);
                    break;
                }
            }
            if (t == grid[g]) {
                if (auto est = static_estimate(config.scenario, store, config.model))
                    rows[r][g] = (*est - truth) * (*est - truth);
                ++g;
            }
        }
        for (const auto& [slot, s] : steps) run.ledger.record(r, slot, s);
    });
    run.trajectory = aggregate(label, grid, rows);
    return run;
}

PolicyRun run_adaptive(const ExperimentConfig& config, const PolicySpec& policy) {
    config.validate();
    if (config.scenario != 3) throw Error(ErrorCode::InvalidConfig, "adaptive policies need scenario 3");
    const auto& grid = config.metric_grid;
    const double truth = config.model.mean(0);
    const RoundSchedule schedule = make_schedule(config.resources);
    const long rounds = schedule.playable_rounds(config.resources.horizon_t);

    PolicyRun run;
    run.seeds = replication_seeds(config);
    run.ledger = ResourceLedger(run.seeds.size());
    std::vector<ErrorRow> rows(run.seeds.size(), ErrorRow(grid.size(), kNaN));
    std::vector<std::vector<long>> pulls(run.seeds.size());

    parallel_for(run.seeds.size(), config.threads, [&](std::size_t r) {
        BanditState state(config.model, config.resources, policy, run.seeds[r]);
        std::size_t g = 0;
        auto record_until = [&](long last_slot) {
            for (; g < grid.size() && grid[g] <= last_slot; ++g) {
                if (!state.estimate) continue;
                const double err = state.estimate->value - truth;
                rows[r][g] = err * err;
            }
        };
        std::vector<std::pair<long, double>> steps;
        steps.reserve(static_cast<std::size_t>(rounds));
        for (long tau = 1; tau <= rounds; ++tau) {
            // Slots before this round's last slot still see the previous estimate.
            record_until(schedule.end_slot(tau) - 1);
            play_round(state);
            steps.emplace_back(schedule.end_slot(tau), state.spent);
        }
        record_until(config.resources.horizon_t);
        for (const auto& [slot, s] : steps) run.ledger.record(r, slot, s);
        pulls[r] = state.pulls;
    });

    run.trajectory = aggregate(policy.name(), grid, rows);
    run.mean_pulls.assign(config.model.dim(), 0.0);
    for (const auto& p : pulls)
        for (std::size_t j = 0; j < p.size(); ++j)
            run.mean_pulls[j] += static_cast<double>(p[j]) / static_cast<double>(pulls.size());
    return run;
}

std::vector<PolicyRun> run_experiment(const ExperimentConfig& config) {
    config.validate();
    std::vector<PolicyRun> runs;
    runs.reserve(config.policies.size());
    for (const auto& p : config.policies) {
        if (p.adaptive) {
            runs.push_back(run_adaptive(config, *p.adaptive));
            runs.back().trajectory.policy = p.name;
        } else {
            runs.push_back(run_static(config, *p.fixed, p.name));
        }
    }
    return runs;
}

std::size_t oracle_static_arm(const GaussianModel& model, double alpha, double budget_e) {
    const RoundSchedule schedule = make_schedule(ResourceSpec{alpha, budget_e, 1});
    const double s1 = model.sigma(0);
    std::size_t best = 0;
    double best_reward = static_cast<double>(schedule.marginals_per_pull) / (s1 * s1);
    for (std::size_t j = 1; j < model.dim(); ++j) {
        const double r = model.rho(0, j);
        const double reward = 1.0 / ((1.0 - r * r) * s1 * s1);
        if (reward > best_reward * (1.0 + 1e-12)) {
            best = j;
            best_reward = reward;
        }
    }
    return best;
}

std::vector<RegionCell> region_grid(double alpha, double rho23, int resolution) {
    if (resolution < 10) throw Error(ErrorCode::InvalidArgument, "resolution must be >= 10");
    if (!(alpha >= 0.0)) throw Error(ErrorCode::InvalidArgument, "alpha must be >= 0");
    if (!(rho23 >= 0.0 && rho23 < 1.0)) throw Error(ErrorCode::CorrelationOutOfRange, "rho23 outside [0, 1)");
    std::vector<RegionCell> cells;
    cells.reserve(static_cast<std::size_t>(resolution) * static_cast<std::size_t>(resolution));
    for (int i = 0; i < resolution; ++i) {
        for (int k = 0; k < resolution; ++k) {
            RegionCell cell;
            cell.rho12 = static_cast<double>(i) / resolution;
            cell.rho13 = static_cast<double>(k) / resolution;
            cell.winner = best_trivariate_sample_type(cell.rho12, cell.rho13, rho23, alpha);
            if (cell.winner != SampleType::Invalid) {
                const double a = cell.rho12, b = cell.rho13, c = rho23;
                const double det = 1.0 + 2.0 * a * b * c - a * a - b * b - c * c;
                cell.per_resource[0] = 1.0;
                cell.per_resource[1] = 1.0 / ((1.0 - a * a) * (1.0 + alpha));
                cell.per_resource[2] = 1.0 / ((1.0 - b * b) * (1.0 + alpha));
                cell.per_resource[3] = (1.0 - c * c) / (det * (1.0 + 2.0 * alpha));
            }
            cells.push_back(cell);
        }
    }
    return cells;
}

void emit_region_grid(std::ostream& out, double alpha, double rho23, int resolution) {
    const auto cells = region_grid(alpha, rho23, resolution);
    out << "rho12,rho13,winner,fi_univariate,fi_bivariate_12,fi_bivariate_13,fi_trivariate\n";
    out << std::setprecision(17);
    for (const auto& c : cells) {
        out << c.rho12 << ',' << c.rho13 << ',' << to_string(c.winner);
        for (double v : c.per_resource) {
            out << ',';
            if (c.winner != SampleType::Invalid) out << v;
        }
        out << '\n';
    }
}

std::vector<CrbPoint> crb_curve(int scenario, double alpha, double budget_e, double rho, int points) {
    if (scenario != 1 && scenario != 2) throw Error(ErrorCode::InvalidArgument, "scenario must be 1 or 2");
    if (points < 2) throw Error(ErrorCode::InvalidArgument, "need at least two grid points");
    if (!(alpha >= 0.0) || !(budget_e > 0.0)) throw Error(ErrorCode::InvalidArgument, "need alpha >= 0, E > 0");
    const GaussianModel model = GaussianModel::validate({0.0, 0.0}, {1.0, 1.0},
                                                        std::vector<std::vector<double>>{{1.0, rho}, {rho, 1.0}});
    std::vector<CrbPoint> curve;
    curve.reserve(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i) {
        CrbPoint pt;
        pt.p1 = static_cast<double>(i) / (points - 1);
        pt.p12 = std::min(1.0 - pt.p1, (budget_e - pt.p1) / (alpha + 1.0));
        if (pt.p12 < 0.0) {
            pt.feasible = false;
            pt.crb = std::numeric_limits<double>::infinity();
        } else if (scenario == 1) {
            const double fi = pt.p1 * fi_subset(model, SubsetKey{0}) + pt.p12 * fi_subset(model, SubsetKey{0, 1});
            pt.crb = fi > 0.0 ? 1.0 / fi : std::numeric_limits<double>::infinity();
        } else {
            pt.crb = crb_scenario2_bivariate(pt.p1, 0.0, pt.p12, model);
        }
        curve.push_back(pt);
    }
    return curve;
}

void emit_crb_curve(std::ostream& out, int scenario, double alpha, double budget_e, double rho, int points) {
    const auto curve = crb_curve(scenario, alpha, budget_e, rho, points);
    out << "p1,p12,crb,feasible\n" << std::setprecision(17);
    for (const auto& p : curve) out << p.p1 << ',' << p.p12 << ',' << p.crb << ',' << (p.feasible ? 1 : 0) << '\n';
}

void write_mse_csv(std::ostream& out, const std::vector<MseTrajectory>& trajectories) {
    out << "slot,policy,mse,stderr\n" << std::setprecision(17);
    if (trajectories.empty()) return;
    const std::size_t n = trajectories.front().points.size();
    for (std::size_t i = 0; i < n; ++i) {
        for (const auto& t : trajectories) {
            const MsePoint& p = t.points.at(i);
            out << p.slot << ',' << t.policy << ',';
            if (std::isnan(p.mse))
                out << "nan,nan\n";
            else
                out << p.mse << ',' << p.std_error << '\n';
        }
    }
}

std::vector<double> fig6_target_correlations(char setting) {
    switch (setting) {
    case 'a': return {0.2, 0.2, 0.2, 0.2};
    case 'b': return {0.6, 0.6, 0.6, 0.6};
    case 'c': return {0.95, 0.2, 0.2, 0.2};
    case 'd': return {0.95, 0.95, 0.95, 0.95};
    default: throw Error(ErrorCode::InvalidConfig, std::string("unknown setting '") + setting + "'");
    }
}

GaussianModel factor_model(const std::vector<double>& target_correlations, double mean, double sigma) {
    const std::size_t k = target_correlations.size() + 1;
    std::vector<double> lambda(k, 1.0);
    for (std::size_t j = 1; j < k; ++j) lambda[j] = target_correlations[j - 1];
    std::vector<std::vector<double>> corr(k, std::vector<double>(k, 1.0));
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j)
            if (i != j) corr[i][j] = lambda[i] * lambda[j];
    return GaussianModel::validate(std::vector<double>(k, mean), std::vector<double>(k, sigma), corr);
}

GaussianModel fig6_model(char setting) { return factor_model(fig6_target_correlations(setting)); }

std::vector<std::string> fig6_policy_names(std::size_t sensors) {
    std::vector<std::string> names{"DOUBLE-F", "DOUBLE-Z", "UCB-F", "UCB-Z", "ETC"};
    for (std::size_t j = 1; j <= sensors; ++j) names.push_back("ARM-" + std::to_string(j));
    return names;
}

ExperimentConfig fig6_config(char setting, const Fig6Options& options) {
    ExperimentConfig config(fig6_model(setting),
                            ResourceSpec::validate(options.alpha, options.budget_e, options.horizon_t));
    config.scenario = 3;
    config.replications = options.runs;
    config.seed = options.seed;
    config.threads = options.threads;
    config.metric_grid = default_metric_grid(options.horizon_t, options.grid_step);
    for (const auto& name : fig6_policy_names(config.model.dim()))
        config.policies.push_back(PolicyEntry{name, PolicySpec::parse(name), std::nullopt});
    return config;
}

} // namespace collab
