#include <collab/cli.hpp>
#include <collab/config.hpp>
#include <collab/harness.hpp>
#include <collab/static_policy.hpp>

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iomanip>
#include <memory>
#include <optional>

namespace collab {

namespace {

// Codes that mean the inputs were wrong rather than the computation failing.
bool is_input_error(ErrorCode code) {
    switch (code) {
    case ErrorCode::InvalidConfig:
    case ErrorCode::InvalidArgument:
    case ErrorCode::DimensionMismatch:
    case ErrorCode::CorrelationOutOfRange:
    case ErrorCode::NonPositiveDefinite:
    case ErrorCode::InvalidSubset:
        return true;
    default:
        return false;
    }
}

std::string quoted(const std::string& s) {
    return s.find(',') == std::string::npos ? s : "\"" + s + "\"";
}

// Writes to `path`, or to `fallback` when the path is empty.
class OutputTarget {
public:
    OutputTarget(const std::string& path, std::ostream& fallback) {
        if (path.empty()) {
            stream_ = &fallback;
            return;
        }
        file_ = std::make_unique<std::ofstream>(path);
        if (!*file_) throw std::runtime_error("cannot open '" + path + "' for writing");
        stream_ = file_.get();
    }
    std::ostream& stream() { return *stream_; }

private:
    std::unique_ptr<std::ofstream> file_;
    std::ostream* stream_ = nullptr;
};

Json run_summary(const ExperimentConfig& config, const std::vector<PolicyRun>& runs, double seconds) {
    Json policies = Json::array();
    for (const auto& run : runs) {
        Json p{{"name", run.trajectory.policy},
               {"ledger_ok", run.ledger.holds(config.resources.alpha, config.resources.budget_e)},
               {"worst_excess", run.ledger.worst_excess(config.resources.alpha, config.resources.budget_e)}};
        const double final_mse = run.trajectory.final_mse();
        p["final_mse"] = std::isnan(final_mse) ? Json(nullptr) : Json(final_mse);
        if (!run.mean_pulls.empty()) p["mean_pulls"] = run.mean_pulls;
        policies.push_back(p);
    }
    return Json{{"config", config_to_json(config)},
                {"replication_seeds", replication_seeds(config)},
                {"seed_rule", "replication r uses splitmix64(seed ^ golden * (r + 1))"},
                {"wall_time_seconds", seconds},
                {"policies", policies}};
}

void write_results(const ExperimentConfig& config, const std::vector<PolicyRun>& runs, double seconds,
                   const std::string& output, std::ostream& out) {
    std::vector<MseTrajectory> trajectories;
    for (const auto& r : runs) trajectories.push_back(r.trajectory);
    {
        OutputTarget csv(output, out);
        write_mse_csv(csv.stream(), trajectories);
    }
    if (output.empty()) return;
    std::ofstream sidecar(output + ".json");
    if (!sidecar) throw std::runtime_error("cannot open '" + output + ".json' for writing");
    sidecar << run_summary(config, runs, seconds).dump(2) << '\n';

    out << std::left << std::setw(10) << "policy" << std::setw(16) << "final_mse" << "ledger\n";
    for (const auto& r : runs)
        out << std::setw(10) << r.trajectory.policy << std::setw(16) << r.trajectory.final_mse()
            << (r.ledger.holds(config.resources.alpha, config.resources.budget_e) ? "ok" : "VIOLATED") << '\n';
    out << "wrote " << output << " and " << output << ".json\n";
}

std::vector<PolicyRun> timed_run(const ExperimentConfig& config, double& seconds) {
    const auto start = std::chrono::steady_clock::now();
    auto runs = run_experiment(config);
    seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return runs;
}

} // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Resource-constrained collaborative mean estimation"};
    app.require_subcommand(1);

    double alpha = 2.0;
    double budget_e = 1.0;
    double rho = 0.5;
    double rho23 = 0.5;
    int resolution = 50;
    int points = 101;
    int scenario = 1;
    int max_size = 0;
    std::string config_path;
    std::string output;

    auto* threshold = app.add_subcommand("threshold", "critical correlation for joint sampling");
    threshold->add_option("--alpha", alpha, "communication cost per extra observation")->required();
    threshold->add_option("--config", config_path, "model file; adds per-pair comparisons");

    auto* regions = app.add_subcommand("regions", "three-sensor winning sample type grid (CSV)");
    regions->add_option("--alpha", alpha)->capture_default_str();
    regions->add_option("--rho23", rho23)->capture_default_str();
    regions->add_option("--resolution", resolution)->capture_default_str();
    regions->add_option("--output,-o", output, "CSV path (default: stdout)");

    auto* solve = app.add_subcommand("solve", "optimal static policy for a model file");
    solve->add_option("--scenario", scenario)->required()->check(CLI::Range(1, 2));
    solve->add_option("--config", config_path)->required();
    auto* solve_alpha = solve->add_option("--alpha", alpha, "overrides the file");
    auto* solve_e = solve->add_option("--E", budget_e, "overrides the file");
    solve->add_option("--max-subset-size", max_size, "0 means K")->capture_default_str();
    solve->add_option("--output,-o", output);

    auto* crb = app.add_subcommand("crb-curve", "expected bound versus p1 for two sensors (CSV)");
    crb->add_option("--scenario", scenario)->check(CLI::Range(1, 2))->capture_default_str();
    crb->add_option("--alpha", alpha)->capture_default_str();
    crb->add_option("--E", budget_e)->capture_default_str();
    crb->add_option("--rho", rho)->capture_default_str();
    crb->add_option("--points", points)->capture_default_str();
    crb->add_option("--output,-o", output);

    auto* simulate = app.add_subcommand("simulate", "run the policies of a config file");
    simulate->add_option("--config", config_path)->required();
    simulate->add_option("--output,-o", output, "overrides the file");
    std::optional<long> runs_override;
    std::optional<std::uint64_t> seed_override;
    std::optional<unsigned> threads_override;
    simulate->add_option("--runs", runs_override);
    simulate->add_option("--seed", seed_override);
    simulate->add_option("--threads", threads_override);

    auto* fig6 = app.add_subcommand("reproduce-fig6", "five-sensor adaptive comparison");
    std::string setting;
    Fig6Options fo;
    PolicySpec tuning;
    std::string arm_one = "constant";
    fig6->add_option("--setting", setting)->required()->check(CLI::IsMember({"a", "b", "c", "d"}));
    fig6->add_option("--runs", fo.runs)->capture_default_str();
    fig6->add_option("--seed", fo.seed)->capture_default_str();
    fig6->add_option("--horizon", fo.horizon_t)->capture_default_str();
    fig6->add_option("--step", fo.grid_step, "metric grid spacing in slots")->capture_default_str();
    fig6->add_option("--threads", fo.threads, "0 = all cores")->capture_default_str();
    fig6->add_option("--alpha", fo.alpha)->capture_default_str();
    fig6->add_option("--E", fo.budget_e)->capture_default_str();
    fig6->add_option("--ucb-a", tuning.ucb_a)->capture_default_str();
    fig6->add_option("--eta", tuning.eta)->capture_default_str();
    fig6->add_option("--explore-until", tuning.explore_until)->capture_default_str();
    fig6->add_option("--arm-one-reward", arm_one)->check(CLI::IsMember({"constant", "per_round"}));
    fig6->add_option("--output,-o", output, "CSV path (default: fig6_<setting>.csv)");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        out << std::setprecision(15);
        if (threshold->parsed()) {
            out << bivariate_threshold(alpha) << '\n';
            if (!config_path.empty()) {
                const auto model = model_from_json(read_json_file(config_path));
                for (const auto& c : threshold_report(model, alpha).comparisons)
                    out << "{" << c.first.label() << "} vs {" << c.second.label() << "}: winner {"
                        << c.winner.label() << "}, margin " << c.margin << '\n';
            }
        } else if (regions->parsed()) {
            OutputTarget target(output, out);
            emit_region_grid(target.stream(), alpha, rho23, resolution);
        } else if (solve->parsed()) {
            const Json j = read_json_file(config_path);
            const auto model = model_from_json(j);
            if (!*solve_alpha) alpha = j.contains("alpha") ? j.at("alpha").get<double>() : alpha;
            if (!*solve_e) {
                if (!j.contains("E")) throw Error(ErrorCode::InvalidConfig, "budget E missing from config and flags");
                budget_e = j.at("E").get<double>();
            }
            StaticPolicy policy;
            if (scenario == 1)
                policy = solve_scenario1_lp(model, alpha, budget_e, static_cast<std::size_t>(max_size)).policy;
            else
                policy = solve_scenario2(model, alpha, budget_e);
            OutputTarget target(output, out);
            auto& os = target.stream();
            os << std::setprecision(17) << "subset,probability,cost,fisher_information\n";
            for (const auto& [key, p] : policy.probs())
                os << quoted(key.label()) << ',' << p << ',' << cost_of_subset(key, alpha) << ','
                   << fi_subset(model, key) << '\n';
            os << "none," << policy.p_empty() << ",0,0\n";
            if (!output.empty())
                out << "expected information " << expected_fi(policy, model) << ", expected cost "
                    << policy.expected_cost(alpha) << '\n';
        } else if (crb->parsed()) {
            OutputTarget target(output, out);
            emit_crb_curve(target.stream(), scenario, alpha, budget_e, rho, points);
        } else if (simulate->parsed()) {
            ExperimentConfig config = load_config(config_path);
            if (runs_override) config.replications = *runs_override;
            if (seed_override) config.seed = *seed_override;
            if (threads_override) config.threads = *threads_override;
            if (!output.empty()) config.output = output;
            config.validate();
            double seconds = 0.0;
            const auto runs = timed_run(config, seconds);
            write_results(config, runs, seconds, config.output, out);
        } else if (fig6->parsed()) {
            ExperimentConfig config = fig6_config(setting[0], fo);
            for (auto& p : config.policies) {
                p.adaptive->ucb_a = tuning.ucb_a;
                p.adaptive->eta = tuning.eta;
                p.adaptive->explore_until = tuning.explore_until;
                p.adaptive->arm_one_reward = arm_one == "per_round" ? ArmOneReward::PerRound : ArmOneReward::Constant;
            }
            config.output = output.empty() ? "fig6_" + setting + ".csv" : output;
            double seconds = 0.0;
            const auto runs = timed_run(config, seconds);
            write_results(config, runs, seconds, config.output, out);
        }
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return is_input_error(e.code()) ? kExitConfig : kExitRuntime;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitOk;
}

int cli_main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return cli_main(args, std::cout, std::cerr);
}

} // namespace collab
