#include <collab/config.hpp>

#include <fstream>

namespace collab {

namespace {

const Json& model_root(const Json& j) { return j.contains("model") ? j.at("model") : j; }

template <typename T>
T get_or(const Json& j, const char* key, T fallback) {
    return j.contains(key) ? j.at(key).get<T>() : fallback;
}

StaticPolicy static_from_json(const Json& probs) {
    if (!probs.is_object()) throw Error(ErrorCode::InvalidConfig, "'probs' must map subset labels to probabilities");
    std::map<SubsetKey, double> p;
    for (const auto& [label, value] : probs.items()) p[SubsetKey::parse_label(label)] += value.get<double>();
    return StaticPolicy::from_probs(std::move(p));
}

PolicyEntry policy_from_json(const Json& j, int scenario, const GaussianModel& model, const ResourceSpec& res) {
    const std::string name = j.is_string() ? j.get<std::string>() : j.at("name").get<std::string>();
    PolicyEntry entry;
    entry.name = name;
    if (j.is_object() && j.contains("probs")) {
        entry.fixed = static_from_json(j.at("probs"));
        return entry;
    }
    if (name == "optimal") {
        if (scenario == 1)
            entry.fixed = solve_scenario1_lp(model, res.alpha, res.budget_e).policy;
        else if (scenario == 2)
            entry.fixed = solve_scenario2(model, res.alpha, res.budget_e);
        else
            throw Error(ErrorCode::InvalidConfig, "'optimal' static policy needs scenario 1 or 2");
        return entry;
    }
    PolicySpec spec = PolicySpec::parse(name);
    if (j.is_object()) {
        spec.ucb_a = get_or(j, "a", spec.ucb_a);
        spec.eta = get_or(j, "eta", spec.eta);
        spec.explore_until = get_or(j, "explore_until", spec.explore_until);
        spec.etc_level = get_or(j, "level", spec.etc_level);
        const std::string reward = get_or<std::string>(j, "arm_one_reward", "constant");
        if (reward == "constant")
            spec.arm_one_reward = ArmOneReward::Constant;
        else if (reward == "per_round")
            spec.arm_one_reward = ArmOneReward::PerRound;
        else
            throw Error(ErrorCode::InvalidConfig, "arm_one_reward must be 'constant' or 'per_round'");
    }
    if (!(spec.eta > 1.0)) throw Error(ErrorCode::InvalidConfig, "eta must be > 1");
    if (!(spec.ucb_a >= 0.0)) throw Error(ErrorCode::InvalidConfig, "a must be >= 0");
    if (!(spec.etc_level > 0.0 && spec.etc_level < 1.0)) throw Error(ErrorCode::InvalidConfig, "level must be in (0, 1)");
    entry.adaptive = spec;
    return entry;
}

template <typename F>
auto as_config_error(F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const Json::exception& e) {
        throw Error(ErrorCode::InvalidConfig, e.what());
    } catch (const Error& e) {
        if (e.code() == ErrorCode::InvalidConfig) throw;
        throw Error(ErrorCode::InvalidConfig, e.what());
    }
}

} // namespace

GaussianModel model_from_json(const Json& j) {
    return as_config_error([&] {
        const Json& m = model_root(j);
        return GaussianModel::validate(m.at("means").get<std::vector<double>>(),
                                       m.at("std_devs").get<std::vector<double>>(),
                                       m.at("correlations").get<std::vector<std::vector<double>>>());
    });
}

ResourceSpec resources_from_json(const Json& j) {
    return as_config_error([&] {
        return ResourceSpec::validate(j.at("alpha").get<double>(), j.at("E").get<double>(), get_or<long>(j, "T", 1));
    });
}

ExperimentConfig config_from_json(const Json& j) {
    return as_config_error([&] {
        if (!j.is_object()) throw Error(ErrorCode::InvalidConfig, "config must be a JSON object");
        ExperimentConfig config(model_from_json(j), resources_from_json(j));
        config.scenario = get_or(j, "scenario", 3);
        config.replications = get_or(j, "replications", 100L);
        config.seed = get_or<std::uint64_t>(j, "seed", 0);
        config.threads = get_or(j, "threads", 0u);
        config.output = get_or<std::string>(j, "output", "");
        const long horizon = config.resources.horizon_t;
        if (!j.contains("metric_grid"))
            config.metric_grid = default_metric_grid(horizon, std::max(1L, horizon / 100));
        else if (j.at("metric_grid").is_object())
            config.metric_grid = default_metric_grid(horizon, j.at("metric_grid").at("step").get<long>());
        else
            config.metric_grid = j.at("metric_grid").get<std::vector<long>>();
        for (const auto& p : j.at("policies"))
            config.policies.push_back(policy_from_json(p, config.scenario, config.model, config.resources));
        config.validate();
        return config;
    });
}

Json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::InvalidConfig, "cannot open config '" + path + "'");
    try {
        return Json::parse(in);
    } catch (const Json::exception& e) {
        throw Error(ErrorCode::InvalidConfig, "'" + path + "': " + e.what());
    }
}

ExperimentConfig load_config(const std::string& path) { return config_from_json(read_json_file(path)); }

Json policy_to_json(const StaticPolicy& policy) {
    Json j = Json::object();
    for (const auto& [key, p] : policy.probs()) j[key.label()] = p;
    return j;
}

Json model_to_json(const GaussianModel& model) {
    std::vector<std::vector<double>> corr(model.dim(), std::vector<double>(model.dim()));
    for (std::size_t i = 0; i < model.dim(); ++i)
        for (std::size_t k = 0; k < model.dim(); ++k) corr[i][k] = model.rho(i, k);
    return Json{{"means", model.means()}, {"std_devs", model.std_devs()}, {"correlations", corr}};
}

Json config_to_json(const ExperimentConfig& config) {
    Json policies = Json::array();
    for (const auto& p : config.policies) {
        Json e{{"name", p.name}};
        if (p.fixed) {
            e["probs"] = policy_to_json(*p.fixed);
        } else {
            e["a"] = p.adaptive->ucb_a;
            e["eta"] = p.adaptive->eta;
            e["explore_until"] = p.adaptive->explore_until;
            e["level"] = p.adaptive->etc_level;
            e["arm_one_reward"] = p.adaptive->arm_one_reward == ArmOneReward::Constant ? "constant" : "per_round";
        }
        policies.push_back(e);
    }
    Json j = model_to_json(config.model);
    j["alpha"] = config.resources.alpha;
    j["E"] = config.resources.budget_e;
    j["T"] = config.resources.horizon_t;
    j["scenario"] = config.scenario;
    j["replications"] = config.replications;
    j["seed"] = config.seed;
    j["threads"] = config.threads;
    j["metric_grid"] = config.metric_grid;
    j["policies"] = policies;
    if (!config.output.empty()) j["output"] = config.output;
    return j;
}

} // namespace collab
