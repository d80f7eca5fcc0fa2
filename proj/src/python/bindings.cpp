#include <collab/bandit.hpp>
#include <collab/estimators.hpp>
#include <collab/fisher.hpp>
#include <collab/harness.hpp>
#include <collab/static_policy.hpp>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <map>
#include <string>

namespace py = pybind11;
using namespace collab;

namespace {

std::map<std::string, double> policy_dict(const StaticPolicy& policy) {
    std::map<std::string, double> out;
    for (const auto& [key, p] : policy.probs()) out[key.label()] = p;
    return out;
}

SubsetKey subset_from(const std::vector<std::size_t>& members) {
    return SubsetKey(std::span<const std::size_t>(members.data(), members.size()));
}

py::dict run_to_dict(const PolicyRun& run, const ResourceSpec& res) {
    std::vector<long> slots;
    std::vector<double> mse, se;
    for (const auto& p : run.trajectory.points) {
        slots.push_back(p.slot);
        mse.push_back(p.mse);
        se.push_back(p.std_error);
    }
    py::dict d;
    d["slots"] = slots;
    d["mse"] = mse;
    d["stderr"] = se;
    d["mean_pulls"] = run.mean_pulls;
    d["ledger_ok"] = run.ledger.holds(res.alpha, res.budget_e);
    return d;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Collaborative mean estimation under resource constraints";

    static py::exception<Error> error_type(m, "CollabError", PyExc_ValueError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            py::set_error(error_type, e.what());
        }
    });

    py::class_<GaussianModel>(m, "Model")
        .def(py::init([](std::vector<double> means, std::vector<double> std_devs,
                         std::vector<std::vector<double>> corr) {
                 return GaussianModel::validate(std::move(means), std::move(std_devs), corr);
             }),
             py::arg("means"), py::arg("std_devs"), py::arg("correlations"))
        .def_property_readonly("dim", &GaussianModel::dim)
        .def_property_readonly("means", &GaussianModel::means)
        .def_property_readonly("std_devs", &GaussianModel::std_devs)
        .def_property_readonly("covariance", &GaussianModel::covariance)
        .def("rho", &GaussianModel::rho);

    m.def("bivariate_threshold", &bivariate_threshold, py::arg("alpha"));
    m.def("fi_subset", [](const GaussianModel& model, const std::vector<std::size_t>& members) {
        return fi_subset(model, subset_from(members));
    }, py::arg("model"), py::arg("members"), "Fisher information about mu_0 of one joint sample (0-based members)");
    m.def("table3_policy", [](double alpha, double e, double rho) { return policy_dict(table3_policy(alpha, e, rho)); },
          py::arg("alpha"), py::arg("E"), py::arg("rho"));
    m.def("solve_scenario1_lp", [](const GaussianModel& model, double alpha, double e, std::size_t max_size) {
        const LpSolution sol = solve_scenario1_lp(model, alpha, e, max_size);
        py::dict d;
        d["policy"] = policy_dict(sol.policy);
        d["objective"] = sol.objective;
        d["crb"] = sol.objective > 0.0 ? 1.0 / sol.objective : INFINITY;
        d["vertices_examined"] = sol.vertices_examined;
        return d;
    }, py::arg("model"), py::arg("alpha"), py::arg("E"), py::arg("max_subset_size") = 0);
    m.def("crb_scenario2_bivariate", &crb_scenario2_bivariate, py::arg("p1"), py::arg("p2"), py::arg("p12"),
          py::arg("model"));
    m.def("trivariate_beats_bivariate", &trivariate_beats_bivariate);
    m.def("trivariate_beats_univariate", &trivariate_beats_univariate);
    m.def("best_trivariate_sample_type", [](double r12, double r13, double r23, double alpha) {
        return to_string(best_trivariate_sample_type(r12, r13, r23, alpha));
    });

    m.def("wilks_variance", &wilks_variance, py::arg("n1"), py::arg("n2"), py::arg("n12"), py::arg("rho"),
          py::arg("sigma1"));
    m.def("optimal_weights_bivariate", [](long n1, long n12, double rho) {
        return optimal_weights_bivariate(n1, n12, rho).g;
    });

    m.def("make_schedule", [](double alpha, double e, long horizon) {
        const RoundSchedule s = make_schedule(ResourceSpec::validate(alpha, e, horizon));
        return py::make_tuple(s.slots_per_round, s.marginals_per_pull, s.total_rounds);
    }, py::arg("alpha"), py::arg("E"), py::arg("T"), "(slots_per_round, marginals_per_pull, total_rounds)");
    m.def("ci_width", &ci_width, py::arg("a"), py::arg("epsilon"), py::arg("n"));
    m.def("arm_one_z", &arm_one_z, py::arg("alpha"));
    m.def("oracle_static_arm", &oracle_static_arm, py::arg("model"), py::arg("alpha"), py::arg("E"));

    m.def("region_grid", [](double alpha, double rho23, int resolution) {
        std::vector<std::tuple<double, double, std::string>> cells;
        for (const auto& c : region_grid(alpha, rho23, resolution))
            cells.emplace_back(c.rho12, c.rho13, to_string(c.winner));
        return cells;
    }, py::arg("alpha"), py::arg("rho23"), py::arg("resolution") = 50);
    m.def("crb_curve", [](int scenario, double alpha, double e, double rho, int points) {
        std::vector<std::tuple<double, double, double>> out;
        for (const auto& p : crb_curve(scenario, alpha, e, rho, points)) out.emplace_back(p.p1, p.p12, p.crb);
        return out;
    }, py::arg("scenario"), py::arg("alpha"), py::arg("E"), py::arg("rho"), py::arg("points") = 101);

    m.def("run_fig6", [](char setting, long runs, std::uint64_t seed, long horizon, long step, unsigned threads) {
        Fig6Options opt;
        opt.runs = runs;
        opt.seed = seed;
        opt.horizon_t = horizon;
        opt.grid_step = step;
        opt.threads = threads;
        const ExperimentConfig config = fig6_config(setting, opt);
        std::vector<PolicyRun> results;
        {
            py::gil_scoped_release release;
            results = run_experiment(config);
        }
        py::dict d;
        for (const auto& r : results) d[py::str(r.trajectory.policy)] = run_to_dict(r, config.resources);
        return d;
    }, py::arg("setting"), py::arg("runs") = 100, py::arg("seed") = 0, py::arg("horizon") = 5000,
       py::arg("step") = 10, py::arg("threads") = 0);
}
