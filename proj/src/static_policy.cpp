#include <collab/static_policy.hpp>

#include <cmath>
#include <limits>

namespace collab {

double bivariate_threshold(double alpha) {
    if (!(alpha >= 0.0)) throw Error(ErrorCode::InvalidArgument, "alpha must be >= 0");
    return std::sqrt(alpha / (alpha + 1.0));
}

ThresholdReport threshold_report(const GaussianModel& model, double alpha) {
    ThresholdReport report;
    report.alpha = alpha;
    report.rho_star = bivariate_threshold(alpha);
    const SubsetKey marginal{0};
    const double per_marginal = fi_subset(model, marginal) / cost_of_subset(marginal, alpha);
    for (std::size_t j = 1; j < model.dim(); ++j) {
        const SubsetKey joint{0, j};
        const double per_joint = fi_subset(model, joint) / cost_of_subset(joint, alpha);
        SubsetComparison cmp{joint, marginal, {}, per_joint - per_marginal};
        // Equal per-resource information goes to the joint sample, as in table3_policy.
        cmp.winner = cmp.margin >= 0.0 ? joint : marginal;
        report.comparisons.push_back(cmp);
    }
    return report;
}

namespace {

void check_trivariate(double r12, double r13, double r23) {
    for (double r : {r12, r13, r23})
        if (!(r >= 0.0 && r < 1.0))
            throw Error(ErrorCode::CorrelationOutOfRange, "correlation outside [0, 1)");
    const double det = 1.0 + 2.0 * r12 * r13 * r23 - r12 * r12 - r13 * r13 - r23 * r23;
    if (!(det > kPdTolerance))
        throw Error(ErrorCode::NonPositiveDefinite, "trivariate correlation matrix not PD");
}

} // namespace

bool trivariate_beats_bivariate(double rho12, double rho13, double rho23, double alpha) {
    check_trivariate(rho12, rho13, rho23);
    const double a = rho12, b = rho13, c = rho23;
    const double num = b * b + a * a * c * c - 2.0 * a * b * c;
    const double den = 1.0 + 4.0 * a * b * c - a * a - c * c - a * a * c * c - 2.0 * b * b;
    return alpha * den < num;
}

bool trivariate_beats_bivariate_13(double rho12, double rho13, double rho23, double alpha) {
    return trivariate_beats_bivariate(rho13, rho12, rho23, alpha);
}

bool trivariate_beats_univariate(double rho12, double rho13, double rho23, double alpha) {
    check_trivariate(rho12, rho13, rho23);
    const double a = rho12, b = rho13, c = rho23;
    const double num = a * a + b * b - 2.0 * a * b * c;
    const double det = 1.0 + 2.0 * a * b * c - a * a - b * b - c * c;
    return alpha * 2.0 * det < num;
}

StaticPolicy table3_policy(double alpha, double budget_e, double rho12) {
    if (!(alpha >= 0.0)) throw Error(ErrorCode::InvalidArgument, "alpha must be >= 0");
    if (!(budget_e > 0.0)) throw Error(ErrorCode::InvalidArgument, "E must be > 0");
    const SubsetKey marginal{0};
    const SubsetKey joint{0, 1};
    const double joint_cost = 1.0 + alpha;
    std::map<SubsetKey, double> probs;
    if (rho12 * rho12 >= alpha / (alpha + 1.0)) {
        probs[joint] = budget_e >= joint_cost ? 1.0 : budget_e / joint_cost;
    } else if (budget_e <= 1.0) {
        probs[marginal] = budget_e;
    } else if (budget_e < joint_cost) {
        probs[marginal] = (joint_cost - budget_e) / alpha;
        probs[joint] = (budget_e - 1.0) / alpha;
    } else {
        probs[joint] = 1.0;
    }
    return StaticPolicy::from_probs(std::move(probs));
}

LpSolution solve_scenario1_lp(const GaussianModel& model, double alpha, double budget_e,
                              std::size_t max_subset_size) {
    const std::size_t k = model.dim();
    if (k > 12) throw Error(ErrorCode::InvalidArgument, "LP solver supports K <= 12");
    if (!(alpha >= 0.0)) throw Error(ErrorCode::InvalidArgument, "alpha must be >= 0");
    if (!(budget_e > 0.0)) throw Error(ErrorCode::Infeasible, "E must be > 0");
    if (max_subset_size == 0 || max_subset_size > k) max_subset_size = k;

    struct Column {
        SubsetKey key;
        double info;
        double cost;
    };
    std::vector<Column> cols;
    const std::uint32_t others = (1u << (k - 1)) - 1u;
    for (std::uint32_t rest = 0; rest <= others; ++rest) {
        const SubsetKey key = SubsetKey::from_mask((rest << 1) | 1u);
        if (key.size() > max_subset_size) continue;
        cols.push_back({key, fi_subset(model, key), cost_of_subset(key, alpha)});
    }

    struct Vertex {
        std::size_t a, b;  // b == a for single-coordinate vertices
        double pa, pb;
        double objective;
        double collaboration;
    };
    auto collab_mass = [&](std::size_t i, double p) {
        return p * static_cast<double>(cols[i].key.size() - 1);
    };

    std::vector<Vertex> vertices;
    // Single-coordinate vertices: p_i limited by whichever constraint binds first.
    for (std::size_t i = 0; i < cols.size(); ++i) {
        const double p = std::min(1.0, budget_e / cols[i].cost);
        vertices.push_back({i, i, p, 0.0, p * cols[i].info, collab_mass(i, p)});
    }
    // Two-coordinate vertices with both constraints tight.
    for (std::size_t i = 0; i < cols.size(); ++i) {
        for (std::size_t j = i + 1; j < cols.size(); ++j) {
            const double ci = cols[i].cost, cj = cols[j].cost;
            // cost difference written as alpha * (size difference) so that the
            // rational vertex coordinates are reproduced exactly in doubles.
            const double dsize = static_cast<double>(cols[j].key.size()) -
                                 static_cast<double>(cols[i].key.size());
            const double dcost = alpha * dsize;
            if (dcost == 0.0) continue;
            const double pj = (budget_e - ci) / dcost;
            const double pi = (cj - budget_e) / dcost;
            if (!(pi > 0.0 && pj > 0.0)) continue;
            vertices.push_back({i, j, pi, pj, pi * cols[i].info + pj * cols[j].info,
                                collab_mass(i, pi) + collab_mass(j, pj)});
        }
    }
    if (vertices.empty()) throw Error(ErrorCode::Infeasible, "no feasible vertex");

    double best_obj = -std::numeric_limits<double>::infinity();
    for (const auto& v : vertices) best_obj = std::max(best_obj, v.objective);
    const double tol = 1e-12 * std::max(1.0, std::abs(best_obj));

    const Vertex* chosen = nullptr;
    for (const auto& v : vertices) {
        if (v.objective < best_obj - tol) continue;
        if (!chosen || v.collaboration > chosen->collaboration + 1e-15) chosen = &v;
    }

    std::map<SubsetKey, double> probs;
    probs[cols[chosen->a].key] += chosen->pa;
    if (chosen->b != chosen->a) probs[cols[chosen->b].key] += chosen->pb;

    LpSolution sol;
    sol.policy = StaticPolicy::from_probs(std::move(probs));
    sol.objective = expected_fi(sol.policy, model);
    const double mass = 1.0 - sol.policy.p_empty();
    sol.mass_constraint_active = std::abs(mass - 1.0) <= 1e-12;
    sol.budget_constraint_active = std::abs(sol.policy.expected_cost(alpha) - budget_e) <= 1e-12 * std::max(1.0, budget_e);
    sol.certificate_gap = best_obj - sol.objective;
    sol.vertices_examined = vertices.size();
    return sol;
}

StaticPolicy solve_scenario2(const GaussianModel& model, double alpha, double budget_e) {
    (void)model;
    if (!(alpha >= 0.0)) throw Error(ErrorCode::InvalidArgument, "alpha must be >= 0");
    if (!(budget_e > 0.0)) throw Error(ErrorCode::InvalidArgument, "E must be > 0");
    return StaticPolicy::from_probs({{SubsetKey{0}, std::min(budget_e, 1.0)}});
}

double crb_scenario2_bivariate(double p1, double p2, double p12, const GaussianModel& model) {
    for (double p : {p1, p2, p12})
        if (!(p >= 0.0 && p <= 1.0))
            throw Error(ErrorCode::InvalidArgument, "probability outside [0, 1]");
    const double s1 = model.sigma(0);
    const double r = model.rho(0, 1);
    const double q = 1.0 - r * r;
    if (p1 == 0.0 && p12 == 0.0) return std::numeric_limits<double>::infinity();
    // mu_2 unobserved: the FIM is singular but mu_1 decouples.
    if (p2 == 0.0 && p12 == 0.0) return s1 * s1 / p1;
    const double det_num = p12 * p12 + p1 * p12 + p2 * p12 + p1 * p2 * q;
    if (!(det_num > 0.0)) return std::numeric_limits<double>::infinity();
    return (p2 * q + p12) * s1 * s1 / det_num;
}

std::string to_string(SampleType type) {
    switch (type) {
    case SampleType::Univariate: return "univariate";
    case SampleType::Bivariate12: return "bivariate-12";
    case SampleType::Bivariate13: return "bivariate-13";
    case SampleType::Trivariate: return "trivariate";
    case SampleType::Invalid: return "invalid";
    }
    return "invalid";
}

SampleType best_trivariate_sample_type(double rho12, double rho13, double rho23, double alpha) {
    const double det = 1.0 + 2.0 * rho12 * rho13 * rho23 - rho12 * rho12 - rho13 * rho13 - rho23 * rho23;
    if (!(det > kPdTolerance)) return SampleType::Invalid;
    const double per[4] = {
        1.0,
        1.0 / ((1.0 - rho12 * rho12) * (1.0 + alpha)),
        1.0 / ((1.0 - rho13 * rho13) * (1.0 + alpha)),
        (1.0 - rho23 * rho23) / (det * (1.0 + 2.0 * alpha)),
    };
    int best = 0;
    for (int i = 1; i < 4; ++i)
        if (per[i] > per[best]) best = i;
    return static_cast<SampleType>(best);
}

} // namespace collab
