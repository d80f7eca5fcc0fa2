#include <collab/fisher.hpp>

#include <cmath>
#include <limits>

namespace collab {

StaticPolicy StaticPolicy::from_probs(std::map<SubsetKey, double> probs) {
    StaticPolicy policy;
    double total = 0.0;
    for (auto it = probs.begin(); it != probs.end();) {
        if (it->first.empty()) throw Error(ErrorCode::InvalidSubset, "empty subset in policy");
        const double p = it->second;
        if (!(p >= 0.0 && p <= 1.0 + 1e-12))
            throw Error(ErrorCode::InvalidArgument, "probability outside [0, 1]");
        total += p;
        if (p == 0.0)
            it = probs.erase(it);
        else
            ++it;
    }
    if (total > 1.0 + 1e-12)
        throw Error(ErrorCode::InvalidArgument, "policy probabilities sum past 1");
    policy.probs_ = std::move(probs);
    policy.p_empty_ = std::max(0.0, 1.0 - total);
    return policy;
}

double StaticPolicy::prob(SubsetKey subset) const {
    auto it = probs_.find(subset);
    return it == probs_.end() ? 0.0 : it->second;
}

double StaticPolicy::expected_cost(double alpha) const {
    double cost = 0.0;
    for (const auto& [key, p] : probs_) {
        const double c = key.contains_target() ? cost_of_subset(key, alpha)
                                               : alpha * static_cast<double>(key.size());
        cost += p * c;
    }
    return cost;
}

bool StaticPolicy::feasible(double alpha, double budget_e, double tol) const {
    return expected_cost(alpha) <= budget_e + tol;
}

double fi_marginal(const GaussianModel& model) {
    const double s = model.sigma(0);
    return 1.0 / (s * s);
}

double fi_subset(const GaussianModel& model, SubsetKey subset) {
    subset.check(model.dim());
    if (!subset.contains_target()) return 0.0;
    const auto m = subset.members();
    const double s0 = model.sigma(0);
    switch (m.size()) {
    case 1:
        return 1.0 / (s0 * s0);
    case 2: {
        const double r = model.rho(0, m[1]);
        return 1.0 / ((1.0 - r * r) * s0 * s0);
    }
    case 3: {
        const double r12 = model.rho(0, m[1]);
        const double r13 = model.rho(0, m[2]);
        const double r23 = model.rho(m[1], m[2]);
        const double det = 1.0 + 2.0 * r12 * r13 * r23 - r12 * r12 - r13 * r13 - r23 * r23;
        if (!(det > 0.0)) throw Error(ErrorCode::SingularCovariance, "trivariate covariance singular");
        return (1.0 - r23 * r23) / (det * s0 * s0);
    }
    default: {
        const Eigen::MatrixXd cov = subset_covariance(model, subset);
        Eigen::LLT<Eigen::MatrixXd> llt(cov);
        if (llt.info() != Eigen::Success)
            throw Error(ErrorCode::SingularCovariance, "subset covariance not positive definite");
        Eigen::VectorXd e = Eigen::VectorXd::Zero(cov.rows());
        e(0) = 1.0;
        return llt.solve(e)(0);
    }
    }
}

double expected_fi(const StaticPolicy& policy, const GaussianModel& model) {
    double total = 0.0;
    for (const auto& [key, p] : policy.probs()) total += p * fi_subset(model, key);
    return total;
}

Eigen::MatrixXd fim_scenario2(const StaticPolicy& policy, const GaussianModel& model) {
    const auto k = static_cast<Eigen::Index>(model.dim());
    Eigen::MatrixXd fim = Eigen::MatrixXd::Zero(k, k);
    for (const auto& [key, p] : policy.probs()) {
        const Eigen::MatrixXd cov = subset_covariance(model, key);
        Eigen::LLT<Eigen::MatrixXd> llt(cov);
        if (llt.info() != Eigen::Success)
            throw Error(ErrorCode::SingularCovariance, "subset covariance not positive definite");
        const Eigen::MatrixXd info = llt.solve(Eigen::MatrixXd::Identity(cov.rows(), cov.cols()));
        const auto idx = key.members();
        for (std::size_t r = 0; r < idx.size(); ++r)
            for (std::size_t c = 0; c < idx.size(); ++c)
                fim(static_cast<Eigen::Index>(idx[r]), static_cast<Eigen::Index>(idx[c])) +=
                    p * info(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
    }
    return fim;
}

double crb_entry(const Eigen::MatrixXd& fim, std::size_t index) {
    const auto i = static_cast<Eigen::Index>(index);
    if (fim.rows() != fim.cols() || i >= fim.rows())
        throw Error(ErrorCode::DimensionMismatch, "crb_entry index outside FIM");
    const Eigen::MatrixXd sym = 0.5 * (fim + fim.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
    const Eigen::VectorXd& lambda = eig.eigenvalues();
    const Eigen::MatrixXd& v = eig.eigenvectors();
    const double scale = std::max(lambda.cwiseAbs().maxCoeff(), 1e-300);
    const double zero_tol = 1e-12 * scale;

    double value = 0.0;
    double null_weight = 0.0;
    for (Eigen::Index j = 0; j < lambda.size(); ++j) {
        const double w = v(i, j) * v(i, j);
        if (lambda(j) > zero_tol)
            value += w / lambda(j);
        else
            null_weight += w;
    }
    // e_index must lie in the range of the FIM for the coordinate to be identifiable.
    if (null_weight > 1e-9 || fim.isZero(0.0)) return std::numeric_limits<double>::infinity();
    return value;
}

} // namespace collab
