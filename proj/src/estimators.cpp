#include <collab/estimators.hpp>
#include <collab/fisher.hpp>

#include <cmath>
#include <limits>
#include <numeric>

namespace collab {

std::string to_string(EstimatorKind kind) {
    switch (kind) {
    case EstimatorKind::SampleMean: return "sample_mean";
    case EstimatorKind::UmvueBivariate: return "umvue_bivariate";
    case EstimatorKind::UmvueTrivariate: return "umvue_trivariate";
    case EstimatorKind::UmvueSubset: return "umvue_subset";
    case EstimatorKind::Wilks: return "wilks_bivariate";
    case EstimatorKind::Bishwal: return "bishwal_bivariate";
    case EstimatorKind::JointSampleMean: return "joint_sample_mean";
    case EstimatorKind::KalmanFused: return "kalman_fused";
    case EstimatorKind::MleScenario1: return "mle_scenario1";
    case EstimatorKind::MleScenario2: return "mle_scenario2";
    }
    return "unknown";
}

namespace {

const SubsetStats& require(const SampleStore& store, SubsetKey key, long min_count = 1) {
    const SubsetStats* s = store.find(key);
    if (!s || s->count() < min_count) {
        const auto code = min_count > 1 ? ErrorCode::InsufficientSamples : ErrorCode::NoSamples;
        throw Error(code, "need " + std::to_string(min_count) + " samples of {" + key.label() + "}");
    }
    return *s;
}

double mean_or_zero(const SampleStore& store, SubsetKey key) {
    const SubsetStats* s = store.find(key);
    return s ? s->mean(0) : 0.0;
}

// Estimate of the mean of sensor a in a two-sensor world with both means
// unknown. Marginal counts/means for a and b, joint count/means.
struct TwoSensorData {
    long n_a = 0, n_b = 0, n_ab = 0;
    double marg_a = 0.0, marg_b = 0.0;
    double joint_a = 0.0, joint_b = 0.0;
};

Estimate two_sensor_mle(const TwoSensorData& d, double sigma_a, double sigma_b, double rho) {
    const double q = 1.0 - rho * rho;
    Estimate est;
    est.source = EstimatorKind::Wilks;
    if (d.n_ab == 0) {
        est.value = d.marg_a;
        est.variance = sigma_a * sigma_a / static_cast<double>(d.n_a);
        return est;
    }
    const double n_a = static_cast<double>(d.n_a);
    const double n_b = static_cast<double>(d.n_b);
    const double n_ab = static_cast<double>(d.n_ab);
    const double n = n_a + n_b + n_ab;
    const double delta = n_ab * n + n_a * n_b * q;
    const double w_marg = (n_ab * n_a + n_a * n_b * q) / delta;
    const double w_joint = (n_ab * n_ab + n_ab * n_b) / delta;
    double adjusted = d.joint_a;
    if (d.n_b > 0) {
        const double shrink = n_ab * n_b / (n_ab * n_ab + n_ab * n_b);
        // The correction enters with a plus sign: the joint x_b mean above the
        // marginal one signals the joint x_a mean is high too.
        adjusted += shrink * (rho * sigma_a / sigma_b) * (d.marg_b - d.joint_b);
    }
    est.value = (d.n_a > 0 ? w_marg * d.marg_a : 0.0) + w_joint * adjusted;
    est.variance = (n_ab + n_b * q) * sigma_a * sigma_a / delta;
    return est;
}

TwoSensorData two_sensor_data(const SampleStore& store, bool swap) {
    const SubsetKey m0{0}, m1{1}, joint{0, 1};
    TwoSensorData d;
    d.n_a = store.count(swap ? m1 : m0);
    d.n_b = store.count(swap ? m0 : m1);
    d.n_ab = store.count(joint);
    d.marg_a = mean_or_zero(store, swap ? m1 : m0);
    d.marg_b = mean_or_zero(store, swap ? m0 : m1);
    if (const SubsetStats* s = store.find(joint)) {
        d.joint_a = s->mean(swap ? 1 : 0);
        d.joint_b = s->mean(swap ? 0 : 1);
    }
    return d;
}

} // namespace

Estimate sample_mean(const SampleStore& store, const GaussianModel& model, std::size_t sensor) {
    const SubsetKey key{sensor};
    const SubsetStats& s = require(store, key);
    Estimate est;
    est.value = s.mean(0);
    const double sigma = model.sigma(sensor);
    est.variance = sigma * sigma / static_cast<double>(s.count());
    est.source = EstimatorKind::SampleMean;
    est.subset = key;
    return est;
}

Estimate umvue_bivariate(const SampleStore& store, const GaussianModel& model, std::size_t j) {
    if (j == 0 || j >= model.dim()) throw Error(ErrorCode::InvalidSubset, "partner sensor out of range");
    const SubsetKey key{0, j};
    const SubsetStats& s = require(store, key);
    const double r = model.rho(0, j);
    const double s1 = model.sigma(0);
    const double beta = r * s1 / model.sigma(j);
    Estimate est;
    est.value = s.mean(0) - beta * (s.mean(1) - model.mean(j));
    est.variance = s1 * s1 * (1.0 - r * r) / static_cast<double>(s.count());
    est.source = EstimatorKind::UmvueBivariate;
    est.subset = key;
    return est;
}

Estimate umvue_trivariate(const SampleStore& store, const GaussianModel& model, std::size_t j,
                          std::size_t k) {
    if (j == 0 || k == 0 || j == k || j >= model.dim() || k >= model.dim())
        throw Error(ErrorCode::InvalidSubset, "trivariate partners must be distinct non-target sensors");
    const SubsetKey key{0, j, k};
    const SubsetStats& s = require(store, key);
    const double r12 = model.rho(0, j);
    const double r13 = model.rho(0, k);
    const double r23 = model.rho(j, k);
    const double q23 = 1.0 - r23 * r23;
    if (!(q23 > 0.0)) throw Error(ErrorCode::DegenerateRho23, "rho(j,k)^2 == 1");
    const double s1 = model.sigma(0);
    const double xj = s.mean_of(j);
    const double xk = s.mean_of(k);
    const double bj = (r12 - r13 * r23) * s1 / (q23 * model.sigma(j));
    const double bk = (r13 - r12 * r23) * s1 / (q23 * model.sigma(k));
    Estimate est;
    est.value = s.mean_of(0) - bj * (xj - model.mean(j)) - bk * (xk - model.mean(k));
    est.variance = 1.0 / (static_cast<double>(s.count()) * fi_subset(model, key));
    est.source = EstimatorKind::UmvueTrivariate;
    est.subset = key;
    return est;
}

Estimate umvue_subset(const SampleStore& store, const GaussianModel& model, SubsetKey subset) {
    subset.check(model.dim());
    if (!subset.contains_target())
        throw Error(ErrorCode::InvalidSubset, "subset must contain sensor 0");
    const SubsetStats& s = require(store, subset);
    const Eigen::MatrixXd cov = subset_covariance(model, subset);
    const Eigen::Index m = cov.rows();
    Estimate est;
    est.source = EstimatorKind::UmvueSubset;
    est.subset = subset;
    est.value = s.mean(0);
    if (m > 1) {
        const auto idx = subset.members();
        Eigen::VectorXd resid(m - 1);
        for (Eigen::Index i = 1; i < m; ++i)
            resid(i - 1) = s.mean(static_cast<std::size_t>(i)) - model.mean(idx[static_cast<std::size_t>(i)]);
        const Eigen::MatrixXd rest = cov.bottomRightCorner(m - 1, m - 1);
        const Eigen::VectorXd cross = cov.block(1, 0, m - 1, 1);
        Eigen::LLT<Eigen::MatrixXd> llt(rest);
        if (llt.info() != Eigen::Success)
            throw Error(ErrorCode::SingularCovariance, "partner covariance not positive definite");
        const Eigen::VectorXd coef = llt.solve(cross);
        est.value -= coef.dot(resid);
    }
    est.variance = 1.0 / (static_cast<double>(s.count()) * fi_subset(model, subset));
    return est;
}

Estimate wilks_bivariate(const SampleStore& store, double sigma1, double sigma2, double rho) {
    const TwoSensorData d = two_sensor_data(store, false);
    if (d.n_a + d.n_ab < 1) throw Error(ErrorCode::NoSamples, "no samples of X_1");
    Estimate est = two_sensor_mle(d, sigma1, sigma2, rho);
    est.source = EstimatorKind::Wilks;
    return est;
}

double wilks_variance(long n1, long n2, long n12, double rho, double sigma1) {
    const double q = 1.0 - rho * rho;
    if (n12 == 0) {
        if (n1 == 0) return std::numeric_limits<double>::infinity();
        return sigma1 * sigma1 / static_cast<double>(n1);
    }
    const double a = static_cast<double>(n1), b = static_cast<double>(n2), c = static_cast<double>(n12);
    const double delta = c * (a + b + c) + a * b * q;
    return (c + b * q) * sigma1 * sigma1 / delta;
}

double wilks_variance_ratio_form(long n1, long n2, long n12, double rho, double sigma1) {
    if (n12 == 0) return wilks_variance(n1, n2, n12, rho, sigma1);
    const double q = 1.0 - rho * rho;
    const double a = static_cast<double>(n1) / static_cast<double>(n12);
    const double b = static_cast<double>(n2) / static_cast<double>(n12);
    return (1.0 + b * q) / (1.0 + a + b + a * b * q) * sigma1 * sigma1 / static_cast<double>(n12);
}

Estimate bishwal_bivariate(const SampleStore& store, const std::vector<double>& known_means,
                           std::size_t j) {
    if (j == 0 || j >= known_means.size())
        throw Error(ErrorCode::InvalidSubset, "partner sensor out of range");
    const SubsetKey key{0, j};
    const SubsetStats& s = require(store, key, 3);
    Estimate est;
    est.subset = key;
    const double sxx = s.comoment(1, 1);
    if (std::abs(sxx) < 1e-12) {
        est.value = s.mean(0);
        est.source = EstimatorKind::JointSampleMean;
        return est;
    }
    const double beta_hat = s.comoment(0, 1) / sxx;
    est.value = s.mean(0) - beta_hat * (s.mean(1) - known_means[j]);
    est.source = EstimatorKind::Bishwal;
    return est;
}

Estimate joint_sample_mean(const SampleStore& store, SubsetKey subset) {
    if (!subset.contains_target()) throw Error(ErrorCode::InvalidSubset, "subset must contain sensor 0");
    const SubsetStats& s = require(store, subset);
    Estimate est;
    est.value = s.mean(0);
    est.source = EstimatorKind::JointSampleMean;
    est.subset = subset;
    return est;
}

KalmanWeights optimal_weights_bivariate(long n1, long n12, double rho) {
    if (n1 < 0 || n12 < 0 || n1 + n12 < 1) throw Error(ErrorCode::NoSamples, "no samples to weight");
    const double a = static_cast<double>(n1) * (1.0 - rho * rho);
    const double b = static_cast<double>(n12);
    return KalmanWeights{{a / (a + b), b / (a + b)}};
}

KalmanWeights optimal_weights_general(const std::vector<double>& variances) {
    if (variances.empty()) throw Error(ErrorCode::AllInfinite, "no variances given");
    double total = 0.0;
    for (double v : variances) {
        if (!(v > 0.0)) throw Error(ErrorCode::InvalidArgument, "variances must be > 0");
        if (std::isfinite(v)) total += 1.0 / v;
    }
    if (total == 0.0) throw Error(ErrorCode::AllInfinite, "every variance is infinite");
    KalmanWeights w;
    w.g.reserve(variances.size());
    for (double v : variances) w.g.push_back(std::isfinite(v) ? (1.0 / v) / total : 0.0);
    return w;
}

KalmanWeights heuristic_weights_counts(const std::vector<long>& counts) {
    long total = 0;
    for (long c : counts) {
        if (c < 0) throw Error(ErrorCode::InvalidArgument, "negative count");
        total += c;
    }
    if (total < 1) throw Error(ErrorCode::NoSamples, "no samples to weight");
    KalmanWeights w;
    w.g.reserve(counts.size());
    for (long c : counts) w.g.push_back(static_cast<double>(c) / static_cast<double>(total));
    return w;
}

Estimate kalman_fuse(const std::vector<Estimate>& estimates, const KalmanWeights& weights) {
    if (estimates.empty()) throw Error(ErrorCode::NoSamples, "nothing to fuse");
    if (estimates.size() != weights.g.size())
        throw Error(ErrorCode::WeightMismatch, "one weight per estimate required");
    double sum_g = 0.0;
    for (double g : weights.g) {
        if (!(g >= 0.0 && g <= 1.0 + 1e-12)) throw Error(ErrorCode::WeightMismatch, "weight outside [0, 1]");
        sum_g += g;
    }
    if (std::abs(sum_g - 1.0) > 1e-9) throw Error(ErrorCode::WeightMismatch, "weights must sum to 1");

    Estimate fused;
    fused.source = EstimatorKind::KalmanFused;
    double var = 0.0;
    bool analytic = true;
    for (std::size_t i = 0; i < estimates.size(); ++i) {
        const double g = weights.g[i];
        fused.weights_used.emplace_back(estimates[i].subset.value_or(SubsetKey{}), g);
        if (g == 0.0) continue;
        fused.value += g * estimates[i].value;
        if (estimates[i].variance)
            var += g * g * *estimates[i].variance;
        else
            analytic = false;
    }
    if (analytic) fused.variance = var;
    return fused;
}

Estimate fuse_known_correlations(const SampleStore& store, const GaussianModel& model) {
    std::vector<Estimate> parts;
    std::vector<double> variances;
    for (const auto& [key, stats] : store.subsets()) {
        if (!key.contains_target() || stats.count() == 0) continue;
        Estimate e;
        const auto m = key.members();
        if (m.size() == 1)
            e = sample_mean(store, model, 0);
        else if (m.size() == 2)
            e = umvue_bivariate(store, model, m[1]);
        else if (m.size() == 3)
            e = umvue_trivariate(store, model, m[1], m[2]);
        else
            e = umvue_subset(store, model, key);
        variances.push_back(*e.variance);
        parts.push_back(std::move(e));
    }
    if (parts.empty()) throw Error(ErrorCode::NoSamples, "no samples of X_1");
    return kalman_fuse(parts, optimal_weights_general(variances));
}

Estimate fuse_unknown_correlations(const SampleStore& store, const std::vector<double>& known_means) {
    std::vector<Estimate> parts;
    std::vector<long> counts;
    for (const auto& [key, stats] : store.subsets()) {
        if (!key.contains_target() || stats.count() == 0) continue;
        if (key.size() == 1) {
            Estimate e;
            e.value = stats.mean(0);
            e.source = EstimatorKind::SampleMean;
            e.subset = key;
            parts.push_back(e);
        } else if (key.size() == 2) {
            const std::size_t j = key.members()[1];
            parts.push_back(stats.count() >= 3 ? bishwal_bivariate(store, known_means, j)
                                               : joint_sample_mean(store, key));
        } else {
            continue;
        }
        counts.push_back(stats.count());
    }
    if (parts.empty()) throw Error(ErrorCode::NoSamples, "no samples of X_1");
    return kalman_fuse(parts, heuristic_weights_counts(counts));
}

Estimate mle_scenario1_bivariate(const SampleStore& store, const GaussianModel& model, std::size_t j) {
    if (j == 0 || j >= model.dim()) throw Error(ErrorCode::InvalidSubset, "partner sensor out of range");
    const SubsetKey marg{0}, joint{0, j};
    const long n1 = store.count(marg);
    const long n12 = store.count(joint);
    if (n1 + n12 < 1) throw Error(ErrorCode::NoSamples, "no samples of X_1");
    const double r = model.rho(0, j);
    const double s1 = model.sigma(0);
    const double q = 1.0 - r * r;
    const double denom = static_cast<double>(n1) * q + static_cast<double>(n12);

    double value = 0.0;
    if (n1 > 0) value += static_cast<double>(n1) * q / denom * store.at(marg).mean(0);
    if (n12 > 0) {
        const SubsetStats& s = store.at(joint);
        value += static_cast<double>(n12) / denom *
                 (s.mean(0) - r * s1 / model.sigma(j) * (s.mean(1) - model.mean(j)));
    }
    Estimate est;
    est.value = value;
    est.variance = s1 * s1 * q / denom;
    est.source = EstimatorKind::MleScenario1;
    return est;
}

std::pair<Estimate, Estimate> mle_scenario2_bivariate(const SampleStore& store, double sigma1,
                                                      double sigma2, double rho) {
    const TwoSensorData d1 = two_sensor_data(store, false);
    const TwoSensorData d2 = two_sensor_data(store, true);
    if (d1.n_a + d1.n_ab < 1) throw Error(ErrorCode::Unidentifiable, "no samples touching X_1");
    if (d2.n_a + d2.n_ab < 1) throw Error(ErrorCode::Unidentifiable, "no samples touching X_2");
    Estimate mu1 = two_sensor_mle(d1, sigma1, sigma2, rho);
    Estimate mu2 = two_sensor_mle(d2, sigma2, sigma1, rho);
    mu1.source = mu2.source = EstimatorKind::MleScenario2;
    return {mu1, mu2};
}

Estimate mle_scenario2_general(const SampleStore& store, const GaussianModel& model, std::size_t sensor) {
    const auto k = static_cast<Eigen::Index>(model.dim());
    Eigen::MatrixXd info = Eigen::MatrixXd::Zero(k, k);
    Eigen::VectorXd score = Eigen::VectorXd::Zero(k);
    std::uint32_t touched = 0;
    for (const auto& [key, stats] : store.subsets()) {
        if (stats.count() == 0) continue;
        key.check(model.dim());
        touched |= key.mask();
        const Eigen::MatrixXd cov = subset_covariance(model, key);
        const Eigen::MatrixXd prec = cov.llt().solve(Eigen::MatrixXd::Identity(cov.rows(), cov.cols()));
        const Eigen::VectorXd weighted = static_cast<double>(stats.count()) * (prec * stats.means());
        const auto idx = key.members();
        for (std::size_t r = 0; r < idx.size(); ++r) {
            const auto gr = static_cast<Eigen::Index>(idx[r]);
            score(gr) += weighted(static_cast<Eigen::Index>(r));
            for (std::size_t c = 0; c < idx.size(); ++c)
                info(gr, static_cast<Eigen::Index>(idx[c])) +=
                    static_cast<double>(stats.count()) *
                    prec(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
        }
    }
    if (!SubsetKey::from_mask(touched).contains(sensor))
        throw Error(ErrorCode::Unidentifiable, "no samples touching the requested sensor");

    const auto seen = SubsetKey::from_mask(touched).members();
    const auto m = static_cast<Eigen::Index>(seen.size());
    Eigen::MatrixXd a(m, m);
    Eigen::VectorXd b(m);
    Eigen::Index target = 0;
    for (Eigen::Index r = 0; r < m; ++r) {
        const auto gr = static_cast<Eigen::Index>(seen[static_cast<std::size_t>(r)]);
        if (seen[static_cast<std::size_t>(r)] == sensor) target = r;
        b(r) = score(gr);
        for (Eigen::Index c = 0; c < m; ++c)
            a(r, c) = info(gr, static_cast<Eigen::Index>(seen[static_cast<std::size_t>(c)]));
    }
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() != Eigen::Success) throw Error(ErrorCode::Unidentifiable, "information matrix singular");
    const Eigen::VectorXd mu = llt.solve(b);
    Eigen::VectorXd e = Eigen::VectorXd::Zero(m);
    e(target) = 1.0;
    Estimate est;
    est.value = mu(target);
    est.variance = llt.solve(e)(target);
    est.source = EstimatorKind::MleScenario2;
    return est;
}

} // namespace collab
