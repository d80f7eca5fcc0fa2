#include <collab/model.hpp>

#include <bit>
#include <cmath>
#include <sstream>

namespace collab {

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    std::uint64_t z = master ^ (0x9E3779B97F4A7C15ULL * (stream + 1));
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

GaussianModel GaussianModel::validate(std::vector<double> means, std::vector<double> std_devs,
                                      const std::vector<std::vector<double>>& correlations) {
    const std::size_t k = means.size();
    if (correlations.size() != k)
        throw Error(ErrorCode::DimensionMismatch, "correlation matrix has " +
                                                      std::to_string(correlations.size()) +
                                                      " rows, expected " + std::to_string(k));
    Eigen::MatrixXd corr(k, k);
    for (std::size_t r = 0; r < k; ++r) {
        if (correlations[r].size() != k)
            throw Error(ErrorCode::DimensionMismatch, "correlation row " + std::to_string(r) +
                                                          " has wrong length");
        for (std::size_t c = 0; c < k; ++c)
            corr(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = correlations[r][c];
    }
    return validate(std::move(means), std::move(std_devs), corr);
}

GaussianModel GaussianModel::validate(std::vector<double> means, std::vector<double> std_devs,
                                      const Eigen::MatrixXd& correlations) {
    const std::size_t k = means.size();
    if (k < 2) throw Error(ErrorCode::DimensionMismatch, "need at least two sensors");
    if (k > SubsetKey::kMaxSensors)
        throw Error(ErrorCode::DimensionMismatch, "at most 32 sensors are supported");
    if (std_devs.size() != k)
        throw Error(ErrorCode::DimensionMismatch, "std_devs and means differ in length");
    if (correlations.rows() != static_cast<Eigen::Index>(k) ||
        correlations.cols() != static_cast<Eigen::Index>(k))
        throw Error(ErrorCode::DimensionMismatch, "correlation matrix must be K x K");

    for (std::size_t i = 0; i < k; ++i) {
        if (!std::isfinite(means[i]))
            throw Error(ErrorCode::InvalidArgument, "non-finite mean");
        if (!(std_devs[i] > 0.0) || !std::isfinite(std_devs[i]))
            throw Error(ErrorCode::NonPositiveDefinite,
                        "std_devs must be positive, got " + std::to_string(std_devs[i]));
    }

    Eigen::MatrixXd corr = correlations;
    for (Eigen::Index r = 0; r < corr.rows(); ++r) {
        if (std::abs(corr(r, r) - 1.0) > 1e-12)
            throw Error(ErrorCode::CorrelationOutOfRange, "correlation diagonal must be 1");
        corr(r, r) = 1.0;
        for (Eigen::Index c = r + 1; c < corr.cols(); ++c) {
            const double a = corr(r, c);
            const double b = corr(c, r);
            if (std::abs(a - b) > 1e-12)
                throw Error(ErrorCode::CorrelationOutOfRange, "correlation matrix not symmetric");
            if (!(a >= 0.0 && a < 1.0))
                throw Error(ErrorCode::CorrelationOutOfRange,
                            "correlation " + std::to_string(a) + " outside [0, 1)");
            corr(c, r) = a;
        }
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(corr, Eigen::EigenvaluesOnly);
    if (eig.info() != Eigen::Success || eig.eigenvalues().minCoeff() <= kPdTolerance)
        throw Error(ErrorCode::NonPositiveDefinite, "correlation matrix is not positive definite");

    GaussianModel model;
    model.means_ = std::move(means);
    model.std_devs_ = std::move(std_devs);
    model.corr_ = corr;
    Eigen::VectorXd s = Eigen::Map<const Eigen::VectorXd>(model.std_devs_.data(),
                                                          static_cast<Eigen::Index>(k));
    model.cov_ = s.asDiagonal() * corr * s.asDiagonal();
    return model;
}

ResourceSpec ResourceSpec::validate(double alpha, double budget_e, long horizon_t) {
    if (!(alpha >= 0.0) || !std::isfinite(alpha))
        throw Error(ErrorCode::InvalidArgument, "alpha must be >= 0");
    if (!(budget_e > 0.0) || !std::isfinite(budget_e))
        throw Error(ErrorCode::InvalidArgument, "budget E must be > 0");
    if (horizon_t < 1) throw Error(ErrorCode::InvalidArgument, "horizon T must be >= 1");
    return ResourceSpec{alpha, budget_e, horizon_t};
}

SubsetKey::SubsetKey(std::initializer_list<std::size_t> members)
    : SubsetKey(std::span<const std::size_t>(members.begin(), members.size())) {}

SubsetKey::SubsetKey(std::span<const std::size_t> members) {
    for (std::size_t m : members) {
        if (m >= kMaxSensors) throw Error(ErrorCode::InvalidSubset, "sensor index out of range");
        const std::uint32_t bit = 1u << m;
        if (mask_ & bit) throw Error(ErrorCode::InvalidSubset, "duplicate sensor in subset");
        mask_ |= bit;
    }
}

std::size_t SubsetKey::size() const { return static_cast<std::size_t>(std::popcount(mask_)); }

std::size_t SubsetKey::local_index(std::size_t k) const {
    if (!contains(k)) throw Error(ErrorCode::InvalidSubset, "sensor not in subset");
    const std::uint32_t below = mask_ & ((1u << k) - 1u);
    return static_cast<std::size_t>(std::popcount(below));
}

std::vector<std::size_t> SubsetKey::members() const {
    std::vector<std::size_t> out;
    out.reserve(size());
    for (std::uint32_t m = mask_; m != 0; m &= m - 1)
        out.push_back(static_cast<std::size_t>(std::countr_zero(m)));
    return out;
}

std::size_t SubsetKey::max_member() const {
    if (mask_ == 0) throw Error(ErrorCode::InvalidSubset, "empty subset");
    return static_cast<std::size_t>(31 - std::countl_zero(mask_));
}

void SubsetKey::check(std::size_t dim) const {
    if (empty()) throw Error(ErrorCode::InvalidSubset, "empty subset");
    if (max_member() >= dim)
        throw Error(ErrorCode::InvalidSubset,
                    "subset {" + label() + "} exceeds model dimension " + std::to_string(dim));
}

std::string SubsetKey::label() const {
    std::ostringstream os;
    bool first = true;
    for (std::size_t m : members()) {
        if (!first) os << ',';
        os << (m + 1);
        first = false;
    }
    return os.str();
}

SubsetKey SubsetKey::parse_label(const std::string& label) {
    std::vector<std::size_t> members;
    std::istringstream is(label);
    std::string tok;
    while (std::getline(is, tok, ',')) {
        std::size_t pos = 0;
        long v = 0;
        try {
            v = std::stol(tok, &pos);
        } catch (const std::exception&) {
            throw Error(ErrorCode::InvalidSubset, "bad subset label '" + label + "'");
        }
        if (v < 1 || tok.find_first_not_of(" \t", pos) != std::string::npos)
            throw Error(ErrorCode::InvalidSubset, "bad subset label '" + label + "'");
        members.push_back(static_cast<std::size_t>(v - 1));
    }
    if (members.empty()) throw Error(ErrorCode::InvalidSubset, "empty subset label");
    return SubsetKey(std::span<const std::size_t>(members));
}

double cost_of_subset(SubsetKey subset, double alpha) {
    return 1.0 + alpha * static_cast<double>(subset.size() - 1);
}

Eigen::MatrixXd subset_covariance(const GaussianModel& model, SubsetKey subset) {
    subset.check(model.dim());
    const auto idx = subset.members();
    const auto n = static_cast<Eigen::Index>(idx.size());
    Eigen::MatrixXd out(n, n);
    for (Eigen::Index r = 0; r < n; ++r)
        for (Eigen::Index c = 0; c < n; ++c)
            out(r, c) = model.covariance()(static_cast<Eigen::Index>(idx[static_cast<std::size_t>(r)]),
                                           static_cast<Eigen::Index>(idx[static_cast<std::size_t>(c)]));
    return out;
}

Eigen::VectorXd draw_joint(const GaussianModel& model, SubsetKey subset, Rng& rng) {
    Sampler sampler(model);
    return sampler.draw(subset, rng);
}

const Sampler::Factor& Sampler::factor(SubsetKey subset) {
    auto it = cache_.find(subset.mask());
    if (it != cache_.end()) return it->second;

    const Eigen::MatrixXd cov = subset_covariance(*model_, subset);
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success)
        throw Error(ErrorCode::SingularCovariance, "subset covariance not positive definite");
    Factor f;
    const auto idx = subset.members();
    f.mean.resize(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i)
        f.mean(static_cast<Eigen::Index>(i)) = model_->mean(idx[i]);
    f.lower = llt.matrixL();
    return cache_.emplace(subset.mask(), std::move(f)).first->second;
}

Eigen::VectorXd Sampler::draw(SubsetKey subset, Rng& rng) {
    const Factor& f = factor(subset);
    Eigen::VectorXd z(f.mean.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = normal_(rng);
    return f.mean + f.lower * z;
}

} // namespace collab
