#include "oracles.hpp"
#include "random_models.hpp"
#include "test_support.hpp"

#include <collab/fisher.hpp>

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace collab;
using testing_support::bivariate;
using testing_support::trivariate;

namespace {

// Closed form of the trivariate information about the first mean.
double trivariate_closed_form(double r12, double r13, double r23, double s1) {
    return (1.0 - r23 * r23) /
           ((1.0 + 2.0 * r12 * r13 * r23 - r12 * r12 - r13 * r13 - r23 * r23) * s1 * s1);
}

std::vector<std::size_t> members_of(std::uint32_t mask) {
    std::vector<std::size_t> m;
    for (std::size_t i = 0; i < 32; ++i)
        if (mask & (1u << i)) m.push_back(i);
    return m;
}

} // namespace

TEST_CASE("marginal information") {
    CHECK(fi_marginal(bivariate(0.3, 1.0)) == 1.0);
    CHECK(fi_marginal(bivariate(0.3, 2.0)) == 0.25);
    CHECK(fi_marginal(bivariate(0.3, 0.5)) == 4.0);
}

TEST_CASE("subset information examples") {
    CHECK(fi_subset(bivariate(0.0), SubsetKey{0, 1}) == doctest::Approx(1.0).epsilon(1e-15));
    const double two = fi_subset(bivariate(0.5), SubsetKey{0, 1});
    CHECK(std::abs(two - oracle::inverse({{1.0, 0.5}, {0.5, 1.0}})[0][0]) < 1e-14);
    CHECK(two == doctest::Approx(4.0 / 3.0).epsilon(1e-14));

    const double three = fi_subset(trivariate(0.5, 0.5, 0.5), SubsetKey{0, 1, 2});
    const double brute = oracle::inverse({{1, 0.5, 0.5}, {0.5, 1, 0.5}, {0.5, 0.5, 1}})[0][0];
    CHECK(std::abs(three - brute) < 1e-12);
    CHECK(std::abs(three - trivariate_closed_form(0.5, 0.5, 0.5, 1.0)) < 1e-12);
    CHECK(fi_subset(bivariate(0.5), SubsetKey{1}) == 0.0);
}

TEST_CASE("subset information matches brute-force inversion on random models") {
    std::mt19937_64 rng(101);
    for (int inst = 0; inst < 100; ++inst) {
        const std::size_t k = 2 + static_cast<std::size_t>(inst % 4);
        const auto m = testing_support::random_model(rng, k);
        const auto corr = testing_support::correlations_of(m);
        const auto sig = testing_support::sigmas_of(m);
        for (std::uint32_t mask = 1; mask < (1u << k); mask += 2) {
            const auto members = members_of(mask);
            const double expect = oracle::fi(corr, sig, members);
            const double got = fi_subset(m, SubsetKey::from_mask(mask));
            CHECK(std::abs(got - expect) <= 1e-10 * expect);
        }
        if (k == 3) {
            const double closed = trivariate_closed_form(corr[0][1], corr[0][2], corr[1][2], sig[0]);
            const double got = fi_subset(m, SubsetKey{0, 1, 2});
            CHECK(std::abs(got - closed) <= 1e-10 * closed);
        }
    }
}

TEST_CASE("information never decreases when a sensor is added") {
    std::mt19937_64 rng(5);
    for (int inst = 0; inst < 50; ++inst) {
        const std::size_t k = 2 + static_cast<std::size_t>(inst % 4);
        const auto m = testing_support::random_model(rng, k);
        for (std::uint32_t mask = 1; mask < (1u << k); mask += 2)
            for (std::size_t add = 1; add < k; ++add) {
                if (mask & (1u << add)) continue;
                const double small = fi_subset(m, SubsetKey::from_mask(mask));
                const double large = fi_subset(m, SubsetKey::from_mask(mask | (1u << add)));
                CHECK(large >= small * (1.0 - 1e-12));
            }
        for (std::size_t j = 1; j < k; ++j) {
            const double pair = fi_subset(m, SubsetKey{0, j});
            if (m.rho(0, j) > 0.0) CHECK(pair > fi_marginal(m));
        }
    }
    CHECK(fi_subset(bivariate(0.0, 1.7), SubsetKey{0, 1}) == doctest::Approx(fi_marginal(bivariate(0.0, 1.7))));
}

TEST_CASE("expected information of static policies") {
    const auto m = bivariate(0.5);
    CHECK(expected_fi(StaticPolicy::from_probs({{SubsetKey{0}, 1.0}}), m) == 1.0);
    const double mixed = expected_fi(StaticPolicy::from_probs({{SubsetKey{0}, 0.5}, {SubsetKey{0, 1}, 0.5}}), m);
    const double oracle_mixed = 0.5 * 1.0 + 0.5 * oracle::inverse({{1.0, 0.5}, {0.5, 1.0}})[0][0];
    CHECK(std::abs(mixed - oracle_mixed) < 1e-14);
    CHECK(mixed == doctest::Approx(7.0 / 6.0));
    CHECK(expected_fi(StaticPolicy::from_probs({{SubsetKey{1}, 1.0}}), m) == 0.0);
}

TEST_CASE("static policy validation and cost") {
    const auto p = StaticPolicy::from_probs({{SubsetKey{0}, 0.25}, {SubsetKey{0, 1}, 0.5}, {SubsetKey{1}, 0.1}});
    CHECK(p.p_empty() == doctest::Approx(0.15));
    CHECK(p.prob(SubsetKey{0, 2}) == 0.0);
    CHECK(p.expected_cost(2.0) == doctest::Approx(0.25 + 0.5 * 3.0 + 0.1 * 2.0));
    CHECK(p.feasible(2.0, 1.95));
    CHECK_FALSE(p.feasible(2.0, 1.9));
    CHECK_THROWS_AS(StaticPolicy::from_probs({{SubsetKey{0}, 0.7}, {SubsetKey{0, 1}, 0.7}}), Error);
    CHECK_THROWS_AS(StaticPolicy::from_probs({{SubsetKey{0}, -0.1}}), Error);
}

TEST_CASE("two-sensor Fisher information matrix") {
    const auto m = bivariate(0.5);
    const Eigen::MatrixXd only1 = fim_scenario2(StaticPolicy::from_probs({{SubsetKey{0}, 1.0}}), m);
    CHECK(only1(0, 0) == 1.0);
    CHECK(only1(0, 1) == 0.0);
    CHECK(only1(1, 1) == 0.0);

    const Eigen::MatrixXd joint = fim_scenario2(StaticPolicy::from_probs({{SubsetKey{0, 1}, 1.0}}), m);
    const auto inv = oracle::inverse({{1.0, 0.5}, {0.5, 1.0}});
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) CHECK(std::abs(joint(i, j) - inv[i][j]) < 1e-14);
    CHECK(joint(0, 0) == doctest::Approx(4.0 / 3.0));
    CHECK(joint(0, 1) == doctest::Approx(-2.0 / 3.0));

    const Eigen::MatrixXd split =
        fim_scenario2(StaticPolicy::from_probs({{SubsetKey{0}, 0.5}, {SubsetKey{1}, 0.5}}), m);
    CHECK(split(0, 0) == 0.5);
    CHECK(split(1, 1) == 0.5);
    CHECK(split(0, 1) == 0.0);
}

TEST_CASE("Cramer-Rao entries") {
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(2, 2);
    d(0, 0) = 2.0;
    d(1, 1) = 3.0;
    CHECK(crb_entry(d, 0) == 0.5);

    const auto m = bivariate(0.5);
    const Eigen::MatrixXd joint = fim_scenario2(StaticPolicy::from_probs({{SubsetKey{0, 1}, 1.0}}), m);
    CHECK(crb_entry(joint, 0) == doctest::Approx(1.0).epsilon(1e-12));
    // Two-sensor inverse written out through its determinant.
    const double rho = 0.5, det = joint(0, 0) * joint(1, 1) - joint(0, 1) * joint(1, 0);
    CHECK(det == doctest::Approx(1.0 / (1.0 - rho * rho)));
    CHECK(crb_entry(joint, 0) == doctest::Approx(joint(1, 1) / det));

    const Eigen::MatrixXd only2 = fim_scenario2(StaticPolicy::from_probs({{SubsetKey{1}, 1.0}}), m);
    CHECK(crb_entry(only2, 0) == std::numeric_limits<double>::infinity());

    // mu_0 identifiable while mu_1 is not: pseudo-inverse path.
    const Eigen::MatrixXd only1 = fim_scenario2(StaticPolicy::from_probs({{SubsetKey{0}, 0.8}}), m);
    CHECK(crb_entry(only1, 0) == doctest::Approx(1.25));
    CHECK(crb_entry(only1, 1) == std::numeric_limits<double>::infinity());
}

TEST_CASE("inverse diagonal times diagonal is at least one") {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> u(0.05, 1.0);
    for (int inst = 0; inst < 100; ++inst) {
        const std::size_t k = 2 + static_cast<std::size_t>(inst % 3);
        const auto m = testing_support::random_model(rng, k);
        std::map<SubsetKey, double> probs;
        double total = 0.0;
        for (std::uint32_t mask = 1; mask < (1u << k); ++mask) {
            const double p = u(rng);
            probs[SubsetKey::from_mask(mask)] = p;
            total += p;
        }
        for (auto& [key, p] : probs) p /= total;
        const Eigen::MatrixXd fim = fim_scenario2(StaticPolicy::from_probs(probs), m);
        CHECK(crb_entry(fim, 0) * fim(0, 0) >= 1.0 - 1e-10);
    }
    Eigen::MatrixXd block = Eigen::MatrixXd::Zero(3, 3);
    block(0, 0) = 2.0;
    block(1, 1) = 1.0;
    block(2, 2) = 1.0;
    block(1, 2) = block(2, 1) = 0.5;
    CHECK(crb_entry(block, 0) * block(0, 0) == doctest::Approx(1.0).epsilon(1e-14));
}
