#include "oracles.hpp"
#include "random_models.hpp"
#include "test_support.hpp"

#include <collab/static_policy.hpp>

#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

using namespace collab;
using testing_support::bivariate;
using testing_support::trivariate;

namespace {

// Per-unit-resource information of each sample type, by brute-force inversion.
struct TriOracle {
    double uni, bi12, bi13, tri;
};

TriOracle tri_oracle(double r12, double r13, double r23, double alpha) {
    const oracle::Matrix c{{1, r12, r13}, {r12, 1, r23}, {r13, r23, 1}};
    const std::vector<double> s{1, 1, 1};
    return {oracle::fi(c, s, {0}), oracle::fi(c, s, {0, 1}) / (alpha + 1.0), oracle::fi(c, s, {0, 2}) / (alpha + 1.0),
            oracle::fi(c, s, {0, 1, 2}) / (2.0 * alpha + 1.0)};
}

bool pd3(double r12, double r13, double r23) {
    return oracle::sym3_eigenvalues({{1, r12, r13}, {r12, 1, r23}, {r13, r23, 1}})[0] > 1e-10;
}

} // namespace

TEST_CASE("bivariate threshold values") {
    CHECK(bivariate_threshold(0.0) == 0.0);
    CHECK(bivariate_threshold(2.0) == doctest::Approx(0.816496580927726).epsilon(1e-14));
    CHECK(bivariate_threshold(99.0) == doctest::Approx(0.99498743710662).epsilon(1e-13));
    const double r = bivariate_threshold(99.0);
    CHECK(fi_subset(bivariate(r + 1e-4), SubsetKey{0, 1}) > 100.0);
    CHECK(fi_subset(bivariate(r - 1e-4), SubsetKey{0, 1}) < 100.0);
}

TEST_CASE("threshold sign agrees with the information comparison on a grid") {
    int checked = 0;
    for (int ia = 0; ia < 10; ++ia)
        for (int ir = 0; ir < 20; ++ir) {
            const double alpha = 0.05 + 0.7 * ia;
            const double rho = 0.013 + 0.049 * ir;
            const double lhs = oracle::fi({{1, rho}, {rho, 1}}, {1, 1}, {0, 1}) - (alpha + 1.0);
            const double rhs = rho - bivariate_threshold(alpha);
            if (std::abs(lhs) < 1e-12 || std::abs(rhs) < 1e-12) continue;
            CHECK((lhs > 0) == (rhs > 0));
            ++checked;
        }
    CHECK(checked == 200);
}

TEST_CASE("threshold report compares the marginal with each pair") {
    const auto m = trivariate(0.9, 0.1, 0.0);
    const auto rep = threshold_report(m, 2.0);
    CHECK(rep.rho_star == doctest::Approx(bivariate_threshold(2.0)));
    REQUIRE(rep.comparisons.size() == 2);
    CHECK(rep.comparisons[0].winner == SubsetKey{0, 1});
    CHECK(rep.comparisons[1].winner == SubsetKey{0});
    const double margin = fi_subset(m, SubsetKey{0, 2}) / 3.0 - 1.0;
    CHECK(std::abs(rep.comparisons[1].margin - margin) < 1e-12);
}

TEST_CASE("trivariate rules: fixed examples") {
    for (double a : {0.1, 1.0, 5.0}) {
        CHECK_FALSE(trivariate_beats_bivariate(0, 0, 0, a));
        CHECK_FALSE(trivariate_beats_univariate(0, 0, 0, a));
    }
    {
        const auto o = tri_oracle(0.9, 0.1, 0.5, 2.0);
        CHECK(trivariate_beats_bivariate(0.9, 0.1, 0.5, 2.0) == (o.tri > o.bi12));
    }
    // (0.95, 0.95, 0.5) and (0.9, 0.9, 0.5) are not positive definite, so the
    // rules refuse them; rho23 = 0.9 gives valid neighbours.
    CHECK_THROWS_AS(trivariate_beats_univariate(0.95, 0.95, 0.5, 0.1), Error);
    CHECK_THROWS_AS(trivariate_beats_univariate(0.9, 0.9, 0.5, 10.0), Error);
    {
        const auto o = tri_oracle(0.95, 0.95, 0.9, 0.1);
        CHECK(o.tri > o.uni);
        CHECK(trivariate_beats_univariate(0.95, 0.95, 0.9, 0.1));
    }
    {
        const auto o = tri_oracle(0.9, 0.9, 0.9, 10.0);
        CHECK(o.tri < o.uni);
        CHECK_FALSE(trivariate_beats_univariate(0.9, 0.9, 0.9, 10.0));
    }
    CHECK_THROWS_AS(trivariate_beats_bivariate(0.99, 0.0, 0.99, 1.0), Error);
}

TEST_CASE("trivariate rules agree with per-resource information on grids") {
    for (double alpha : {0.1, 0.5, 2.0, 6.0})
        for (double r23 : {0.0, 0.3, 0.5, 0.8}) {
            for (int i = 0; i < 50; ++i)
                for (int j = 0; j < 50; ++j) {
                    const double r12 = (i + 0.5) / 50.0, r13 = (j + 0.5) / 50.0;
                    if (!pd3(r12, r13, r23)) continue;
                    const auto o = tri_oracle(r12, r13, r23, alpha);
                    if (std::abs(o.tri - o.bi12) > 1e-9 * o.tri)
                        CHECK(trivariate_beats_bivariate(r12, r13, r23, alpha) == (o.tri > o.bi12));
                    if (std::abs(o.tri - o.bi13) > 1e-9 * o.tri)
                        CHECK(trivariate_beats_bivariate_13(r12, r13, r23, alpha) == (o.tri > o.bi13));
                    if (std::abs(o.tri - o.uni) > 1e-9 * o.tri)
                        CHECK(trivariate_beats_univariate(r12, r13, r23, alpha) == (o.tri > o.uni));

                    const double best = std::max({o.uni, o.bi12, o.bi13, o.tri});
                    const SampleType t = best_trivariate_sample_type(r12, r13, r23, alpha);
                    const double chosen = t == SampleType::Univariate    ? o.uni
                                          : t == SampleType::Bivariate12 ? o.bi12
                                          : t == SampleType::Bivariate13 ? o.bi13
                                                                         : o.tri;
                    CHECK(chosen >= best * (1.0 - 1e-10));
                }
        }
    CHECK(best_trivariate_sample_type(0.99, 0.0, 0.99, 1.0) == SampleType::Invalid);
    CHECK(to_string(SampleType::Bivariate13) == "bivariate-13");
}

TEST_CASE("Table 3 cells") {
    auto p = table3_policy(2.0, 1.5, 0.9);
    CHECK(p.prob(SubsetKey{0, 1}) == doctest::Approx(0.5));
    CHECK(p.prob(SubsetKey{0}) == 0.0);

    p = table3_policy(2.0, 2.0, 0.5);
    CHECK(p.prob(SubsetKey{0}) == doctest::Approx(0.5));
    CHECK(p.prob(SubsetKey{0, 1}) == doctest::Approx(0.5));

    p = table3_policy(2.0, 0.7, 0.5);
    CHECK(p.prob(SubsetKey{0}) == doctest::Approx(0.7));
    CHECK(p.prob(SubsetKey{0, 1}) == 0.0);
    CHECK(p.p_empty() == doctest::Approx(0.3));

    p = table3_policy(2.0, 4.0, 0.5);
    CHECK(p.prob(SubsetKey{0, 1}) == 1.0);

    p = table3_policy(2.0, 6.0, 0.9);
    CHECK(p.prob(SubsetKey{0, 1}) == 1.0);

    // At the threshold the all-joint row is returned.
    p = table3_policy(2.0, 1.5, bivariate_threshold(2.0));
    CHECK(p.prob(SubsetKey{0, 1}) == doctest::Approx(0.5));
}

TEST_CASE("LP optimum matches Table 3 and the dual value on a grid") {
    for (double alpha : {0.5, 2.0, 4.0})
        for (int ir = 0; ir < 20; ++ir)
            for (int ie = 1; ie <= 15; ++ie) {
                const double rho = 0.02 + 0.049 * ir;
                const double e = 0.4 * ie;
                const auto m = bivariate(rho);
                const auto lp = solve_scenario1_lp(m, alpha, e);
                const auto t3 = table3_policy(alpha, e, rho);
                CHECK(t3.feasible(alpha, e, 1e-12));
                CHECK(lp.policy.feasible(alpha, e, 1e-9));
                CHECK(std::abs(expected_fi(t3, m) - lp.objective) < 1e-9);
                CHECK(std::abs(expected_fi(lp.policy, m) - lp.objective) < 1e-12);
                const double dual = oracle::lp_value_by_duality({1.0, 1.0 / (1.0 - rho * rho)}, {1.0, alpha + 1.0}, e);
                CHECK(std::abs(dual - lp.objective) < 1e-9);
                if (std::abs(rho * rho - alpha / (alpha + 1.0)) > 1e-6) {
                    CHECK(std::abs(lp.policy.prob(SubsetKey{0}) - t3.prob(SubsetKey{0})) < 1e-9);
                    CHECK(std::abs(lp.policy.prob(SubsetKey{0, 1}) - t3.prob(SubsetKey{0, 1})) < 1e-9);
                }
            }
}

TEST_CASE("LP optimum dominates random feasible policies") {
    std::mt19937_64 rng(9);
    const auto m = testing_support::random_model(rng, 4);
    const double alpha = 0.8, e = 1.7;
    const auto lp = solve_scenario1_lp(m, alpha, e);
    CHECK(lp.certificate_gap == 0.0);
    CHECK(lp.vertices_examined > 8);

    std::vector<SubsetKey> keys;
    for (std::uint32_t mask = 1; mask < 16; mask += 2) keys.push_back(SubsetKey::from_mask(mask));
    std::vector<double> f, c;
    for (auto k : keys) {
        f.push_back(fi_subset(m, k));
        c.push_back(cost_of_subset(k, alpha));
    }
    CHECK(std::abs(oracle::lp_value_by_duality(f, c, e) - lp.objective) < 1e-9);

    std::uniform_real_distribution<double> u(0.0, 1.0);
    int feasible_seen = 0;
    for (int trial = 0; trial < 10000; ++trial) {
        std::vector<double> w(keys.size());
        double sum = 0.0, cost = 0.0;
        for (std::size_t i = 0; i < keys.size(); ++i) {
            w[i] = u(rng) * (u(rng) < 0.5 ? 1.0 : 0.0);
            sum += w[i];
            cost += w[i] * c[i];
        }
        if (sum == 0.0) continue;
        const double scale = std::min(1.0 / sum, e / cost) * u(rng);
        std::map<SubsetKey, double> probs;
        for (std::size_t i = 0; i < keys.size(); ++i)
            if (w[i] > 0.0) probs[keys[i]] = w[i] * scale;
        const auto p = StaticPolicy::from_probs(probs);
        REQUIRE(p.feasible(alpha, e, 1e-9));
        ++feasible_seen;
        CHECK(expected_fi(p, m) <= lp.objective + 1e-12);
    }
    CHECK(feasible_seen > 9000);
}

TEST_CASE("LP examples") {
    const auto m = trivariate(0.9, 0.1, 0.0);
    const auto lp = solve_scenario1_lp(m, 2.0, 3.0);
    CHECK(lp.policy.prob(SubsetKey{0, 1}) == doctest::Approx(1.0));
    CHECK(lp.policy.probs().size() == 1);

    std::mt19937_64 rng(21);
    for (int inst = 0; inst < 20; ++inst) {
        const std::size_t k = 2 + static_cast<std::size_t>(inst % 4);
        const auto rm = testing_support::random_model(rng, k);
        const auto free = solve_scenario1_lp(rm, 0.0, 1.0 + inst * 0.2);
        CHECK(free.policy.prob(SubsetKey::from_mask((1u << k) - 1u)) == doctest::Approx(1.0));
    }

    const auto restricted = solve_scenario1_lp(trivariate(0.6, 0.6, 0.2), 0.1, 5.0, 2);
    for (const auto& [key, p] : restricted.policy.probs()) CHECK(key.size() <= 2);
    CHECK_THROWS_AS(solve_scenario1_lp(m, 2.0, 0.0), Error);
}

TEST_CASE("scenario 2 optimum is marginal-only") {
    CHECK(solve_scenario2(bivariate(0.5), 2.0, 0.6).prob(SubsetKey{0}) == doctest::Approx(0.6));
    CHECK(solve_scenario2(bivariate(0.5), 2.0, 5.0).prob(SubsetKey{0}) == 1.0);
    for (double rho : {0.0, 0.3, 0.9})
        for (double alpha : {0.0, 1.0, 3.0}) {
            const auto p = solve_scenario2(bivariate(rho), alpha, 0.8);
            CHECK(p.probs().size() == 1);
            CHECK(p.prob(SubsetKey{0}) == doctest::Approx(0.8));
        }
}

TEST_CASE("two-sensor scenario 2 bound") {
    const auto m = bivariate(0.5);
    CHECK(crb_scenario2_bivariate(2.0 / 3.0, 0.0, 1.0 / 3.0, m) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(crb_scenario2_bivariate(1.0, 0.0, 0.0, m) == doctest::Approx(1.0));
    CHECK(crb_scenario2_bivariate(0.0, 0.0, 1.0, m) == doctest::Approx(1.0));
    CHECK(crb_scenario2_bivariate(0.0, 0.7, 0.0, m) == std::numeric_limits<double>::infinity());
    CHECK(crb_scenario2_bivariate(1.0, 0.0, 0.0, bivariate(0.5, 2.0)) == doctest::Approx(4.0));

    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        const double rho = 0.95 * u(rng);
        const auto mm = bivariate(rho, 0.5 + u(rng), 0.5 + u(rng));
        const double p1 = u(rng), p2 = u(rng) * (1 - p1), p12 = u(rng) * (1 - p1 - p2);
        const auto pol =
            StaticPolicy::from_probs({{SubsetKey{0}, p1}, {SubsetKey{1}, p2}, {SubsetKey{0, 1}, p12}});
        const double numeric = crb_entry(fim_scenario2(pol, mm), 0);
        CHECK(std::abs(crb_scenario2_bivariate(p1, p2, p12, mm) - numeric) <= 1e-10 * numeric);
    }
    for (int i = 0; i <= 20; ++i) {
        const double p1 = i / 20.0;
        CHECK(crb_scenario2_bivariate(p1, 0.0, 1.0 - p1, m) == doctest::Approx(1.0).epsilon(1e-12));
    }
}
