#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "ihp/gmm.hpp"
#include "ihp/mc.hpp"
#include "ihp/sampling.hpp"
#include "oracles.hpp"

using namespace ihp;

namespace {

Gmm random_gmm(std::mt19937_64& rng, int max_components = 5) {
    std::uniform_int_distribution<int> nc(1, max_components);
    std::uniform_real_distribution<double> mu(-5.0, 20.0);
    std::uniform_real_distribution<double> sd(0.2, 4.0);
    std::uniform_real_distribution<double> w(0.1, 1.0);
    const int n = nc(rng);
    std::vector<GaussComponent> comps(n);
    double wsum = 0.0;
    for (auto& c : comps) {
        c.weight = w(rng);
        c.mean = mu(rng);
        c.stddev = sd(rng);
        wsum += c.weight;
    }
    for (auto& c : comps) c.weight /= wsum;
    return Gmm(comps);
}

}  // namespace

TEST_CASE("standard normal cdf basics") {
    CHECK(standard_normal_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(standard_normal_cdf(40.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(standard_normal_cdf(-40.0) == doctest::Approx(0.0).epsilon(1e-15));
    // Cross-check against the quantile oracle at a few levels.
    for (double p : {0.01, 0.1, 0.5, 0.9, 0.975, 0.99}) {
        CHECK(standard_normal_cdf(oracle::normal_quantile(p)) == doctest::Approx(p).epsilon(1e-13));
    }
}

TEST_CASE("gmm cdf: unit normal and limits") {
    const Gmm g = Gmm::single(0.0, 1.0);
    CHECK(g.cdf(0.0) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(g.cdf(1e9) == doctest::Approx(1.0));
    CHECK(g.cdf(-1e9) == doctest::Approx(0.0));
}

TEST_CASE("gmm cdf: symmetric two-component mixture at midpoint") {
    const Gmm g({{0.5, 0.0, 1.0}, {0.5, 10.0, 1.0}});
    CHECK(g.cdf(5.0) == doctest::Approx(0.5).epsilon(1e-12));
    // Numerical integration oracle for a nearby point.
    const double q = oracle::simpson([&](double x) { return g.pdf(x); }, -20.0, 5.0, 40000);
    CHECK(g.cdf(5.0) == doctest::Approx(q).epsilon(1e-9));
}

TEST_CASE("gmm construction rejects bad parameters") {
    CHECK_THROWS(Gmm({{0.5, 0.0, 1.0}, {0.6, 1.0, 1.0}}));  // weights sum to 1.1
    CHECK_THROWS(Gmm({{1.0, 0.0, 0.0}}));                   // zero stddev
    CHECK_THROWS(Gmm({{1.0, 0.0, -1.0}}));                  // negative stddev
    CHECK_THROWS(Gmm(std::vector<GaussComponent>{}));       // empty
}

TEST_CASE("quantile: unit normal median and oracle point") {
    CHECK(Gmm::single(0.0, 1.0).quantile(0.5) == doctest::Approx(0.0).epsilon(1e-9));
    // N(3,2) at p = 0.975 equals 3 + 2 * z_{0.975}.
    const double z = oracle::normal_quantile(0.975);
    CHECK(Gmm::single(3.0, 2.0).quantile(0.975) == doctest::Approx(3.0 + 2.0 * z).epsilon(1e-8));
}

TEST_CASE("quantile: median of a symmetric independent sum") {
    LinearCombo combo;
    combo.add(1.0, Gmm::single(1.0, 1.0));
    combo.add(1.0, Gmm::single(2.0, 2.0));
    CHECK(combo.quantile(0.5) == doctest::Approx(3.0).epsilon(1e-9));
}

TEST_CASE("quantile rejects invalid p and censored combos") {
    const Gmm g = Gmm::single(0.0, 1.0);
    CHECK_THROWS(g.quantile(0.0));
    CHECK_THROWS(g.quantile(1.0));
    CHECK_THROWS(g.quantile(-0.5));
    LinearCombo combo;
    combo.add_censored(1.0, g, 0.5);
    CHECK_THROWS(combo.quantile(0.5));
}

TEST_CASE("quantile/cdf inverse property on random mixtures") {
    std::mt19937_64 rng(42);
    for (int k = 0; k < 25; ++k) {
        const Gmm g = random_gmm(rng);
        for (double p = 0.01; p < 1.0; p += 0.07) {
            const double q = g.quantile(p);
            CHECK(std::abs(g.cdf(q) - p) <= 1e-9);
        }
    }
}

TEST_CASE("quantile scaling: Q(cX, p) = c Q(X, p) for c > 0") {
    std::mt19937_64 rng(7);
    for (int k = 0; k < 10; ++k) {
        const Gmm g = random_gmm(rng);
        std::uniform_real_distribution<double> cs(0.1, 5.0);
        const double c = cs(rng);
        for (double p : {0.1, 0.3, 0.5, 0.7, 0.9}) {
            CHECK(g.scaled(c).quantile(p) == doctest::Approx(c * g.quantile(p)).epsilon(1e-7));
        }
    }
}

TEST_CASE("mc_quantile agrees with the analytic engine on uncensored combos") {
    std::mt19937_64 rng(11);
    for (int k = 0; k < 5; ++k) {
        LinearCombo combo;
        combo.add(0.5 + 0.1 * k, random_gmm(rng, 3));
        combo.add(1.0, random_gmm(rng, 3));
        for (double p : {0.1, 0.5, 0.9}) {
            const auto mc = mc_quantile(combo, p, 200000, 1234 + k);
            const double analytic = combo.quantile(p);
            CHECK(analytic >= mc.lo3);
            CHECK(analytic <= mc.hi3);
        }
    }
}

TEST_CASE("mc_quantile: unit normal median and cap point mass") {
    LinearCombo unit;
    unit.add(1.0, Gmm::single(0.0, 1.0));
    const auto mc = mc_quantile(unit, 0.5, 1000000, 99);
    CHECK(mc.lo3 <= 0.0);
    CHECK(mc.hi3 >= 0.0);

    // Censoring N(5,1) at 5 puts mass 0.5 at the cap, so any p >= 0.5
    // quantile is exactly the cap.
    LinearCombo capped;
    capped.add_censored(1.0, Gmm::single(5.0, 1.0), 5.0);
    const auto mc2 = mc_quantile(capped, 0.9, 100000, 7);
    CHECK(mc2.q == doctest::Approx(5.0));
}

TEST_CASE("mc determinism and serial/parallel equivalence") {
    LinearCombo combo;
    combo.add(1.0, Gmm({{0.4, 1.0, 0.5}, {0.6, 3.0, 1.5}}));
    std::vector<double> a(50000), b(50000), c(50000);
    mc_sample_combo(combo, 2024, a, ExecMode::Serial);
    mc_sample_combo(combo, 2024, b, ExecMode::Parallel);
    mc_sample_combo(combo, 2024, c, ExecMode::Serial);
    CHECK(a == b);
    CHECK(a == c);
    std::vector<double> d(50000);
    mc_sample_combo(combo, 2025, d, ExecMode::Serial);
    CHECK(a != d);
}

TEST_CASE("curtailment penalty: closed form vs quadrature") {
    // Unit normal, cap 10, rbar 0: integral_0^10 x phi(x) dx = phi(0) - phi(10).
    const Gmm g = Gmm::single(0.0, 1.0);
    const double expected = standard_normal_pdf(0.0) - standard_normal_pdf(10.0);
    CHECK(curtailment_penalty(g, 1.0, 10.0, 0.0) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(expected == doctest::Approx(0.39894).epsilon(1e-4));

    CHECK(curtailment_penalty(g, 3.5, 10.0, 10.0) == doctest::Approx(0.0));

    std::mt19937_64 rng(5);
    for (int k = 0; k < 20; ++k) {
        const Gmm m = random_gmm(rng);
        std::uniform_real_distribution<double> caps(5.0, 30.0);
        const double cap_max = caps(rng);
        std::uniform_real_distribution<double> rs(0.0, cap_max);
        const double rbar = rs(rng);
        const double kp = 1.0 + k * 0.3;
        const double closed = curtailment_penalty(m, kp, cap_max, rbar);
        const double quad = kp * oracle::trapezoid(
                                     [&](double x) { return (x - rbar) * m.pdf(x); }, rbar,
                                     cap_max, 100000);
        CHECK(std::abs(closed - quad) <= 1e-8 * kp * cap_max);
    }
}

TEST_CASE("penalty derivatives: finite differences, signs, convexity") {
    std::mt19937_64 rng(17);
    for (int k = 0; k < 15; ++k) {
        const Gmm m = random_gmm(rng);
        const double cap_max = 25.0;
        std::uniform_real_distribution<double> rs(0.05, cap_max - 0.05);
        const double rbar = rs(rng);
        const double kp = 2.0;
        const auto d = penalty_derivatives(m, kp, cap_max, rbar);
        CHECK(d.first <= 1e-12);
        CHECK(d.second >= 0.0);
        const double fd = oracle::central_diff(
            [&](double r) { return curtailment_penalty(m, kp, cap_max, r); }, rbar, 1e-5);
        CHECK(d.first == doctest::Approx(fd).epsilon(1e-6));
    }
    // At the cap the slope vanishes.
    const Gmm g = Gmm::single(1.0, 0.7);
    CHECK(penalty_derivatives(g, 1.0, 8.0, 8.0).first == doctest::Approx(0.0).epsilon(1e-12));

    // First derivative nondecreasing in rbar (convexity).
    const Gmm m({{0.3, 2.0, 1.0}, {0.7, 6.0, 2.0}});
    double prev = -1e300;
    for (double r = 0.0; r <= 12.0; r += 0.25) {
        const double s = penalty_derivatives(m, 1.5, 12.0, r).first;
        CHECK(s >= prev - 1e-12);
        prev = s;
    }
}

TEST_CASE("pathwise censoring dominance (same draws)") {
    // With identical underlying draws, each censored path is <= its
    // uncensored counterpart, so every empirical quantile is ordered.
    std::mt19937_64 rng(23);
    for (int inst = 0; inst < 10; ++inst) {
        const Gmm gw = random_gmm(rng, 3);
        const Gmm gs = random_gmm(rng, 3);
        std::uniform_real_distribution<double> cs(0.0, 3.0);
        std::uniform_real_distribution<double> capd(0.0, 15.0);
        const double c1 = cs(rng), c2 = cs(rng);
        const double cap1 = capd(rng), cap2 = capd(rng);

        LinearCombo proto;
        proto.add(1.0, gw);
        proto.add(1.0, gs);
        const std::size_t n = 100000;
        std::vector<double> dw(n), ds(n);
        std::vector<std::span<double>> spans{std::span(dw), std::span(ds)};
        mc_sample_terms(proto, 40 + inst, spans, ExecMode::Parallel);

        std::vector<double> censored(n), available(n);
        for (std::size_t i = 0; i < n; ++i) {
            available[i] = c1 * dw[i] + c2 * ds[i];
            censored[i] = c1 * std::min(dw[i], cap1) + c2 * std::min(ds[i], cap2);
        }
        for (double p : {0.1, 0.3, 0.5, 0.7, 0.9}) {
            const auto qc = quantile_of_draws(censored, p);
            const auto qa = quantile_of_draws(available, p);
            CHECK(qc.q <= qa.q + 1e-12);
        }
    }
}

TEST_CASE("censored quantile bound: identity, full-cap form, MC dominance") {
    const Gmm gw({{0.5, 4.0, 1.0}, {0.5, 8.0, 2.0}});
    const Gmm gs = Gmm::single(3.0, 1.5);

    SUBCASE("no censored terms: bound equals the exact quantile") {
        LinearCombo combo;
        combo.add(1.2, gw);
        combo.add(0.8, gs);
        const auto r = censored_quantile_bound(combo, {}, 0.9);
        CHECK(r.deterministic == 0.0);
        CHECK(r.value() == doctest::Approx(combo.quantile(0.9)).epsilon(1e-9));
    }

    SUBCASE("all censored terms capped: deterministic sum plus residual") {
        LinearCombo combo;
        combo.add_censored(1.2, gw, 5.0);
        combo.add_censored(0.8, gs, 2.0);
        combo.add(0.5, Gmm::single(1.0, 0.3));
        const auto r = censored_quantile_bound(combo, {0, 1}, 0.95);
        CHECK(r.deterministic == doctest::Approx(1.2 * 5.0 + 0.8 * 2.0));
        LinearCombo rest;
        rest.add(0.5, Gmm::single(1.0, 0.3));
        CHECK(r.residual_quantile == doctest::Approx(rest.quantile(0.95)).epsilon(1e-9));
    }

    SUBCASE("negative coefficient on a capped term is rejected") {
        LinearCombo combo;
        combo.add_censored(-1.0, gw, 5.0);
        CHECK_THROWS(censored_quantile_bound(combo, {0}, 0.5));
    }

    SUBCASE("bound dominates the MC quantile of the true censored combo") {
        std::mt19937_64 rng(31);
        for (int inst = 0; inst < 10; ++inst) {
            const Gmm a = random_gmm(rng, 2);
            const Gmm b = random_gmm(rng, 2);
            std::uniform_real_distribution<double> cs(0.0, 2.0);
            std::uniform_real_distribution<double> capd(1.0, 12.0);
            LinearCombo combo;
            combo.add_censored(cs(rng), a, capd(rng));
            combo.add_censored(cs(rng), b, capd(rng));
            for (const auto& cap_set :
                 std::vector<std::vector<std::size_t>>{{}, {0}, {1}, {0, 1}}) {
                for (double p : {0.3, 0.7, 0.95}) {
                    const auto bound = censored_quantile_bound(combo, cap_set, p);
                    const auto mc = mc_quantile(combo, p, 100000, 600 + inst);
                    CHECK(bound.value() >= mc.lo3 - 1e-9);
                }
            }
        }
    }
}
