#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "ihp/case.hpp"
#include "ihp/market.hpp"
#include "oracles.hpp"

using namespace ihp;

namespace {

// One consumer, flat tariff, unit horizon: the smallest market worth running.
CommunityCase micro_case(double alpha, double budget, double base_p, double base_h, double slope) {
    CommunityCase c;
    c.horizon = 1;
    c.power.root_bus = 0;
    c.power.buses.push_back({0, 0.81, 1.21});
    c.heat.nodes.push_back({0, HeatNodeKind::Source, 0.0, 60.0, 110.0, 20.0, 95.0, 95.0});
    Consumer n;
    n.id = "c1";
    n.bus = 0;
    n.heat_node = 0;
    n.alpha = alpha;
    n.budget = budget;
    n.base_power = {0.0};
    n.base_heat = {0.0};
    c.consumers.push_back(n);
    c.tariff.base_power_price = {base_p};
    c.tariff.base_heat_price = {base_h};
    c.tariff.slope = slope;
    return c;
}

double utility(double l, double h, double alpha) {
    return std::pow(l, alpha) * std::pow(h, 1.0 - alpha);
}

}  // namespace

TEST_CASE("tlou price: base plus slope times demand") {
    CHECK(tlou_price(0.1, 0.01, 10.0) == doctest::Approx(0.2));
    CHECK(tlou_price(0.1, 0.0, 123.0) == doctest::Approx(0.1));
    CHECK(tlou_price(0.1, 0.01, 0.0) == doctest::Approx(0.1));
    CHECK_THROWS(tlou_price(0.1, 0.01, -1.0));
}

TEST_CASE("optimal demand: direct substitution and exact budget") {
    Consumer n;
    n.alpha = 0.3;
    n.budget = 1.0;
    auto d = optimal_demand(n, 1.0, 1.0);
    CHECK(d.power == doctest::Approx(0.3));
    CHECK(d.heat == doctest::Approx(0.7));

    n.alpha = 0.5;
    n.budget = 2.0;
    d = optimal_demand(n, 2.0, 1.0);
    CHECK(d.power == doctest::Approx(0.5));
    CHECK(d.heat == doctest::Approx(1.0));

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> ad(0.05, 0.95), bd(0.1, 10.0), pd(0.01, 5.0);
    for (int i = 0; i < 200; ++i) {
        n.alpha = ad(rng);
        n.budget = bd(rng);
        const double lp = pd(rng), hp = pd(rng);
        d = optimal_demand(n, lp, hp);
        CHECK(std::abs(lp * d.power + hp * d.heat - n.budget) <= 1e-12 * std::max(1.0, n.budget));
    }
    CHECK_THROWS(optimal_demand(n, 0.0, 1.0));
}

TEST_CASE("closed form: worked quadratic root") {
    // slope 0.01, base 0.1, alpha*budget = 30 -> l* = 50, price 0.6.
    CHECK(demand_price_root(0.1, 0.01, 30.0) == doctest::Approx(50.0).epsilon(1e-12));
    // Degenerate slope: budget share over base price.
    CHECK(demand_price_root(0.1, 0.0, 30.0) == doctest::Approx(300.0));
    CHECK_THROWS(demand_price_root(0.0, 0.0, 30.0));
}

TEST_CASE("fixed point reproduces the closed form on the worked instance") {
    // alpha * budget = 30 with alpha 0.3 -> budget 100; heat side gets 70.
    auto c = micro_case(0.3, 100.0, 0.1, 0.1, 0.01);
    const auto out = fixed_point_equilibrium(c);
    REQUIRE(out.converged);
    CHECK(out.power_demand[0][0] == doctest::Approx(50.0).epsilon(1e-7));
    CHECK(out.power_price[0][0] == doctest::Approx(0.6).epsilon(1e-6));
    const auto cf = closed_form_equilibrium(c.consumers[0], c.tariff, 0);
    CHECK(std::abs(out.power_demand[0][0] - cf.demand.power) <= 1e-6);
    CHECK(std::abs(out.heat_demand[0][0] - cf.demand.heat) <= 1e-6);
}

TEST_CASE("zero slope converges in one sweep") {
    auto c = micro_case(0.4, 10.0, 2.0, 1.0, 0.0);
    const auto out = fixed_point_equilibrium(c);
    REQUIRE(out.converged);
    CHECK(out.iterations <= 2);  // first sweep lands exactly, second certifies
    CHECK(out.power_demand[0][0] == doctest::Approx(0.4 * 10.0 / 2.0));
    CHECK(out.heat_demand[0][0] == doctest::Approx(0.6 * 10.0 / 1.0));
}

TEST_CASE("fixed point matches closed form across random parameters") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> ad(0.1, 0.9), bd(0.2, 50.0), base(0.01, 2.0),
        slope(1e-4, 0.5);
    for (int i = 0; i < 100; ++i) {
        auto c = micro_case(ad(rng), bd(rng), base(rng), base(rng), slope(rng));
        const auto out = fixed_point_equilibrium(c);
        REQUIRE(out.converged);
        CHECK(out.iterations <= 200);
        const auto cf = closed_form_equilibrium(c.consumers[0], c.tariff, 0);
        CHECK(std::abs(out.power_demand[0][0] - cf.demand.power) <= 1e-6);
        CHECK(std::abs(out.heat_demand[0][0] - cf.demand.heat) <= 1e-6);
    }
}

TEST_CASE("uniqueness: initial scale does not move the fixed point") {
    for (double scale : {0.1, 10.0}) {
        auto c = micro_case(0.3, 100.0, 0.1, 0.1, 0.01);
        EquilibriumOptions o;
        o.initial_scale = scale;
        const auto out = fixed_point_equilibrium(c, o);
        REQUIRE(out.converged);
        CHECK(out.power_demand[0][0] == doctest::Approx(50.0).epsilon(1e-7));
    }
}

TEST_CASE("zero base price needs damping and still converges") {
    auto c = micro_case(0.5, 8.0, 0.0, 0.0, 0.02);
    const auto out = fixed_point_equilibrium(c);
    REQUIRE(out.converged);
    // Root of 0.02 d^2 = 4 -> d = sqrt(200).
    CHECK(out.power_demand[0][0] == doctest::Approx(std::sqrt(200.0)).epsilon(1e-6));
}

TEST_CASE("budget identity holds at the returned point") {
    auto c = micro_case(0.25, 5.0, 0.5, 0.3, 0.05);
    const auto out = fixed_point_equilibrium(c);
    REQUIRE(out.converged);
    const double lhs = out.power_price[0][0] * out.power_demand[0][0] +
                       out.heat_price[0][0] * out.heat_demand[0][0];
    CHECK(lhs == doctest::Approx(5.0).epsilon(1e-9));
}

TEST_CASE("marginal utility signs at returned demands") {
    auto c = micro_case(0.3, 100.0, 0.1, 0.1, 0.01);
    const auto out = fixed_point_equilibrium(c);
    REQUIRE(out.converged);
    const double l = out.power_demand[0][0], h = out.heat_demand[0][0];
    const double eps = 1e-5;
    const double du_dl =
        (utility(l + eps, h, 0.3) - utility(l - eps, h, 0.3)) / (2.0 * eps);
    const double du_dh =
        (utility(l, h + eps, 0.3) - utility(l, h - eps, 0.3)) / (2.0 * eps);
    CHECK(du_dl > 0.0);
    CHECK(du_dh > 0.0);
    const double d2l =
        (utility(l + eps, h, 0.3) - 2.0 * utility(l, h, 0.3) + utility(l - eps, h, 0.3)) /
        (eps * eps);
    const double d2h =
        (utility(l, h + eps, 0.3) - 2.0 * utility(l, h, 0.3) + utility(l, h - eps, 0.3)) /
        (eps * eps);
    CHECK(d2l < 0.0);
    CHECK(d2h < 0.0);
}

TEST_CASE("comparative statics: power rises and heat falls with alpha") {
    double prev_l = -1.0, prev_h = 1e18;
    for (double a : {0.1, 0.3, 0.5, 0.7, 0.9}) {
        auto c = micro_case(a, 20.0, 0.2, 0.2, 0.01);
        const auto out = fixed_point_equilibrium(c);
        REQUIRE(out.converged);
        CHECK(out.total_power[0] > prev_l);
        CHECK(out.total_heat[0] < prev_h);
        prev_l = out.total_power[0];
        prev_h = out.total_heat[0];
    }
}

TEST_CASE("trace export carries the expected header and final residual") {
    auto c = micro_case(0.3, 100.0, 0.1, 0.1, 0.01);
    const auto out = fixed_point_equilibrium(c);
    std::ostringstream os;
    write_equilibrium_trace_csv(out, os);
    const std::string s = os.str();
    CHECK(s.rfind("iter,residual,mean_price_p,mean_price_h\n", 0) == 0);
    REQUIRE(!out.trace.empty());
    CHECK(out.trace.back().residual < 1e-6);
}

TEST_CASE("reference case equilibrium converges with a finite trace") {
    const auto c = build_reference_case();
    const auto out = fixed_point_equilibrium(c);
    REQUIRE(out.converged);
    CHECK(out.final_residual < 1e-6);
    for (const auto& p : out.trace) CHECK(std::isfinite(p.residual));
    // Serial and parallel sweeps agree exactly.
    EquilibriumOptions o;
    o.mode = ExecMode::Serial;
    const auto out2 = fixed_point_equilibrium(c, o);
    CHECK(out.power_demand == out2.power_demand);
    CHECK(out.heat_demand == out2.heat_demand);
}
