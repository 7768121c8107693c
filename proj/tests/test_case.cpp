#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "ihp/case.hpp"
#include "ihp/heat_network.hpp"

using namespace ihp;

namespace {
int count_errors(const std::vector<Diagnostic>& d) {
    int n = 0;
    for (const auto& x : d)
        if (x.severity == Diagnostic::Severity::Error) ++n;
    return n;
}
int count_warnings(const std::vector<Diagnostic>& d) {
    int n = 0;
    for (const auto& x : d)
        if (x.severity == Diagnostic::Severity::Warning) ++n;
    return n;
}
}  // namespace

TEST_CASE("reference case has the expected topology and validates cleanly") {
    const auto c = build_reference_case();
    CHECK(c.power.buses.size() == 33);
    CHECK(c.power.lines.size() == 32);
    CHECK(c.heat.nodes.size() == 32);
    CHECK(c.heat.pipes.size() == 31);
    CHECK(c.consumers.size() == 200);
    CHECK(c.generators.size() == 3);
    CHECK(c.renewables.size() == 2);
    const auto diags = validate_case(c);
    for (const auto& d : diags)
        MESSAGE(d.path, ": ", d.message);
    CHECK(diags.empty());

    const auto tight = build_reference_case(true);
    CHECK(validate_case(tight).empty());
}

TEST_CASE("round-trip: save then load gives a structurally equal case") {
    const auto c = build_reference_case();
    const auto path = std::filesystem::temp_directory_path() / "ihp_roundtrip_case.json";
    save_case(c, path.string());
    const auto c2 = load_case(path.string());
    CHECK(c == c2);
    std::filesystem::remove(path);
}

TEST_CASE("json round-trip through strings") {
    const auto c = build_reference_case(true);
    const auto c2 = case_from_json_string(case_to_json_string(c));
    CHECK(c == c2);
}

TEST_CASE("storage SOC bound violation is named") {
    auto c = build_reference_case();
    c.storage_electric.soc_min = 0.95;  // above soc_max
    const auto diags = validate_case(c);
    REQUIRE(count_errors(diags) >= 1);
    bool found = false;
    for (const auto& d : diags)
        if (d.path.find("storage_electric") != std::string::npos &&
            d.message.find("soc_min") != std::string::npos)
            found = true;
    CHECK(found);
}

TEST_CASE("participation factors must sum to one") {
    auto c = build_reference_case();
    c.generators[0].participation = 0.3;  // sum becomes 0.8
    const auto diags = validate_case(c);
    REQUIRE(count_errors(diags) == 1);
    CHECK(diags[0].path == "generators");
    CHECK(diags[0].message.find("participation") != std::string::npos);
}

TEST_CASE("consumer preference outside (0,1) is an error") {
    auto c = build_reference_case();
    c.consumers[7].alpha = 1.2;
    const auto diags = validate_case(c);
    REQUIRE(count_errors(diags) == 1);
    CHECK(diags[0].path.find("consumers[7]") != std::string::npos);
}

TEST_CASE("unreferenced heat load node draws a warning") {
    auto c = build_reference_case();
    // Point every consumer on node 3 somewhere else.
    for (auto& n : c.consumers)
        if (n.heat_node == 3) n.heat_node = 4;
    const auto diags = validate_case(c);
    CHECK(count_errors(diags) == 0);
    REQUIRE(count_warnings(diags) >= 1);
    bool found = false;
    for (const auto& d : diags)
        if (d.message.find("not referenced") != std::string::npos) found = true;
    CHECK(found);
}

TEST_CASE("missing optional reactive series defaults with a warning") {
    auto c = build_reference_case();
    c.consumers[0].base_reactive.clear();
    const auto diags = validate_case(c);
    CHECK(count_errors(diags) == 0);
    REQUIRE(count_warnings(diags) == 1);
    CHECK(diags[0].path.find("base_reactive") != std::string::npos);
}

TEST_CASE("load_case throws on violated invariants and missing files") {
    auto c = build_reference_case();
    c.risk.alpha_up = 0.7;
    const auto path = std::filesystem::temp_directory_path() / "ihp_bad_case.json";
    save_case(c, path.string());
    CHECK_THROWS_AS(load_case(path.string()), CaseError);
    std::filesystem::remove(path);
    CHECK_THROWS_AS(load_case("/nonexistent/case.json"), CaseError);
}

TEST_CASE("validation is total on structurally odd cases") {
    CommunityCase c;  // empty everything
    const auto diags = validate_case(c);
    CHECK(count_errors(diags) >= 1);  // never throws
}

TEST_CASE("heat field: setpoint propagation, drops, mixing hull") {
    const auto c = build_reference_case();
    std::vector<double> demand(c.heat.nodes.size(), 0.0);
    for (std::size_t i = 0; i < c.heat.nodes.size(); ++i)
        if (c.heat.nodes[i].kind == HeatNodeKind::Load) demand[i] = 0.05;
    const auto f = solve_heat_field(c.heat, demand);
    CHECK(f.within_bounds);
    // Source at its setpoint; every downstream supply temperature strictly
    // between ambient and the setpoint.
    CHECK(f.supply_temp[0] == doctest::Approx(95.0));
    for (std::size_t i = 1; i < f.supply_temp.size(); ++i) {
        CHECK(f.supply_temp[i] < 95.0);
        CHECK(f.supply_temp[i] > c.heat.ambient);
    }
    // Returns sit below supply wherever heat is drawn.
    for (std::size_t i = 0; i < f.supply_temp.size(); ++i)
        if (demand[i] > 0.0) CHECK(f.return_temp[i] < f.supply_temp[i]);
    CHECK(f.network_loss_mw > 0.0);
}

TEST_CASE("pipe outlet: zero loss or zero length is exact identity") {
    CHECK(pipe_outlet_temp(80.0, 10.0, 0.0, 5.0, 0.25, 4182.0) == doctest::Approx(80.0));
    CHECK(pipe_outlet_temp(80.0, 10.0, 300.0, 5.0, 0.0, 4182.0) == doctest::Approx(80.0));
    const double t2 = pipe_outlet_temp(80.0, 10.0, 300.0, 5.0, 0.25, 4182.0);
    CHECK(t2 < 80.0);
    CHECK(t2 > 10.0);
}
