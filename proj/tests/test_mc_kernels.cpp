#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <vector>

#include "ihp/gmm.hpp"
#include "ihp/mc.hpp"
#include "ihp/sampling.hpp"

using namespace ihp;

namespace {
LinearCombo demo_combo() {
    LinearCombo c;
    c.add(1.0, Gmm({{0.3, 2.0, 0.5}, {0.7, 6.0, 1.2}}));
    c.add_censored(0.8, Gmm::single(4.0, 1.0), 4.5);
    return c;
}
}  // namespace

TEST_CASE("parallel fill matches the serial reference bit for bit") {
    const auto combo = demo_combo();
    for (std::size_t n : {1ul, 100ul, kMcBlock, kMcBlock + 1, 3 * kMcBlock + 17}) {
        std::vector<double> s(n), p(n);
        mc_sample_combo(combo, 77, s, ExecMode::Serial);
        mc_sample_combo(combo, 77, p, ExecMode::Parallel);
        CHECK(s == p);
    }
}

TEST_CASE("per-term fills are scheduling-independent and shared across terms") {
    const auto combo = demo_combo();
    const std::size_t n = 2 * kMcBlock + 5;
    std::vector<double> a0(n), a1(n), b0(n), b1(n);
    std::vector<std::span<double>> sa{std::span(a0), std::span(a1)};
    std::vector<std::span<double>> sb{std::span(b0), std::span(b1)};
    mc_sample_terms(combo, 5, sa, ExecMode::Serial);
    mc_sample_terms(combo, 5, sb, ExecMode::Parallel);
    CHECK(a0 == b0);
    CHECK(a1 == b1);
}

TEST_CASE("substreams differ across blocks and seeds") {
    CHECK(substream_seed(1, 0) != substream_seed(1, 1));
    CHECK(substream_seed(1, 0) != substream_seed(2, 0));
}

TEST_CASE("draw moments are sane") {
    LinearCombo c;
    c.add(1.0, Gmm::single(3.0, 2.0));
    std::vector<double> d(500000);
    mc_sample_combo(c, 13, d, ExecMode::Parallel);
    double m = 0.0;
    for (double x : d) m += x;
    m /= static_cast<double>(d.size());
    CHECK(m == doctest::Approx(3.0).epsilon(0.01));
    double v = 0.0;
    for (double x : d) v += (x - m) * (x - m);
    v /= static_cast<double>(d.size());
    CHECK(v == doctest::Approx(4.0).epsilon(0.02));
}
