#include "ihp/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "ihp/mc.hpp"

namespace ihp {

std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double sample_normal(std::mt19937_64& rng) {
    // Guard against log(0).
    double u1 = uniform01(rng);
    while (u1 <= 0.0) u1 = uniform01(rng);
    const double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double sample_gmm(const Gmm& dist, std::mt19937_64& rng) {
    const auto& comps = dist.components();
    double u = uniform01(rng);
    const GaussComponent* chosen = &comps.back();
    for (const auto& c : comps) {
        if (u < c.weight) {
            chosen = &c;
            break;
        }
        u -= c.weight;
    }
    return chosen->mean + chosen->stddev * sample_normal(rng);
}

double sample_combo(const LinearCombo& combo, std::mt19937_64& rng) {
    double v = 0.0;
    for (const auto& t : combo.terms()) {
        double draw = sample_gmm(t.dist, rng);
        if (t.censored) draw = std::min(draw, t.cap);
        v += t.coeff * draw;
    }
    return v;
}

McQuantile quantile_of_draws(std::vector<double> draws, double p) {
    if (draws.empty()) throw std::invalid_argument("quantile_of_draws: no draws");
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("quantile_of_draws: p in (0,1)");
    std::sort(draws.begin(), draws.end());
    const double n = static_cast<double>(draws.size());
    const double sp = std::sqrt(p * (1.0 - p) / n);
    auto order_stat = [&](double level) {
        const double k = std::ceil(level * n);
        const auto idx = static_cast<std::ptrdiff_t>(k) - 1;
        const auto clamped =
            std::clamp<std::ptrdiff_t>(idx, 0, static_cast<std::ptrdiff_t>(draws.size()) - 1);
        return draws[static_cast<std::size_t>(clamped)];
    };
    return {order_stat(p), order_stat(p - 3.0 * sp), order_stat(p + 3.0 * sp), draws.size()};
}

McQuantile mc_quantile(const LinearCombo& combo, double p, std::size_t n, std::uint64_t seed) {
    if (n < 1000) throw std::invalid_argument("mc_quantile: need at least 1000 draws");
    std::vector<double> draws(n);
    mc_sample_combo(combo, seed, draws, ExecMode::Parallel);
    return quantile_of_draws(std::move(draws), p);
}

}  // namespace ihp
