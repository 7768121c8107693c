#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "ihp/gmm.hpp"

namespace ihp {

/// splitmix64 mix of (seed, index); used to derive independent substream
/// seeds so that results do not depend on thread scheduling.
std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t index);

/// Uniform in [0,1) from the top 53 bits of the engine output. The engine
/// sequence is specified by the standard, so draws are reproducible across
/// platforms.
double uniform01(std::mt19937_64& rng);

/// Box-Muller transform (cosine branch only, no cached spare).
double sample_normal(std::mt19937_64& rng);

/// Draw from a mixture: pick a component by weight, then a normal.
double sample_gmm(const Gmm& dist, std::mt19937_64& rng);

/// Draw the combo value; censored terms apply min(draw, cap).
double sample_combo(const LinearCombo& combo, std::mt19937_64& rng);

struct McQuantile {
    double q;      ///< empirical p-quantile (order statistic at ceil(p n))
    double lo3;    ///< order statistic at level p - 3 sqrt(p(1-p)/n)
    double hi3;    ///< order statistic at level p + 3 sqrt(p(1-p)/n)
    std::size_t n;
};

/// Empirical p-quantile of n seeded draws with a distribution-free
/// three-sigma order-statistic band.
McQuantile mc_quantile(const LinearCombo& combo, double p, std::size_t n, std::uint64_t seed);

/// Same, reusing a pre-sampled (sorted or unsorted) vector of draws.
McQuantile quantile_of_draws(std::vector<double> draws, double p);

}  // namespace ihp
