#include "ihp/mc.hpp"

#include <random>
#include <stdexcept>

#include "ihp/sampling.hpp"

namespace ihp {

void mc_sample_combo(const LinearCombo& combo, std::uint64_t seed, std::span<double> out,
                     ExecMode mode) {
    const std::size_t n = out.size();
    const std::size_t nblocks = (n + kMcBlock - 1) / kMcBlock;
    const auto fill_block = [&](std::size_t b) {
        std::mt19937_64 rng(substream_seed(seed, b));
        const std::size_t begin = b * kMcBlock;
        const std::size_t end = std::min(begin + kMcBlock, n);
        for (std::size_t i = begin; i < end; ++i) out[i] = sample_combo(combo, rng);
    };
    if (mode == ExecMode::Serial) {
        for (std::size_t b = 0; b < nblocks; ++b) fill_block(b);
    } else {
#pragma omp parallel for schedule(static)
        for (long long b = 0; b < static_cast<long long>(nblocks); ++b)
            fill_block(static_cast<std::size_t>(b));
    }
}

void mc_sample_terms(const LinearCombo& combo, std::uint64_t seed,
                     std::span<std::span<double>> out, ExecMode mode) {
    const std::size_t nterms = combo.terms().size();
    if (out.size() != nterms) throw std::invalid_argument("mc_sample_terms: span count mismatch");
    if (nterms == 0) return;
    const std::size_t n = out[0].size();
    for (const auto& s : out)
        if (s.size() != n) throw std::invalid_argument("mc_sample_terms: ragged spans");
    const std::size_t nblocks = (n + kMcBlock - 1) / kMcBlock;
    const auto fill_block = [&](std::size_t b) {
        std::mt19937_64 rng(substream_seed(seed, b));
        const std::size_t begin = b * kMcBlock;
        const std::size_t end = std::min(begin + kMcBlock, n);
        for (std::size_t i = begin; i < end; ++i)
            for (std::size_t t = 0; t < nterms; ++t)
                out[t][i] = sample_gmm(combo.terms()[t].dist, rng);
    };
    if (mode == ExecMode::Serial) {
        for (std::size_t b = 0; b < nblocks; ++b) fill_block(b);
    } else {
#pragma omp parallel for schedule(static)
        for (long long b = 0; b < static_cast<long long>(nblocks); ++b)
            fill_block(static_cast<std::size_t>(b));
    }
}

}  // namespace ihp
