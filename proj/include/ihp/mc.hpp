#pragma once

#include <cstdint>
#include <span>

#include "ihp/gmm.hpp"

namespace ihp {

/// Execution mode for the data-parallel kernels. Serial is the reference
/// implementation; Parallel runs the same per-block substreams under
/// OpenMP and produces bit-identical output.
enum class ExecMode { Serial, Parallel };

/// Block length of one RNG substream. Each block of draws is generated
/// from an independent engine seeded by substream_seed(seed, block), so
/// the fill is independent of scheduling.
inline constexpr std::size_t kMcBlock = 8192;

/// Fill `out` with independent draws of the combo.
void mc_sample_combo(const LinearCombo& combo, std::uint64_t seed, std::span<double> out,
                     ExecMode mode);

/// Fill per-term draws for a combo: out[t] receives the raw (uncensored,
/// unscaled) draw of term t for each sample, so callers can apply caps or
/// coefficients themselves and compare transformed variants pathwise.
void mc_sample_terms(const LinearCombo& combo, std::uint64_t seed,
                     std::span<std::span<double>> out, ExecMode mode);

}  // namespace ihp
