#pragma once

#include <cstdint>
#include <string>

#include "ihp/case.hpp"
#include "ihp/day_ahead.hpp"
#include "ihp/mc.hpp"

namespace ihp {

/// Empirical violation frequencies of the probabilistic guarantees under
/// the committed schedule: renewable availability is drawn per step, the
/// caps and the affine generator response are applied, and reserve and
/// corridor excursions are counted.
struct ChanceCheckReport {
    double max_reserve_up = 0.0;    // worst per-(generator, step) frequency
    double max_reserve_down = 0.0;
    double max_corridor_up = 0.0;   // worst per-(corridor, step) frequency
    double max_corridor_down = 0.0;
    int worst_up_gen = -1, worst_up_step = -1;
    int worst_down_gen = -1, worst_down_step = -1;
    std::size_t draws = 0;

    double worst() const;
};

ChanceCheckReport validate_chance_levels(const CommunityCase& c, const DaySchedule& schedule,
                                         std::size_t draws, std::uint64_t seed,
                                         ExecMode mode = ExecMode::Parallel);

}  // namespace ihp
