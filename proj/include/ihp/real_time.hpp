#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ihp/case.hpp"
#include "ihp/day_ahead.hpp"

namespace ihp {

/// Realized renewable availability per five-minute slot, held constant
/// within each hour, clamped to [0, capacity]. Actual output applies the
/// day-ahead caps on top.
struct Realization {
    std::vector<std::vector<double>> available;  // [unit][slot]
    std::vector<std::vector<double>> actual;     // [unit][slot], min(available, cap)
    std::uint64_t seed = 0;
};

Realization realize(const CommunityCase& c, const CurtailmentPlan& plan, std::uint64_t seed);

/// Availability supplied as a CSV trace (columns per unit, one row per
/// five-minute slot); caps applied the same way.
Realization realization_from_trace(const CommunityCase& c, const CurtailmentPlan& plan,
                                   const std::string& csv_path);

struct RtOptions {
    /// Price deviations as printed (signed) instead of as paid-per-MW of
    /// absolute adjustment.
    bool signed_deviation_cost = false;
    SolveOptions solver;
};

struct RtStep {
    int slot = 0;
    double adjust_cost = 0.0;        // deviation cost of the optimized point
    double affine_cost = 0.0;        // deviation cost of the warm-start point
    bool affine_feasible = false;    // warm start inside all generator boxes
    double balance_residual = 0.0;   // system-wide power-balance defect
    double shed = 0.0, spill = 0.0;  // emergency relief, MW
    std::vector<double> gen_power;   // adjusted outputs
};

struct HourHeat {
    int hour = 0;
    double balance_residual = 0.0;
    std::vector<double> plant_power, plant_gas;
    double heat_charge = 0.0, heat_discharge = 0.0;
};

struct RtDispatch {
    std::vector<RtStep> steps;
    std::vector<HourHeat> heat;
    double total_adjust_cost = 0.0;
    int emergencies = 0;
    double max_balance_residual = 0.0;
};

/// Affine reallocation of the renewable deviation by participation
/// factor: the warm start of every dispatch step.
std::vector<double> affine_point(const CommunityCase& c, const std::vector<double>& scheduled,
                                 double deviation);

/// Re-dispatches one five-minute slot against the frozen schedule.
RtStep dispatch_step(const CommunityCase& c, const DaySchedule& schedule,
                     const Realization& real, int slot, const std::vector<double>& prev_gen,
                     const RtOptions& opt = {});

/// Rolls over the full day: electric steps in order, heat re-dispatched
/// hourly with the electric result held fixed.
RtDispatch run_real_time(const CommunityCase& c, const DaySchedule& schedule,
                         const Realization& real, const RtOptions& opt = {});

}  // namespace ihp
