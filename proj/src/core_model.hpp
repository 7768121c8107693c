#pragma once

// Shared physical model: network, storage, heat plants and renewable
// bounds over a window of steps, emitted into a ConicProgram. The
// scheduling stages and the real-time dispatcher wrap it with their own
// objectives and extra rows.

#include <optional>
#include <vector>

#include "ihp/case.hpp"
#include "ihp/conic.hpp"
#include "ihp/day_ahead.hpp"

namespace ihp::detail {

struct CoreRefs {
    int t0 = 0, t1 = 0;  // window [t0, t1)
    // Indexed [entity][t - t0].
    std::vector<std::vector<VarId>> gen_p, gen_q;
    std::vector<std::vector<VarId>> sch;  // scheduled renewable injection
    std::vector<std::vector<VarId>> bus_v;
    std::vector<std::vector<VarId>> line_p, line_q, line_cur;
    std::vector<VarId> es_charge, es_discharge, es_soc;
    std::vector<VarId> hs_charge, hs_discharge, hs_soc;
    std::vector<std::vector<VarId>> plant_p, plant_gas;
    std::vector<VarId> shed;   // per window step, emergency load shed (>= 0)
    std::vector<VarId> spill;  // per window step, emergency renewable dump

    int steps() const { return t1 - t0; }
};

struct CoreOptions {
    // Fixed renewable injection per [unit][t - t0] (realized values). When
    // absent, scheduled-injection variables bounded by the forecast are
    // created.
    std::optional<std::vector<std::vector<double>>> fixed_renewables;
    // Upper bounds on the scheduled injection (curtailment caps), applied
    // on top of the forecast bound.
    const CurtailmentPlan* caps = nullptr;
    // Pin storage powers and plant setpoints to an existing schedule
    // (real-time electric stage).
    const DaySchedule* pin_to_schedule = nullptr;
    // Storage SOC at the window entry (defaults to the case initial fill)
    // and a required SOC at the window exit (defaults to cyclic closure
    // for full-horizon windows, free otherwise).
    std::optional<double> es_soc_start, hs_soc_start;
    std::optional<double> es_soc_end, hs_soc_end;
    // Previous-step generator outputs for the ramp rows at the window
    // entry (absent: the first step is unconstrained).
    std::optional<std::vector<double>> prev_gen_p;
    // Emergency relief variables (real-time stage).
    bool with_emergency_slack = false;
    double emergency_weight = 1e5;
};

CoreRefs build_core(ConicProgram& prog, const CommunityCase& c, const DemandView& demand,
                    int t0, int t1, const CoreOptions& opt);

/// Quadratic generation + gas cost of the window (the final-schedule
/// objective).
void add_dispatch_cost(ConicProgram& prog, const CommunityCase& c, const CoreRefs& refs);

/// Max |P^2 + Q^2 - l v| over the window's lines (cone tightness).
double socp_tightness(const ConicProgram& prog, const CommunityCase& c, const CoreRefs& refs,
                      const SolveResult& r);

}  // namespace ihp::detail
