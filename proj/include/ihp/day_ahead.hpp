#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ihp/case.hpp"
#include "ihp/conic.hpp"
#include "ihp/gmm.hpp"
#include "ihp/market.hpp"

namespace ihp {

/// Consumer demand aggregated to network locations, frozen before the
/// scheduling stages (prices do not re-clear inside them).
struct DemandView {
    std::vector<std::vector<double>> bus_power;     // [bus][t] MW
    std::vector<std::vector<double>> bus_reactive;  // [bus][t] MVar
    std::vector<std::vector<double>> node_heat;     // [heat node][t] MW
    std::vector<double> heat_total;                 // [t] MW
    std::vector<std::vector<double>> corridor_demand;  // [corridor][t], PTDF-weighted
};

DemandView make_demand_view(const CommunityCase& c, const EquilibriumOutcome& eq);

struct DayAheadOptions {
    double slack_weight_reserve = 1000.0;   // currency/MW
    double slack_weight_corridor = 1000.0;  // currency/MW
    int taylor_cuts = 20;
    /// Drop participation factors inside the corridor quantile sums
    /// (printed-form variant of the curtailment requirement rows).
    bool corridor_gamma_dropped = false;
    std::optional<RiskLevels> risk_override;
    SolveOptions solver;
};

/// One reformulated probabilistic row: deterministic linear part over the
/// decision variables, a random combo whose quantile bounds it, a risk
/// level and a direction.
struct ChanceRow {
    enum class Kind { ReserveUp, ReserveDown, CorridorUp, CorridorDown };
    Kind kind;
    int t = 0;
    int gen = -1;       // reserve rows
    int corridor = -1;  // corridor rows
    double level = 0.0;         // quantile level actually evaluated
    LinearCombo combo;          // random part (available distributions)
    double quantile = 0.0;      // Q(combo | level)
    std::vector<double> coeff;  // combo coefficient per renewable unit
};

struct ChanceSpec {
    std::vector<ChanceRow> rows;
    std::size_t rows_per_step = 0;
};

/// Reformulates the reserve and corridor chance constraints against the
/// uncurtailed availability distributions. Throws on a zero participation
/// factor (the affine substitution divides by it).
ChanceSpec build_chance_spec(const CommunityCase& c, const DayAheadOptions& opt = {});

struct SlackReport {
    std::vector<double> reserve_down;                 // [t] MW
    std::vector<std::vector<double>> corridor_up;     // [corridor][t]
    std::vector<std::vector<double>> corridor_down;   // [corridor][t]
    double weighted_objective = 0.0;
    int solver_iterations = 0;

    bool all_zero(double tol = 1e-7) const;
    double max_slack() const;
};

/// Weighted-slack relaxation over the probabilistic rows with the full
/// physical feasible set; identifies which constraints force curtailment.
SlackReport solve_slack_relaxation(const CommunityCase& c, const DemandView& demand,
                                   const DayAheadOptions& opt = {});

struct CurtailmentPlan {
    std::vector<std::vector<double>> cap;       // [unit][t] MW (capacity = none)
    std::vector<std::vector<char>> curtailed;   // [unit][t] chosen set membership
    std::vector<double> step_penalty;           // [t] closed-form penalty at the caps
    std::vector<double> step_epigraph;          // [t] cut-model lower bound
    double total_penalty = 0.0;
    bool any() const;
};

/// Chooses caps per step by enumerating curtailment subsets, tightening
/// each violated quantile requirement through the censored-sum bound, and
/// minimizing the piecewise-linear penalty model. Throws if no subset can
/// restore feasibility (names the constraint and step).
CurtailmentPlan schedule_curtailment(const CommunityCase& c, const SlackReport& slack,
                                     const DayAheadOptions& opt = {});

struct DaySchedule {
    // Indexed [g][t] / [r][t] / [line][t] / [bus][t] / [t].
    std::vector<std::vector<double>> gen_p, gen_q;
    std::vector<std::vector<double>> renew_sched;
    std::vector<std::vector<double>> cap;
    std::vector<double> charge, discharge, soc;        // electric storage, MW / MWh
    std::vector<double> heat_charge, heat_discharge, heat_soc;
    std::vector<std::vector<double>> plant_power, plant_gas;  // [plant][t]
    std::vector<std::vector<double>> line_p, line_q, line_cur;
    std::vector<std::vector<double>> bus_v;
    std::vector<std::vector<double>> supply_temp, return_temp;  // [node][t]

    std::vector<double> price_power, price_heat;    // mean consumer prices per t
    std::vector<double> demand_power, demand_heat;  // totals per t (base + elastic)
    DemandView demand;                              // frozen location-level demand

    double generation_cost = 0.0;
    double gas_cost = 0.0;
    double curtailment_penalty = 0.0;
    double total_cost = 0.0;       // generation + gas + penalty
    double socp_tightness = 0.0;   // max |P^2 + Q^2 - l v| over lines and steps
    int solver_iterations = 0;
};

DaySchedule solve_generation_schedule(const CommunityCase& c, const DemandView& demand,
                                      const EquilibriumOutcome& eq, const CurtailmentPlan& plan,
                                      const DayAheadOptions& opt = {});

struct DayAheadResult {
    EquilibriumOutcome equilibrium;
    SlackReport slack;
    CurtailmentPlan plan;
    DaySchedule schedule;
    bool curtailment_stage_ran = false;
};

/// Equilibrium -> slack relaxation -> (curtailment if any slack) -> final
/// schedule. Stage failures carry a stage label in the exception message.
DayAheadResult run_day_ahead(const CommunityCase& c, const DayAheadOptions& opt = {});

class PipelineError : public std::runtime_error {
  public:
    PipelineError(const std::string& stage, const std::string& what)
        : std::runtime_error("[" + stage + "] " + what), stage_(stage) {}
    const std::string& stage() const { return stage_; }

  private:
    std::string stage_;
};

}  // namespace ihp
