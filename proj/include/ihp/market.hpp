#pragma once

#include <iosfwd>
#include <vector>

#include "ihp/case.hpp"
#include "ihp/mc.hpp"

namespace ihp {

/// Usage-dependent price: base tariff plus slope times own demand.
double tlou_price(double base_price, double slope, double demand);

struct DemandPair {
    double power;  // MW
    double heat;   // MW thermal
};

/// Utility-maximizing split of the per-step budget at fixed prices:
/// power = alpha * budget / price_p, heat = (1-alpha) * budget / price_h.
/// The budget binds exactly at the optimum.
DemandPair optimal_demand(const Consumer& consumer, double price_p, double price_h);

/// Unique intersection of the rising usage-priced tariff and the falling
/// budget demand: the positive root of slope * d^2 + base * d = share.
double demand_price_root(double base_price, double slope, double budget_share);

struct ClosedFormPoint {
    DemandPair demand;
    double price_p, price_h;
};
ClosedFormPoint closed_form_equilibrium(const Consumer& consumer, const Tariff& tariff, int t);

struct EquilibriumTracePoint {
    int iter;
    double residual;
    double mean_price_p;
    double mean_price_h;
};

struct EquilibriumOutcome {
    bool converged = false;
    int iterations = 0;
    double final_residual = 0.0;
    std::vector<EquilibriumTracePoint> trace;

    // Indexed [consumer][step].
    std::vector<std::vector<double>> power_demand;
    std::vector<std::vector<double>> heat_demand;
    std::vector<std::vector<double>> power_price;
    std::vector<std::vector<double>> heat_price;

    // Per-step totals over consumers (elastic only).
    std::vector<double> total_power;
    std::vector<double> total_heat;

    double mean_power_price(int t) const;
    double mean_heat_price(int t) const;
};

struct EquilibriumOptions {
    double tolerance = 1e-6;  // MW, aggregate demand change per sweep
    int max_iter = 200;
    ExecMode mode = ExecMode::Parallel;
    double initial_scale = 1.0;  // scales the initial demand guess
};

/// Alternates price updates and demand updates until the aggregate demand
/// change falls below the tolerance. Switches to averaged (damped) updates
/// if the residual grows on two consecutive sweeps. Non-convergence is
/// reported in the outcome, not thrown.
EquilibriumOutcome fixed_point_equilibrium(const CommunityCase& c,
                                           const EquilibriumOptions& opt = {});

void write_equilibrium_trace_csv(const EquilibriumOutcome& out, std::ostream& os);

}  // namespace ihp
