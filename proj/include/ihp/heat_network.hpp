#pragma once

#include <string>
#include <vector>

#include "ihp/case.hpp"

namespace ihp {

/// Temperature field of the constant-flow heating network for one step.
/// Fixed mass flows make the propagation linear; the field depends only
/// on the per-node heat offtake, not on the dispatch decisions.
struct HeatField {
    std::vector<double> supply_temp;  // deg C per node (case node order)
    std::vector<double> return_temp;
    double network_loss_mw = 0.0;  // heat lost through pipe walls (both sides)
    bool within_bounds = true;
    std::string violation;  // first bound violation, if any
};

/// Outlet temperature of a pipe with inlet `t_in` (exponential decay
/// toward ambient with rate loss_coeff*length/(cp*mass_flow)).
double pipe_outlet_temp(double t_in, double ambient, double length, double mass_flow,
                        double loss_coeff, double cp);

/// Propagates source supply setpoints through the supply side, applies
/// per-node extraction (demand_mw, case node order), and propagates the
/// return side back to the sources. Junctions mix flows by mass weight.
HeatField solve_heat_field(const HeatNetwork& net, const std::vector<double>& demand_mw);

}  // namespace ihp
