#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "ihp/gmm.hpp"

namespace ihp {

struct Generator {
    std::string id;
    int bus = 0;
    double cost_a = 0.0;  // currency/MW^2
    double cost_b = 0.0;  // currency/MW
    double cost_c = 0.0;  // currency
    double p_min = 0.0, p_max = 0.0;        // MW
    double ramp_up = 0.0, ramp_down = 0.0;  // MW per step
    double participation = 0.0;             // share of renewable deviation absorbed
    double adjust_cost = 0.0;               // currency/MW of real-time deviation
    double q_min = 0.0, q_max = 0.0;        // MVar

    bool operator==(const Generator&) const = default;
};

enum class RenewableKind { Wind, Solar };

struct RenewableUnit {
    std::string id;
    int bus = 0;
    RenewableKind kind = RenewableKind::Wind;
    double capacity = 0.0;   // MW
    double penalty_k = 0.0;  // currency/MWh of expected spill above the cap
    std::vector<Gmm> availability;  // per step
    std::vector<double> forecast;   // MW per step

    bool operator==(const RenewableUnit& o) const;
};

struct HeatPlant {
    std::string id;
    int bus = 0;        // electricity offtake of the power-to-heat unit
    int heat_node = 0;  // injection node
    double eff_power_to_heat = 1.0;
    double eff_gas_to_heat = 1.0;
    double p_min = 0.0, p_max = 0.0;      // MW electric
    double gas_min = 0.0, gas_max = 0.0;  // MW thermal of gas
    std::vector<double> gas_price;        // currency/MWh per step

    bool operator==(const HeatPlant&) const = default;
};

struct SharedStorage {
    double capacity_kwh = 0.0;
    double charge_rate = 0.0;     // max charge power as a fraction of capacity per hour
    double discharge_rate = 0.0;  // same for discharge
    double soc_min = 0.0, soc_max = 1.0;  // fractions of capacity
    double eff_charge = 1.0, eff_discharge = 1.0;
    double initial_kwh = 0.0;
    double step_hours = 1.0;
    int location = 0;  // bus for the electric unit, heat node for the thermal one

    double capacity_mwh() const { return capacity_kwh / 1000.0; }
    double initial_mwh() const { return initial_kwh / 1000.0; }
    double max_charge_mw() const { return charge_rate * capacity_mwh(); }
    double max_discharge_mw() const { return discharge_rate * capacity_mwh(); }

    bool operator==(const SharedStorage&) const = default;
};

struct Consumer {
    std::string id;
    int bus = 0;
    int heat_node = 0;
    double alpha = 0.5;   // utility preference, in (0,1)
    double budget = 0.0;  // currency per step on elastic consumption
    std::vector<double> base_power;     // MW, inelastic
    std::vector<double> base_heat;      // MW thermal, inelastic
    std::vector<double> base_reactive;  // MVar, optional (defaults to zero)

    bool operator==(const Consumer&) const = default;
};

struct Bus {
    int id = 0;
    double v_min_sq = 0.81;  // p.u.^2
    double v_max_sq = 1.21;

    bool operator==(const Bus&) const = default;
};

struct Line {
    int from = 0, to = 0;
    double r = 0.0, x = 0.0;   // p.u.
    double flow_max = 0.0;     // MW
    double current_max = 0.0;  // p.u.^2 bound on the current square

    bool operator==(const Line&) const = default;
};

/// Monitored transmission corridor with a firm limit. PTDFs are given per
/// bus; loads enter the corridor flow with a negative sign.
struct MonitoredCorridor {
    std::string id;
    double limit = 0.0;            // MW
    std::vector<double> bus_ptdf;  // one entry per bus

    bool operator==(const MonitoredCorridor&) const = default;
};

struct RiskLevels {
    double alpha_up = 0.05;
    double alpha_dr = 0.05;
    double alpha_line_up = 0.05;
    double alpha_line_dn = 0.05;

    bool operator==(const RiskLevels&) const = default;
};

struct PowerNetwork {
    int root_bus = 0;
    double root_v_sq = 1.0;
    std::vector<Bus> buses;
    std::vector<Line> lines;
    std::vector<MonitoredCorridor> corridors;

    bool operator==(const PowerNetwork&) const = default;
};

enum class HeatNodeKind { Source, Load, Mix };

struct HeatNode {
    int id = 0;
    HeatNodeKind kind = HeatNodeKind::Mix;
    double extraction_flow = 0.0;  // kg/s through the consumer branch (loads)
    double supply_min = 0.0, supply_max = 150.0;  // deg C
    double return_min = 0.0, return_max = 150.0;
    double supply_setpoint = 0.0;  // deg C, sources only

    bool operator==(const HeatNode&) const = default;
};

struct HeatPipe {
    int from = 0, to = 0;
    double length = 0.0;      // m
    double mass_flow = 0.0;   // kg/s
    double loss_coeff = 0.0;  // W/(m K)

    bool operator==(const HeatPipe&) const = default;
};

struct HeatNetwork {
    double ambient = 10.0;  // deg C
    double cp = 4182.0;     // J/(kg K)
    std::vector<HeatNode> nodes;
    std::vector<HeatPipe> pipes;

    bool operator==(const HeatNetwork&) const = default;
};

struct Tariff {
    std::vector<double> base_power_price;  // currency/MWh per step
    std::vector<double> base_heat_price;
    double slope = 0.0;  // currency/MWh per MW of own demand

    bool operator==(const Tariff&) const = default;
};

struct CommunityCase {
    int schema_version = 1;
    int horizon = 24;
    double step_hours = 1.0;
    double rt_step_minutes = 5.0;

    std::vector<Generator> generators;
    std::vector<RenewableUnit> renewables;
    std::vector<HeatPlant> heat_plants;
    SharedStorage storage_electric;
    SharedStorage storage_heat;
    std::vector<Consumer> consumers;
    PowerNetwork power;
    HeatNetwork heat;
    Tariff tariff;
    RiskLevels risk;

    int rt_steps_per_hour() const { return static_cast<int>(60.0 / rt_step_minutes + 0.5); }
    int rt_steps() const { return horizon * rt_steps_per_hour(); }

    bool operator==(const CommunityCase&) const = default;
};

struct Diagnostic {
    enum class Severity { Error, Warning };
    Severity severity;
    std::string path;
    std::string message;
};

class CaseError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// All invariant checks; never throws on a parseable case. Empty result
/// means the case is valid.
std::vector<Diagnostic> validate_case(const CommunityCase& c);

/// Parse + validate; throws CaseError naming the first violated invariant.
CommunityCase load_case(const std::string& path);

void save_case(const CommunityCase& c, const std::string& path);
std::string case_to_json_string(const CommunityCase& c);
CommunityCase case_from_json_string(const std::string& text);

/// Synthetic community: 33-bus radial feeder, 32-node district heating
/// tree, three dispatchable generators, one wind and one solar unit,
/// shared electric and thermal storage, 200 consumers. The tight variant
/// shrinks the downward reserve and the monitored corridor so that the
/// relaxation stage reports nonzero slack.
CommunityCase build_reference_case(bool tight = false);

}  // namespace ihp
