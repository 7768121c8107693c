#include "ihp/case.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace ihp {

bool RenewableUnit::operator==(const RenewableUnit& o) const {
    if (id != o.id || bus != o.bus || kind != o.kind || capacity != o.capacity ||
        penalty_k != o.penalty_k || forecast != o.forecast ||
        availability.size() != o.availability.size())
        return false;
    for (std::size_t t = 0; t < availability.size(); ++t) {
        const auto& a = availability[t].components();
        const auto& b = o.availability[t].components();
        if (a.size() != b.size()) return false;
        for (std::size_t i = 0; i < a.size(); ++i)
            if (a[i].weight != b[i].weight || a[i].mean != b[i].mean ||
                a[i].stddev != b[i].stddev)
                return false;
    }
    return true;
}

namespace {

class Checker {
  public:
    explicit Checker(std::vector<Diagnostic>& out) : out_(out) {}

    void error(const std::string& path, const std::string& msg) {
        out_.push_back({Diagnostic::Severity::Error, path, msg});
    }
    void warn(const std::string& path, const std::string& msg) {
        out_.push_back({Diagnostic::Severity::Warning, path, msg});
    }
    void require(bool ok, const std::string& path, const std::string& msg) {
        if (!ok) error(path, msg);
    }

  private:
    std::vector<Diagnostic>& out_;
};

std::string at(const std::string& group, std::size_t i, const std::string& field = {}) {
    std::ostringstream os;
    os << group << "[" << i << "]";
    if (!field.empty()) os << "." << field;
    return os.str();
}

}  // namespace

std::vector<Diagnostic> validate_case(const CommunityCase& c) {
    std::vector<Diagnostic> diags;
    Checker ck(diags);
    const std::size_t T = static_cast<std::size_t>(c.horizon);

    ck.require(c.schema_version == 1, "schema_version", "unsupported schema version");
    ck.require(c.horizon >= 1, "horizon", "horizon must be at least one step");
    ck.require(c.step_hours > 0.0, "step_hours", "step length must be positive");
    ck.require(c.rt_step_minutes > 0.0 && std::abs(60.0 / c.rt_step_minutes -
                                                   std::round(60.0 / c.rt_step_minutes)) < 1e-9,
               "rt_step_minutes", "real-time step must divide one hour");

    std::set<int> bus_ids;
    for (std::size_t i = 0; i < c.power.buses.size(); ++i) {
        const auto& b = c.power.buses[i];
        if (!bus_ids.insert(b.id).second) ck.error(at("power_network.buses", i), "duplicate bus id");
        ck.require(b.v_min_sq > 0.0 && b.v_min_sq <= b.v_max_sq, at("power_network.buses", i),
                   "voltage-square bounds must satisfy 0 < v_min_sq <= v_max_sq");
    }
    auto has_bus = [&](int id) { return bus_ids.count(id) > 0; };
    ck.require(has_bus(c.power.root_bus), "power_network.root_bus", "root bus does not exist");

    // Radial feeder: every non-root bus has exactly one parent line and is
    // reachable from the root.
    {
        std::map<int, std::vector<std::pair<int, int>>> adj;  // bus -> (other bus, line idx)
        for (std::size_t i = 0; i < c.power.lines.size(); ++i) {
            const auto& l = c.power.lines[i];
            if (!has_bus(l.from) || !has_bus(l.to)) {
                ck.error(at("power_network.lines", i), "line references a missing bus");
                continue;
            }
            ck.require(l.r >= 0.0 && l.x >= 0.0, at("power_network.lines", i),
                       "line impedance must be nonnegative");
            ck.require(l.flow_max > 0.0, at("power_network.lines", i),
                       "line flow bound must be positive");
            adj[l.from].push_back({l.to, static_cast<int>(i)});
            adj[l.to].push_back({l.from, static_cast<int>(i)});
        }
        if (c.power.lines.size() + 1 != c.power.buses.size()) {
            ck.error("power_network.lines", "feeder must be radial (lines = buses - 1)");
        } else {
            std::set<int> seen{c.power.root_bus};
            std::vector<int> stack{c.power.root_bus};
            while (!stack.empty()) {
                const int u = stack.back();
                stack.pop_back();
                for (auto [v, li] : adj[u])
                    if (seen.insert(v).second) stack.push_back(v);
            }
            ck.require(seen.size() == c.power.buses.size(), "power_network",
                       "feeder is not connected to the root bus");
        }
    }
    for (std::size_t i = 0; i < c.power.corridors.size(); ++i) {
        const auto& cor = c.power.corridors[i];
        ck.require(cor.limit > 0.0, at("power_network.corridors", i, "limit"),
                   "corridor limit must be positive");
        ck.require(cor.bus_ptdf.size() == c.power.buses.size(),
                   at("power_network.corridors", i, "bus_ptdf"),
                   "PTDF row length must equal the bus count");
        for (double v : cor.bus_ptdf)
            if (!std::isfinite(v)) {
                ck.error(at("power_network.corridors", i, "bus_ptdf"), "PTDF entry not finite");
                break;
            }
    }

    double gamma_sum = 0.0;
    for (std::size_t i = 0; i < c.generators.size(); ++i) {
        const auto& g = c.generators[i];
        ck.require(g.p_min <= g.p_max, at("generators", i), "p_min must not exceed p_max");
        ck.require(g.ramp_up >= 0.0 && g.ramp_down >= 0.0, at("generators", i),
                   "ramp limits must be nonnegative");
        ck.require(g.cost_a >= 0.0, at("generators", i, "cost_a"),
                   "quadratic cost must be nonnegative");
        ck.require(g.participation >= 0.0, at("generators", i, "participation"),
                   "participation factor must be nonnegative");
        ck.require(g.q_min <= g.q_max, at("generators", i), "q_min must not exceed q_max");
        ck.require(has_bus(g.bus), at("generators", i, "bus"), "generator bus does not exist");
        gamma_sum += g.participation;
    }
    if (!c.generators.empty() && std::abs(gamma_sum - 1.0) > 1e-9)
        ck.error("generators", "participation factors must sum to one, got " +
                                   std::to_string(gamma_sum));

    for (std::size_t i = 0; i < c.renewables.size(); ++i) {
        const auto& r = c.renewables[i];
        ck.require(r.capacity > 0.0, at("renewables", i, "capacity"),
                   "capacity must be positive");
        ck.require(r.penalty_k >= 0.0, at("renewables", i, "penalty_k"),
                   "curtailment penalty coefficient must be nonnegative");
        ck.require(has_bus(r.bus), at("renewables", i, "bus"), "renewable bus does not exist");
        ck.require(r.availability.size() == T, at("renewables", i, "gmm"),
                   "per-step mixture count must equal the horizon");
        ck.require(r.forecast.size() == T, at("renewables", i, "forecast"),
                   "forecast length must equal the horizon");
        for (std::size_t t = 0; t < r.forecast.size(); ++t)
            if (r.forecast[t] < 0.0 || r.forecast[t] > r.capacity + 1e-9)
                ck.warn(at("renewables", i, "forecast"),
                        "forecast outside [0, capacity] at step " + std::to_string(t));
    }

    std::set<int> heat_ids;
    std::size_t n_sources = 0;
    for (std::size_t i = 0; i < c.heat.nodes.size(); ++i) {
        const auto& n = c.heat.nodes[i];
        if (!heat_ids.insert(n.id).second)
            ck.error(at("heat_network.nodes", i), "duplicate heat node id");
        ck.require(n.supply_min <= n.supply_max && n.return_min <= n.return_max,
                   at("heat_network.nodes", i), "temperature bounds out of order");
        if (n.kind == HeatNodeKind::Source) {
            ++n_sources;
            ck.require(n.supply_setpoint >= n.supply_min && n.supply_setpoint <= n.supply_max,
                       at("heat_network.nodes", i, "supply_setpoint"),
                       "source supply setpoint outside its bounds");
        }
        if (n.kind == HeatNodeKind::Load)
            ck.require(n.extraction_flow > 0.0, at("heat_network.nodes", i, "extraction_flow"),
                       "load node needs a positive extraction flow");
    }
    auto has_node = [&](int id) { return heat_ids.count(id) > 0; };
    ck.require(n_sources >= 1, "heat_network.nodes", "at least one source node required");
    {
        std::map<int, std::vector<int>> out_pipes;
        std::map<int, int> in_deg;
        bool refs_ok = true;
        for (std::size_t i = 0; i < c.heat.pipes.size(); ++i) {
            const auto& pp = c.heat.pipes[i];
            if (!has_node(pp.from) || !has_node(pp.to)) {
                ck.error(at("heat_network.pipes", i), "pipe references a missing node");
                refs_ok = false;
                continue;
            }
            ck.require(pp.mass_flow > 0.0, at("heat_network.pipes", i, "mass_flow"),
                       "pipe mass flow must be positive");
            ck.require(pp.length >= 0.0 && pp.loss_coeff >= 0.0, at("heat_network.pipes", i),
                       "pipe length and loss coefficient must be nonnegative");
            out_pipes[pp.from].push_back(static_cast<int>(i));
            in_deg[pp.to] += 1;
        }
        if (refs_ok) {
            // Supply side must reach every node from the sources without
            // cycles (Kahn order).
            std::map<int, int> deg = in_deg;
            std::vector<int> queue;
            for (const auto& n : c.heat.nodes)
                if (deg[n.id] == 0) {
                    queue.push_back(n.id);
                    if (n.kind != HeatNodeKind::Source)
                        ck.warn("heat_network", "node " + std::to_string(n.id) +
                                                    " has no supply pipe and is not a source");
                }
            std::size_t visited = 0;
            while (!queue.empty()) {
                const int u = queue.back();
                queue.pop_back();
                ++visited;
                for (int pi : out_pipes[u]) {
                    const int v = c.heat.pipes[static_cast<std::size_t>(pi)].to;
                    if (--deg[v] == 0) queue.push_back(v);
                }
            }
            ck.require(visited == c.heat.nodes.size(), "heat_network.pipes",
                       "supply network must be acyclic and reach every node");
        }
    }
    ck.require(c.heat.cp > 0.0, "heat_network.cp", "specific heat must be positive");

    for (std::size_t i = 0; i < c.heat_plants.size(); ++i) {
        const auto& hp = c.heat_plants[i];
        ck.require(hp.eff_power_to_heat > 0.0 && hp.eff_power_to_heat <= 1.0,
                   at("heat_plants", i, "eff_power_to_heat"), "efficiency must be in (0,1]");
        ck.require(hp.eff_gas_to_heat > 0.0 && hp.eff_gas_to_heat <= 1.0,
                   at("heat_plants", i, "eff_gas_to_heat"), "efficiency must be in (0,1]");
        ck.require(hp.p_min <= hp.p_max && hp.gas_min <= hp.gas_max, at("heat_plants", i),
                   "plant bounds out of order");
        ck.require(hp.gas_price.size() == T, at("heat_plants", i, "gas_price"),
                   "gas price series length must equal the horizon");
        ck.require(has_bus(hp.bus), at("heat_plants", i, "bus"), "plant bus does not exist");
        ck.require(has_node(hp.heat_node), at("heat_plants", i, "heat_node"),
                   "plant heat node does not exist");
    }

    auto check_storage = [&](const SharedStorage& s, const std::string& path, bool electric) {
        ck.require(s.capacity_kwh >= 0.0, path + ".capacity_kwh",
                   "capacity must be nonnegative");
        ck.require(s.soc_min >= 0.0 && s.soc_min < s.soc_max && s.soc_max <= 1.0,
                   path, "SOC bounds must satisfy 0 <= soc_min < soc_max <= 1");
        ck.require(s.eff_charge > 0.0 && s.eff_charge <= 1.0 && s.eff_discharge > 0.0 &&
                       s.eff_discharge <= 1.0,
                   path, "efficiencies must be in (0,1]");
        ck.require(s.charge_rate >= 0.0 && s.discharge_rate >= 0.0, path,
                   "rate fractions must be nonnegative");
        if (s.capacity_kwh > 0.0)
            ck.require(s.initial_kwh >= s.soc_min * s.capacity_kwh - 1e-9 &&
                           s.initial_kwh <= s.soc_max * s.capacity_kwh + 1e-9,
                       path + ".initial_kwh", "initial SOC outside its bounds");
        if (electric)
            ck.require(has_bus(s.location), path + ".location", "storage bus does not exist");
        else
            ck.require(has_node(s.location), path + ".location",
                       "storage heat node does not exist");
    };
    check_storage(c.storage_electric, "storage_electric", true);
    check_storage(c.storage_heat, "storage_heat", false);

    std::set<int> used_heat_nodes;
    for (std::size_t i = 0; i < c.consumers.size(); ++i) {
        const auto& n = c.consumers[i];
        ck.require(n.alpha > 0.0 && n.alpha < 1.0, at("consumers", i, "alpha"),
                   "preference must lie strictly inside (0,1)");
        ck.require(n.budget > 0.0, at("consumers", i, "budget"), "budget must be positive");
        ck.require(has_bus(n.bus), at("consumers", i, "bus"), "consumer bus does not exist");
        ck.require(has_node(n.heat_node), at("consumers", i, "heat_node"),
                   "consumer heat node does not exist");
        ck.require(n.base_power.size() == T, at("consumers", i, "base_power"),
                   "series length must equal the horizon");
        ck.require(n.base_heat.size() == T, at("consumers", i, "base_heat"),
                   "series length must equal the horizon");
        if (n.base_reactive.empty())
            ck.warn(at("consumers", i, "base_reactive"),
                    "missing optional series, defaulting to zero");
        else
            ck.require(n.base_reactive.size() == T, at("consumers", i, "base_reactive"),
                       "series length must equal the horizon");
        used_heat_nodes.insert(n.heat_node);
    }
    for (std::size_t i = 0; i < c.heat.nodes.size(); ++i) {
        const auto& n = c.heat.nodes[i];
        if (n.kind == HeatNodeKind::Load && !used_heat_nodes.count(n.id))
            ck.warn(at("heat_network.nodes", i),
                    "load node " + std::to_string(n.id) + " is not referenced by any consumer");
    }

    ck.require(c.tariff.slope >= 0.0, "tariff.slope", "tariff slope must be nonnegative");
    ck.require(c.tariff.base_power_price.size() == T, "tariff.base_power_price",
               "series length must equal the horizon");
    ck.require(c.tariff.base_heat_price.size() == T, "tariff.base_heat_price",
               "series length must equal the horizon");
    for (double v : c.tariff.base_power_price)
        if (v < 0.0) {
            ck.error("tariff.base_power_price", "base prices must be nonnegative");
            break;
        }
    for (double v : c.tariff.base_heat_price)
        if (v < 0.0) {
            ck.error("tariff.base_heat_price", "base prices must be nonnegative");
            break;
        }

    auto check_alpha = [&](double a, const std::string& path) {
        ck.require(a > 0.0 && a < 0.5, path, "risk level must lie in (0, 0.5)");
    };
    check_alpha(c.risk.alpha_up, "risk.alpha_up");
    check_alpha(c.risk.alpha_dr, "risk.alpha_dr");
    check_alpha(c.risk.alpha_line_up, "risk.alpha_line_up");
    check_alpha(c.risk.alpha_line_dn, "risk.alpha_line_dn");

    return diags;
}

}  // namespace ihp
