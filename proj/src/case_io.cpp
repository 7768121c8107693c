#include <fstream>
#include <json.hpp>
#include <sstream>

#include "ihp/case.hpp"

namespace ihp {

using nlohmann::json;

namespace {

json gmm_to_json(const Gmm& g) {
    json arr = json::array();
    for (const auto& c : g.components()) arr.push_back({c.weight, c.mean, c.stddev});
    return arr;
}

Gmm gmm_from_json(const json& j, const std::string& where) {
    std::vector<GaussComponent> comps;
    for (const auto& c : j) {
        if (!c.is_array() || c.size() != 3)
            throw CaseError(where + ": mixture component must be [weight, mean, stddev]");
        comps.push_back({c[0].get<double>(), c[1].get<double>(), c[2].get<double>()});
    }
    try {
        return Gmm(comps);
    } catch (const std::exception& e) {
        throw CaseError(where + ": " + e.what());
    }
}

template <typename T>
T get(const json& j, const std::string& key, const std::string& where) {
    if (!j.contains(key)) throw CaseError(where + ": missing key '" + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const std::exception&) {
        throw CaseError(where + ": bad value for key '" + key + "'");
    }
}

template <typename T>
T get_or(const json& j, const std::string& key, T fallback) {
    return j.contains(key) ? j.at(key).get<T>() : fallback;
}

json storage_to_json(const SharedStorage& s) {
    return {{"capacity_kwh", s.capacity_kwh},
            {"charge_rate", s.charge_rate},
            {"discharge_rate", s.discharge_rate},
            {"soc_min", s.soc_min},
            {"soc_max", s.soc_max},
            {"eff_charge", s.eff_charge},
            {"eff_discharge", s.eff_discharge},
            {"initial_kwh", s.initial_kwh},
            {"step_hours", s.step_hours},
            {"location", s.location}};
}

SharedStorage storage_from_json(const json& j, const std::string& where) {
    SharedStorage s;
    s.capacity_kwh = get<double>(j, "capacity_kwh", where);
    s.charge_rate = get<double>(j, "charge_rate", where);
    s.discharge_rate = get<double>(j, "discharge_rate", where);
    s.soc_min = get<double>(j, "soc_min", where);
    s.soc_max = get<double>(j, "soc_max", where);
    s.eff_charge = get<double>(j, "eff_charge", where);
    s.eff_discharge = get<double>(j, "eff_discharge", where);
    s.initial_kwh = get<double>(j, "initial_kwh", where);
    s.step_hours = get_or<double>(j, "step_hours", 1.0);
    s.location = get<int>(j, "location", where);
    return s;
}

}  // namespace

std::string case_to_json_string(const CommunityCase& c) {
    json j;
    j["schema_version"] = c.schema_version;
    j["horizon"] = c.horizon;
    j["step_hours"] = c.step_hours;
    j["rt_step_minutes"] = c.rt_step_minutes;

    j["generators"] = json::array();
    for (const auto& g : c.generators)
        j["generators"].push_back({{"id", g.id},
                                   {"bus", g.bus},
                                   {"cost_a", g.cost_a},
                                   {"cost_b", g.cost_b},
                                   {"cost_c", g.cost_c},
                                   {"p_min", g.p_min},
                                   {"p_max", g.p_max},
                                   {"ramp_up", g.ramp_up},
                                   {"ramp_down", g.ramp_down},
                                   {"participation", g.participation},
                                   {"adjust_cost", g.adjust_cost},
                                   {"q_min", g.q_min},
                                   {"q_max", g.q_max}});

    j["renewables"] = json::array();
    for (const auto& r : c.renewables) {
        json jr = {{"id", r.id},
                   {"bus", r.bus},
                   {"kind", r.kind == RenewableKind::Wind ? "wind" : "solar"},
                   {"capacity", r.capacity},
                   {"penalty_k", r.penalty_k},
                   {"forecast", r.forecast}};
        json gm = json::array();
        for (const auto& g : r.availability) gm.push_back(gmm_to_json(g));
        jr["gmm"] = gm;
        j["renewables"].push_back(jr);
    }

    j["heat_plants"] = json::array();
    for (const auto& hp : c.heat_plants)
        j["heat_plants"].push_back({{"id", hp.id},
                                    {"bus", hp.bus},
                                    {"heat_node", hp.heat_node},
                                    {"eff_power_to_heat", hp.eff_power_to_heat},
                                    {"eff_gas_to_heat", hp.eff_gas_to_heat},
                                    {"p_min", hp.p_min},
                                    {"p_max", hp.p_max},
                                    {"gas_min", hp.gas_min},
                                    {"gas_max", hp.gas_max},
                                    {"gas_price", hp.gas_price}});

    j["storage_electric"] = storage_to_json(c.storage_electric);
    j["storage_heat"] = storage_to_json(c.storage_heat);

    j["consumers"] = json::array();
    for (const auto& n : c.consumers) {
        json jn = {{"id", n.id},          {"bus", n.bus},
                   {"heat_node", n.heat_node}, {"alpha", n.alpha},
                   {"budget", n.budget},  {"base_power", n.base_power},
                   {"base_heat", n.base_heat}};
        if (!n.base_reactive.empty()) jn["base_reactive"] = n.base_reactive;
        j["consumers"].push_back(jn);
    }

    json buses = json::array();
    for (const auto& b : c.power.buses)
        buses.push_back({{"id", b.id}, {"v_min_sq", b.v_min_sq}, {"v_max_sq", b.v_max_sq}});
    json lines = json::array();
    for (const auto& l : c.power.lines)
        lines.push_back({{"from", l.from},
                         {"to", l.to},
                         {"r", l.r},
                         {"x", l.x},
                         {"flow_max", l.flow_max},
                         {"current_max", l.current_max}});
    json corridors = json::array();
    for (const auto& cor : c.power.corridors)
        corridors.push_back({{"id", cor.id}, {"limit", cor.limit}, {"bus_ptdf", cor.bus_ptdf}});
    j["power_network"] = {{"root_bus", c.power.root_bus},
                          {"root_v_sq", c.power.root_v_sq},
                          {"buses", buses},
                          {"lines", lines},
                          {"corridors", corridors}};

    json hnodes = json::array();
    for (const auto& n : c.heat.nodes) {
        const char* kind = n.kind == HeatNodeKind::Source ? "source"
                           : n.kind == HeatNodeKind::Load ? "load"
                                                          : "mix";
        hnodes.push_back({{"id", n.id},
                          {"kind", kind},
                          {"extraction_flow", n.extraction_flow},
                          {"supply_min", n.supply_min},
                          {"supply_max", n.supply_max},
                          {"return_min", n.return_min},
                          {"return_max", n.return_max},
                          {"supply_setpoint", n.supply_setpoint}});
    }
    json hpipes = json::array();
    for (const auto& pp : c.heat.pipes)
        hpipes.push_back({{"from", pp.from},
                          {"to", pp.to},
                          {"length", pp.length},
                          {"mass_flow", pp.mass_flow},
                          {"loss_coeff", pp.loss_coeff}});
    j["heat_network"] = {{"ambient", c.heat.ambient},
                         {"cp", c.heat.cp},
                         {"nodes", hnodes},
                         {"pipes", hpipes}};

    j["tariff"] = {{"base_power_price", c.tariff.base_power_price},
                   {"base_heat_price", c.tariff.base_heat_price},
                   {"slope", c.tariff.slope}};
    j["risk"] = {{"alpha_up", c.risk.alpha_up},
                 {"alpha_dr", c.risk.alpha_dr},
                 {"alpha_line_up", c.risk.alpha_line_up},
                 {"alpha_line_dn", c.risk.alpha_line_dn}};
    return j.dump(2);
}

CommunityCase case_from_json_string(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const std::exception& e) {
        throw CaseError(std::string("parse error: ") + e.what());
    }
    CommunityCase c;
    c.schema_version = get<int>(j, "schema_version", "case");
    c.horizon = get<int>(j, "horizon", "case");
    c.step_hours = get_or<double>(j, "step_hours", 1.0);
    c.rt_step_minutes = get_or<double>(j, "rt_step_minutes", 5.0);

    std::size_t i = 0;
    for (const auto& jg : j.value("generators", json::array())) {
        const std::string where = "generators[" + std::to_string(i++) + "]";
        Generator g;
        g.id = get<std::string>(jg, "id", where);
        g.bus = get<int>(jg, "bus", where);
        g.cost_a = get<double>(jg, "cost_a", where);
        g.cost_b = get<double>(jg, "cost_b", where);
        g.cost_c = get<double>(jg, "cost_c", where);
        g.p_min = get<double>(jg, "p_min", where);
        g.p_max = get<double>(jg, "p_max", where);
        g.ramp_up = get<double>(jg, "ramp_up", where);
        g.ramp_down = get<double>(jg, "ramp_down", where);
        g.participation = get<double>(jg, "participation", where);
        g.adjust_cost = get<double>(jg, "adjust_cost", where);
        g.q_min = get<double>(jg, "q_min", where);
        g.q_max = get<double>(jg, "q_max", where);
        c.generators.push_back(std::move(g));
    }

    i = 0;
    for (const auto& jr : j.value("renewables", json::array())) {
        const std::string where = "renewables[" + std::to_string(i++) + "]";
        RenewableUnit r;
        r.id = get<std::string>(jr, "id", where);
        r.bus = get<int>(jr, "bus", where);
        const std::string kind = get<std::string>(jr, "kind", where);
        if (kind == "wind")
            r.kind = RenewableKind::Wind;
        else if (kind == "solar")
            r.kind = RenewableKind::Solar;
        else
            throw CaseError(where + ": kind must be 'wind' or 'solar'");
        r.capacity = get<double>(jr, "capacity", where);
        r.penalty_k = get<double>(jr, "penalty_k", where);
        r.forecast = get<std::vector<double>>(jr, "forecast", where);
        if (!jr.contains("gmm")) throw CaseError(where + ": missing key 'gmm'");
        for (const auto& jm : jr.at("gmm")) r.availability.push_back(gmm_from_json(jm, where));
        c.renewables.push_back(std::move(r));
    }

    i = 0;
    for (const auto& jh : j.value("heat_plants", json::array())) {
        const std::string where = "heat_plants[" + std::to_string(i++) + "]";
        HeatPlant hp;
        hp.id = get<std::string>(jh, "id", where);
        hp.bus = get<int>(jh, "bus", where);
        hp.heat_node = get<int>(jh, "heat_node", where);
        hp.eff_power_to_heat = get<double>(jh, "eff_power_to_heat", where);
        hp.eff_gas_to_heat = get<double>(jh, "eff_gas_to_heat", where);
        hp.p_min = get<double>(jh, "p_min", where);
        hp.p_max = get<double>(jh, "p_max", where);
        hp.gas_min = get<double>(jh, "gas_min", where);
        hp.gas_max = get<double>(jh, "gas_max", where);
        hp.gas_price = get<std::vector<double>>(jh, "gas_price", where);
        c.heat_plants.push_back(std::move(hp));
    }

    if (!j.contains("storage_electric")) throw CaseError("case: missing key 'storage_electric'");
    if (!j.contains("storage_heat")) throw CaseError("case: missing key 'storage_heat'");
    c.storage_electric = storage_from_json(j.at("storage_electric"), "storage_electric");
    c.storage_heat = storage_from_json(j.at("storage_heat"), "storage_heat");

    i = 0;
    for (const auto& jn : j.value("consumers", json::array())) {
        const std::string where = "consumers[" + std::to_string(i++) + "]";
        Consumer n;
        n.id = get<std::string>(jn, "id", where);
        n.bus = get<int>(jn, "bus", where);
        n.heat_node = get<int>(jn, "heat_node", where);
        n.alpha = get<double>(jn, "alpha", where);
        n.budget = get<double>(jn, "budget", where);
        n.base_power = get<std::vector<double>>(jn, "base_power", where);
        n.base_heat = get<std::vector<double>>(jn, "base_heat", where);
        n.base_reactive = get_or<std::vector<double>>(jn, "base_reactive", {});
        c.consumers.push_back(std::move(n));
    }

    if (!j.contains("power_network")) throw CaseError("case: missing key 'power_network'");
    {
        const auto& jp = j.at("power_network");
        c.power.root_bus = get<int>(jp, "root_bus", "power_network");
        c.power.root_v_sq = get_or<double>(jp, "root_v_sq", 1.0);
        i = 0;
        for (const auto& jb : jp.value("buses", json::array())) {
            const std::string where = "power_network.buses[" + std::to_string(i++) + "]";
            Bus b;
            b.id = get<int>(jb, "id", where);
            b.v_min_sq = get<double>(jb, "v_min_sq", where);
            b.v_max_sq = get<double>(jb, "v_max_sq", where);
            c.power.buses.push_back(b);
        }
        i = 0;
        for (const auto& jl : jp.value("lines", json::array())) {
            const std::string where = "power_network.lines[" + std::to_string(i++) + "]";
            Line l;
            l.from = get<int>(jl, "from", where);
            l.to = get<int>(jl, "to", where);
            l.r = get<double>(jl, "r", where);
            l.x = get<double>(jl, "x", where);
            l.flow_max = get<double>(jl, "flow_max", where);
            l.current_max = get_or<double>(jl, "current_max", 1e9);
            c.power.lines.push_back(l);
        }
        i = 0;
        for (const auto& jc : jp.value("corridors", json::array())) {
            const std::string where = "power_network.corridors[" + std::to_string(i++) + "]";
            MonitoredCorridor cor;
            cor.id = get<std::string>(jc, "id", where);
            cor.limit = get<double>(jc, "limit", where);
            cor.bus_ptdf = get<std::vector<double>>(jc, "bus_ptdf", where);
            c.power.corridors.push_back(std::move(cor));
        }
    }

    if (!j.contains("heat_network")) throw CaseError("case: missing key 'heat_network'");
    {
        const auto& jh = j.at("heat_network");
        c.heat.ambient = get<double>(jh, "ambient", "heat_network");
        c.heat.cp = get<double>(jh, "cp", "heat_network");
        i = 0;
        for (const auto& jn : jh.value("nodes", json::array())) {
            const std::string where = "heat_network.nodes[" + std::to_string(i++) + "]";
            HeatNode n;
            n.id = get<int>(jn, "id", where);
            const std::string kind = get<std::string>(jn, "kind", where);
            if (kind == "source")
                n.kind = HeatNodeKind::Source;
            else if (kind == "load")
                n.kind = HeatNodeKind::Load;
            else if (kind == "mix")
                n.kind = HeatNodeKind::Mix;
            else
                throw CaseError(where + ": kind must be source, load or mix");
            n.extraction_flow = get_or<double>(jn, "extraction_flow", 0.0);
            n.supply_min = get_or<double>(jn, "supply_min", 0.0);
            n.supply_max = get_or<double>(jn, "supply_max", 150.0);
            n.return_min = get_or<double>(jn, "return_min", 0.0);
            n.return_max = get_or<double>(jn, "return_max", 150.0);
            n.supply_setpoint = get_or<double>(jn, "supply_setpoint", 0.0);
            c.heat.nodes.push_back(n);
        }
        i = 0;
        for (const auto& jp2 : jh.value("pipes", json::array())) {
            const std::string where = "heat_network.pipes[" + std::to_string(i++) + "]";
            HeatPipe pp;
            pp.from = get<int>(jp2, "from", where);
            pp.to = get<int>(jp2, "to", where);
            pp.length = get<double>(jp2, "length", where);
            pp.mass_flow = get<double>(jp2, "mass_flow", where);
            pp.loss_coeff = get<double>(jp2, "loss_coeff", where);
            c.heat.pipes.push_back(pp);
        }
    }

    if (!j.contains("tariff")) throw CaseError("case: missing key 'tariff'");
    c.tariff.base_power_price =
        get<std::vector<double>>(j.at("tariff"), "base_power_price", "tariff");
    c.tariff.base_heat_price =
        get<std::vector<double>>(j.at("tariff"), "base_heat_price", "tariff");
    c.tariff.slope = get<double>(j.at("tariff"), "slope", "tariff");

    if (!j.contains("risk")) throw CaseError("case: missing key 'risk'");
    c.risk.alpha_up = get<double>(j.at("risk"), "alpha_up", "risk");
    c.risk.alpha_dr = get<double>(j.at("risk"), "alpha_dr", "risk");
    c.risk.alpha_line_up = get<double>(j.at("risk"), "alpha_line_up", "risk");
    c.risk.alpha_line_dn = get<double>(j.at("risk"), "alpha_line_dn", "risk");
    return c;
}

CommunityCase load_case(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CaseError("cannot open case file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    CommunityCase c = case_from_json_string(buf.str());
    const auto diags = validate_case(c);
    for (const auto& d : diags)
        if (d.severity == Diagnostic::Severity::Error)
            throw CaseError("invalid case at " + d.path + ": " + d.message);
    return c;
}

void save_case(const CommunityCase& c, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw CaseError("cannot write case file: " + path);
    out << case_to_json_string(c) << "\n";
}

}  // namespace ihp
