#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "core_model.hpp"

namespace ihp::detail {

namespace {
std::string nm(const char* tag, int a, int t) {
    return std::string(tag) + "_" + std::to_string(a) + "_" + std::to_string(t);
}
std::string nm(const char* tag, int t) { return std::string(tag) + "_" + std::to_string(t); }
}  // namespace

CoreRefs build_core(ConicProgram& prog, const CommunityCase& c, const DemandView& demand,
                    int t0, int t1, const CoreOptions& opt) {
    CoreRefs refs;
    refs.t0 = t0;
    refs.t1 = t1;
    const int W = t1 - t0;
    const int nb = static_cast<int>(c.power.buses.size());
    const int nl = static_cast<int>(c.power.lines.size());
    const int ng = static_cast<int>(c.generators.size());
    const int nr = static_cast<int>(c.renewables.size());
    const int nh = static_cast<int>(c.heat_plants.size());
    const double dt = c.step_hours;

    std::map<int, int> bus_index;
    for (int b = 0; b < nb; ++b) bus_index[c.power.buses[static_cast<std::size_t>(b)].id] = b;

    refs.gen_p.assign(static_cast<std::size_t>(ng), {});
    refs.gen_q.assign(static_cast<std::size_t>(ng), {});
    refs.sch.assign(static_cast<std::size_t>(nr), {});
    refs.bus_v.assign(static_cast<std::size_t>(nb), {});
    refs.line_p.assign(static_cast<std::size_t>(nl), {});
    refs.line_q.assign(static_cast<std::size_t>(nl), {});
    refs.line_cur.assign(static_cast<std::size_t>(nl), {});
    refs.plant_p.assign(static_cast<std::size_t>(nh), {});
    refs.plant_gas.assign(static_cast<std::size_t>(nh), {});

    const bool fixed_renew = opt.fixed_renewables.has_value();

    for (int w = 0; w < W; ++w) {
        const int t = t0 + w;
        for (int g = 0; g < ng; ++g) {
            const auto& gen = c.generators[static_cast<std::size_t>(g)];
            refs.gen_p[static_cast<std::size_t>(g)].push_back(
                prog.add_var(nm("p", g, t), gen.p_min, gen.p_max));
            refs.gen_q[static_cast<std::size_t>(g)].push_back(
                prog.add_var(nm("q", g, t), gen.q_min, gen.q_max));
        }
        for (int r = 0; r < nr; ++r) {
            if (fixed_renew) continue;
            const auto& ru = c.renewables[static_cast<std::size_t>(r)];
            double ub = ru.forecast[static_cast<std::size_t>(t)];
            if (opt.caps)
                ub = std::min(ub, opt.caps->cap[static_cast<std::size_t>(r)]
                                               [static_cast<std::size_t>(t)]);
            refs.sch[static_cast<std::size_t>(r)].push_back(
                prog.add_var(nm("sch", r, t), 0.0, std::max(0.0, ub)));
        }
        for (int b = 0; b < nb; ++b) {
            const auto& bus = c.power.buses[static_cast<std::size_t>(b)];
            refs.bus_v[static_cast<std::size_t>(b)].push_back(
                prog.add_var(nm("v", b, t), bus.v_min_sq, bus.v_max_sq));
        }
        for (int l = 0; l < nl; ++l) {
            const auto& line = c.power.lines[static_cast<std::size_t>(l)];
            refs.line_p[static_cast<std::size_t>(l)].push_back(
                prog.add_var(nm("fp", l, t), -line.flow_max, line.flow_max));
            refs.line_q[static_cast<std::size_t>(l)].push_back(
                prog.add_var(nm("fq", l, t), -line.flow_max, line.flow_max));
            refs.line_cur[static_cast<std::size_t>(l)].push_back(
                prog.add_var(nm("cur", l, t), 0.0, line.current_max));
        }
        const auto& es = c.storage_electric;
        refs.es_charge.push_back(prog.add_var(nm("esc", t), 0.0, es.max_charge_mw()));
        refs.es_discharge.push_back(prog.add_var(nm("esd", t), 0.0, es.max_discharge_mw()));
        refs.es_soc.push_back(prog.add_var(nm("ese", t), es.soc_min * es.capacity_mwh(),
                                           es.soc_max * es.capacity_mwh()));
        const auto& hs = c.storage_heat;
        refs.hs_charge.push_back(prog.add_var(nm("hsc", t), 0.0, hs.max_charge_mw()));
        refs.hs_discharge.push_back(prog.add_var(nm("hsd", t), 0.0, hs.max_discharge_mw()));
        refs.hs_soc.push_back(prog.add_var(nm("hse", t), hs.soc_min * hs.capacity_mwh(),
                                           hs.soc_max * hs.capacity_mwh()));
        for (int h = 0; h < nh; ++h) {
            const auto& hp = c.heat_plants[static_cast<std::size_t>(h)];
            refs.plant_p[static_cast<std::size_t>(h)].push_back(
                prog.add_var(nm("put", h, t), hp.p_min, hp.p_max));
            refs.plant_gas[static_cast<std::size_t>(h)].push_back(
                prog.add_var(nm("gas", h, t), hp.gas_min, hp.gas_max));
        }
        if (opt.with_emergency_slack) {
            refs.shed.push_back(prog.add_var(nm("shed", t), 0.0, kInf));
            refs.spill.push_back(prog.add_var(nm("spill", t), 0.0, kInf));
            prog.add_linear_cost(refs.shed.back(), opt.emergency_weight);
            prog.add_linear_cost(refs.spill.back(), opt.emergency_weight);
        }
    }

    // Pins for the real-time stage: storage powers and plant setpoints
    // follow the day-ahead schedule (heat is re-dispatched separately).
    if (opt.pin_to_schedule) {
        const auto& s = *opt.pin_to_schedule;
        for (int w = 0; w < W; ++w) {
            const int t = t0 + w;
            const auto ti = static_cast<std::size_t>(t);
            const auto wi = static_cast<std::size_t>(w);
            prog.add_eq(LinExpr().add(refs.es_charge[wi], 1.0), s.charge[ti]);
            prog.add_eq(LinExpr().add(refs.es_discharge[wi], 1.0), s.discharge[ti]);
            prog.add_eq(LinExpr().add(refs.hs_charge[wi], 1.0), s.heat_charge[ti]);
            prog.add_eq(LinExpr().add(refs.hs_discharge[wi], 1.0), s.heat_discharge[ti]);
            for (int h = 0; h < nh; ++h) {
                prog.add_eq(LinExpr().add(refs.plant_p[static_cast<std::size_t>(h)][wi], 1.0),
                            s.plant_power[static_cast<std::size_t>(h)][ti]);
                prog.add_eq(LinExpr().add(refs.plant_gas[static_cast<std::size_t>(h)][wi], 1.0),
                            s.plant_gas[static_cast<std::size_t>(h)][ti]);
            }
        }
    }

    // --- network rows per step ------------------------------------------------
    for (int w = 0; w < W; ++w) {
        const int t = t0 + w;
        const auto wi = static_cast<std::size_t>(w);

        // Reference voltage at the root.
        const int root = bus_index.at(c.power.root_bus);
        prog.add_eq(LinExpr().add(refs.bus_v[static_cast<std::size_t>(root)][wi], 1.0),
                    c.power.root_v_sq);

        // Voltage drop along each line and the conic current relation.
        for (int l = 0; l < nl; ++l) {
            const auto li = static_cast<std::size_t>(l);
            const auto& line = c.power.lines[li];
            const int bf = bus_index.at(line.from);
            const int bt = bus_index.at(line.to);
            LinExpr drop;
            drop.add(refs.bus_v[static_cast<std::size_t>(bf)][wi], 1.0)
                .add(refs.bus_v[static_cast<std::size_t>(bt)][wi], -1.0)
                .add(refs.line_p[li][wi], -2.0 * line.r)
                .add(refs.line_q[li][wi], -2.0 * line.x)
                .add(refs.line_cur[li][wi], line.r * line.r + line.x * line.x);
            prog.add_eq(drop, 0.0);

            std::vector<LinExpr> norm;
            norm.push_back(LinExpr().add(refs.line_p[li][wi], 2.0));
            norm.push_back(LinExpr().add(refs.line_q[li][wi], 2.0));
            norm.push_back(LinExpr()
                               .add(refs.line_cur[li][wi], 1.0)
                               .add(refs.bus_v[static_cast<std::size_t>(bf)][wi], -1.0));
            prog.add_soc(std::move(norm),
                         LinExpr()
                             .add(refs.line_cur[li][wi], 1.0)
                             .add(refs.bus_v[static_cast<std::size_t>(bf)][wi], 1.0));
        }

        // Nodal balances.
        for (int b = 0; b < nb; ++b) {
            const auto bi = static_cast<std::size_t>(b);
            const int bus_id = c.power.buses[bi].id;
            LinExpr bal, rbal;
            for (int l = 0; l < nl; ++l) {
                const auto li = static_cast<std::size_t>(l);
                const auto& line = c.power.lines[li];
                if (bus_index.at(line.to) == b) {
                    bal.add(refs.line_p[li][wi], 1.0).add(refs.line_cur[li][wi], -line.r);
                    rbal.add(refs.line_q[li][wi], 1.0).add(refs.line_cur[li][wi], -line.x);
                }
                if (bus_index.at(line.from) == b) {
                    bal.add(refs.line_p[li][wi], -1.0);
                    rbal.add(refs.line_q[li][wi], -1.0);
                }
            }
            for (int g = 0; g < ng; ++g)
                if (c.generators[static_cast<std::size_t>(g)].bus == bus_id) {
                    bal.add(refs.gen_p[static_cast<std::size_t>(g)][wi], 1.0);
                    rbal.add(refs.gen_q[static_cast<std::size_t>(g)][wi], 1.0);
                }
            double fixed_inj = 0.0;
            for (int r = 0; r < nr; ++r)
                if (c.renewables[static_cast<std::size_t>(r)].bus == bus_id) {
                    if (fixed_renew)
                        fixed_inj += (*opt.fixed_renewables)[static_cast<std::size_t>(r)][wi];
                    else
                        bal.add(refs.sch[static_cast<std::size_t>(r)][wi], 1.0);
                }
            if (c.storage_electric.location == bus_id) {
                bal.add(refs.es_discharge[wi], 1.0).add(refs.es_charge[wi], -1.0);
            }
            for (int h = 0; h < nh; ++h)
                if (c.heat_plants[static_cast<std::size_t>(h)].bus == bus_id)
                    bal.add(refs.plant_p[static_cast<std::size_t>(h)][wi], -1.0);
            if (opt.with_emergency_slack && b == root) {
                bal.add(refs.shed[wi], 1.0).add(refs.spill[wi], -1.0);
            }
            const double load = demand.bus_power[bi][static_cast<std::size_t>(t)];
            const double qload = demand.bus_reactive[bi][static_cast<std::size_t>(t)];
            prog.add_eq(bal, load - fixed_inj);
            prog.add_eq(rbal, qload);
        }

        // Heat balance: plant output plus storage discharge covers the
        // frozen heat demand and storage charging.
        LinExpr heat;
        for (int h = 0; h < nh; ++h) {
            const auto& hp = c.heat_plants[static_cast<std::size_t>(h)];
            heat.add(refs.plant_p[static_cast<std::size_t>(h)][wi], hp.eff_power_to_heat);
            heat.add(refs.plant_gas[static_cast<std::size_t>(h)][wi], hp.eff_gas_to_heat);
        }
        heat.add(refs.hs_discharge[wi], 1.0).add(refs.hs_charge[wi], -1.0);
        prog.add_eq(heat, demand.heat_total[static_cast<std::size_t>(t)]);

        // Storage dynamics.
        const auto& es = c.storage_electric;
        LinExpr esd;
        esd.add(refs.es_soc[wi], 1.0)
            .add(refs.es_charge[wi], -es.eff_charge * dt)
            .add(refs.es_discharge[wi], dt / es.eff_discharge);
        const auto& hs = c.storage_heat;
        LinExpr hsd;
        hsd.add(refs.hs_soc[wi], 1.0)
            .add(refs.hs_charge[wi], -hs.eff_charge * dt)
            .add(refs.hs_discharge[wi], dt / hs.eff_discharge);
        if (w == 0) {
            prog.add_eq(esd, opt.es_soc_start.value_or(es.initial_mwh()));
            prog.add_eq(hsd, opt.hs_soc_start.value_or(hs.initial_mwh()));
        } else {
            esd.add(refs.es_soc[wi - 1], -1.0);
            prog.add_eq(esd, 0.0);
            hsd.add(refs.hs_soc[wi - 1], -1.0);
            prog.add_eq(hsd, 0.0);
        }

        // Generator ramps.
        for (int g = 0; g < ng; ++g) {
            const auto gi = static_cast<std::size_t>(g);
            const auto& gen = c.generators[gi];
            if (w == 0) {
                if (opt.prev_gen_p) {
                    const double prev = (*opt.prev_gen_p)[gi];
                    prog.add_le(LinExpr().add(refs.gen_p[gi][wi], 1.0), prev + gen.ramp_up);
                    prog.add_ge(LinExpr().add(refs.gen_p[gi][wi], 1.0), prev - gen.ramp_down);
                }
            } else {
                LinExpr up;
                up.add(refs.gen_p[gi][wi], 1.0).add(refs.gen_p[gi][wi - 1], -1.0);
                prog.add_le(up, gen.ramp_up);
                LinExpr dn;
                dn.add(refs.gen_p[gi][wi - 1], 1.0).add(refs.gen_p[gi][wi], -1.0);
                prog.add_le(dn, gen.ramp_down);
            }
        }
    }

    // Terminal SOC: cyclic closure over a full-horizon window, explicit
    // target otherwise.
    const auto Wl = static_cast<std::size_t>(W - 1);
    const bool full_window = (t0 == 0 && t1 == c.horizon);
    double es_end = full_window ? c.storage_electric.initial_mwh() : -1.0;
    double hs_end = full_window ? c.storage_heat.initial_mwh() : -1.0;
    if (opt.es_soc_end) es_end = *opt.es_soc_end;
    if (opt.hs_soc_end) hs_end = *opt.hs_soc_end;
    if (es_end >= 0.0) prog.add_eq(LinExpr().add(refs.es_soc[Wl], 1.0), es_end);
    if (hs_end >= 0.0) prog.add_eq(LinExpr().add(refs.hs_soc[Wl], 1.0), hs_end);

    return refs;
}

void add_dispatch_cost(ConicProgram& prog, const CommunityCase& c, const CoreRefs& refs) {
    for (std::size_t g = 0; g < c.generators.size(); ++g) {
        const auto& gen = c.generators[g];
        for (int w = 0; w < refs.steps(); ++w) {
            prog.add_quadratic_cost(refs.gen_p[g][static_cast<std::size_t>(w)], gen.cost_a);
            prog.add_linear_cost(refs.gen_p[g][static_cast<std::size_t>(w)], gen.cost_b);
            prog.add_cost_offset(gen.cost_c);
        }
    }
    for (std::size_t h = 0; h < c.heat_plants.size(); ++h) {
        const auto& hp = c.heat_plants[h];
        for (int w = 0; w < refs.steps(); ++w)
            prog.add_linear_cost(refs.plant_gas[h][static_cast<std::size_t>(w)],
                                 hp.gas_price[static_cast<std::size_t>(refs.t0 + w)]);
    }
}

double socp_tightness(const ConicProgram& prog, const CommunityCase& c, const CoreRefs& refs,
                      const SolveResult& r) {
    std::map<int, int> bus_index;
    for (std::size_t b = 0; b < c.power.buses.size(); ++b)
        bus_index[c.power.buses[b].id] = static_cast<int>(b);
    double worst = 0.0;
    for (std::size_t l = 0; l < c.power.lines.size(); ++l) {
        const auto bf = static_cast<std::size_t>(bus_index.at(c.power.lines[l].from));
        for (int w = 0; w < refs.steps(); ++w) {
            const auto wi = static_cast<std::size_t>(w);
            const double P = r.x[static_cast<std::size_t>(refs.line_p[l][wi])];
            const double Q = r.x[static_cast<std::size_t>(refs.line_q[l][wi])];
            const double cur = r.x[static_cast<std::size_t>(refs.line_cur[l][wi])];
            const double v = r.x[static_cast<std::size_t>(refs.bus_v[bf][wi])];
            worst = std::max(worst, std::abs(P * P + Q * Q - cur * v));
        }
    }
    (void)prog;
    return worst;
}

}  // namespace ihp::detail
