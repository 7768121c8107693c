#include "ihp/day_ahead.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "core_model.hpp"
#include "ihp/heat_network.hpp"

namespace ihp {

namespace {

RiskLevels effective_risk(const CommunityCase& c, const DayAheadOptions& opt) {
    return opt.risk_override.value_or(c.risk);
}

std::map<int, int> bus_index_of(const CommunityCase& c) {
    std::map<int, int> m;
    for (std::size_t b = 0; b < c.power.buses.size(); ++b)
        m[c.power.buses[b].id] = static_cast<int>(b);
    return m;
}

std::map<int, int> node_index_of(const CommunityCase& c) {
    std::map<int, int> m;
    for (std::size_t n = 0; n < c.heat.nodes.size(); ++n)
        m[c.heat.nodes[n].id] = static_cast<int>(n);
    return m;
}

// Sum of PTDF-weighted generator participation, a recurring corridor term.
double gamma_ptdf_sum(const CommunityCase& c, const MonitoredCorridor& cor,
                      const std::map<int, int>& bidx) {
    double s = 0.0;
    for (const auto& g : c.generators)
        s += cor.bus_ptdf[static_cast<std::size_t>(bidx.at(g.bus))] * g.participation;
    return s;
}

}  // namespace

DemandView make_demand_view(const CommunityCase& c, const EquilibriumOutcome& eq) {
    const auto T = static_cast<std::size_t>(c.horizon);
    const auto bidx = bus_index_of(c);
    const auto nidx = node_index_of(c);
    DemandView v;
    v.bus_power.assign(c.power.buses.size(), std::vector<double>(T, 0.0));
    v.bus_reactive.assign(c.power.buses.size(), std::vector<double>(T, 0.0));
    v.node_heat.assign(c.heat.nodes.size(), std::vector<double>(T, 0.0));
    v.heat_total.assign(T, 0.0);
    for (std::size_t n = 0; n < c.consumers.size(); ++n) {
        const auto& cons = c.consumers[n];
        const auto b = static_cast<std::size_t>(bidx.at(cons.bus));
        const auto hn = static_cast<std::size_t>(nidx.at(cons.heat_node));
        for (std::size_t t = 0; t < T; ++t) {
            const double lp = cons.base_power[t] + eq.power_demand[n][t];
            const double lh = cons.base_heat[t] + eq.heat_demand[n][t];
            v.bus_power[b][t] += lp;
            v.bus_reactive[b][t] +=
                cons.base_reactive.empty() ? 0.0 : cons.base_reactive[t];
            v.node_heat[hn][t] += lh;
            v.heat_total[t] += lh;
        }
    }
    v.corridor_demand.assign(c.power.corridors.size(), std::vector<double>(T, 0.0));
    for (std::size_t k = 0; k < c.power.corridors.size(); ++k) {
        const auto& cor = c.power.corridors[k];
        for (std::size_t t = 0; t < T; ++t) {
            double s = 0.0;
            for (std::size_t b = 0; b < c.power.buses.size(); ++b)
                s -= cor.bus_ptdf[b] * v.bus_power[b][t];
            v.corridor_demand[k][t] = s;
        }
    }
    return v;
}

ChanceSpec build_chance_spec(const CommunityCase& c, const DayAheadOptions& opt) {
    for (const auto& g : c.generators)
        if (g.participation <= 0.0)
            throw PipelineError("chance-spec", "generator " + g.id +
                                                  " has a zero participation factor; the affine "
                                                  "substitution divides by it");
    const auto risk = effective_risk(c, opt);
    const auto bidx = bus_index_of(c);
    const int T = c.horizon;
    const int nr = static_cast<int>(c.renewables.size());
    ChanceSpec spec;

    for (int t = 0; t < T; ++t) {
        const auto ti = static_cast<std::size_t>(t);
        // Total availability combo shared by the reserve rows.
        LinearCombo total;
        std::vector<double> ones(static_cast<std::size_t>(nr), 1.0);
        for (const auto& r : c.renewables) total.add(1.0, r.availability[ti]);

        for (int g = 0; g < static_cast<int>(c.generators.size()); ++g) {
            ChanceRow up;
            up.kind = ChanceRow::Kind::ReserveUp;
            up.t = t;
            up.gen = g;
            up.level = risk.alpha_up;
            up.combo = total;
            up.coeff = ones;
            up.quantile = total.quantile(risk.alpha_up);
            spec.rows.push_back(std::move(up));

            ChanceRow dn;
            dn.kind = ChanceRow::Kind::ReserveDown;
            dn.t = t;
            dn.gen = g;
            dn.level = 1.0 - risk.alpha_dr;
            dn.combo = total;
            dn.coeff = ones;
            dn.quantile = total.quantile(1.0 - risk.alpha_dr);
            spec.rows.push_back(std::move(dn));
        }

        for (int k = 0; k < static_cast<int>(c.power.corridors.size()); ++k) {
            const auto& cor = c.power.corridors[static_cast<std::size_t>(k)];
            const double gsum = opt.corridor_gamma_dropped
                                    ? [&] {
                                          double s = 0.0;
                                          for (const auto& g : c.generators)
                                              s += cor.bus_ptdf[static_cast<std::size_t>(
                                                  bidx.at(g.bus))];
                                          return s;
                                      }()
                                    : gamma_ptdf_sum(c, cor, bidx);
            std::vector<double> coeff_up(static_cast<std::size_t>(nr));
            for (int r = 0; r < nr; ++r)
                coeff_up[static_cast<std::size_t>(r)] =
                    cor.bus_ptdf[static_cast<std::size_t>(
                        bidx.at(c.renewables[static_cast<std::size_t>(r)].bus))] -
                    gsum;

            ChanceRow cu;
            cu.kind = ChanceRow::Kind::CorridorUp;
            cu.t = t;
            cu.corridor = k;
            cu.level = 1.0 - risk.alpha_line_up;
            cu.coeff = coeff_up;
            for (int r = 0; r < nr; ++r)
                if (coeff_up[static_cast<std::size_t>(r)] != 0.0)
                    cu.combo.add(coeff_up[static_cast<std::size_t>(r)],
                                 c.renewables[static_cast<std::size_t>(r)].availability[ti]);
            cu.quantile = cu.combo.size() ? cu.combo.quantile(cu.level) : 0.0;
            spec.rows.push_back(std::move(cu));

            ChanceRow cd;
            cd.kind = ChanceRow::Kind::CorridorDown;
            cd.t = t;
            cd.corridor = k;
            cd.level = 1.0 - risk.alpha_line_dn;
            cd.coeff.assign(static_cast<std::size_t>(nr), 0.0);
            for (int r = 0; r < nr; ++r)
                cd.coeff[static_cast<std::size_t>(r)] = -coeff_up[static_cast<std::size_t>(r)];
            for (int r = 0; r < nr; ++r)
                if (cd.coeff[static_cast<std::size_t>(r)] != 0.0)
                    cd.combo.add(cd.coeff[static_cast<std::size_t>(r)],
                                 c.renewables[static_cast<std::size_t>(r)].availability[ti]);
            cd.quantile = cd.combo.size() ? cd.combo.quantile(cd.level) : 0.0;
            spec.rows.push_back(std::move(cd));
        }
    }
    spec.rows_per_step = 2 * c.generators.size() + 2 * c.power.corridors.size();
    return spec;
}

bool SlackReport::all_zero(double tol) const { return max_slack() <= tol; }

double SlackReport::max_slack() const {
    double m = 0.0;
    for (double v : reserve_down) m = std::max(m, v);
    for (const auto& row : corridor_up)
        for (double v : row) m = std::max(m, v);
    for (const auto& row : corridor_down)
        for (double v : row) m = std::max(m, v);
    return m;
}

namespace {

// Deterministic left-hand sides of the reformulated rows, shared between
// the relaxation and the final schedule.
void add_chance_rows(ConicProgram& prog, const CommunityCase& c, const DemandView& demand,
                     const detail::CoreRefs& refs, const ChanceSpec& spec,
                     const std::map<int, int>& bidx,
                     const std::vector<double>* reduced_quantiles,
                     const std::vector<VarId>* reserve_slack,
                     const std::vector<std::vector<VarId>>* corridor_up_slack,
                     const std::vector<std::vector<VarId>>* corridor_down_slack) {
    for (std::size_t i = 0; i < spec.rows.size(); ++i) {
        const auto& row = spec.rows[i];
        const auto wi = static_cast<std::size_t>(row.t - refs.t0);
        if (row.t < refs.t0 || row.t >= refs.t1) continue;
        const double q = reduced_quantiles ? (*reduced_quantiles)[i] : row.quantile;
        const auto ti = static_cast<std::size_t>(row.t);
        switch (row.kind) {
            case ChanceRow::Kind::ReserveUp: {
                const auto& gen = c.generators[static_cast<std::size_t>(row.gen)];
                LinExpr e;
                e.add(refs.gen_p[static_cast<std::size_t>(row.gen)][wi],
                      1.0 / gen.participation);
                for (const auto& sch_t : refs.sch) e.add(sch_t[wi], 1.0);
                prog.add_le(e, gen.p_max / gen.participation + q);
                break;
            }
            case ChanceRow::Kind::ReserveDown: {
                const auto& gen = c.generators[static_cast<std::size_t>(row.gen)];
                LinExpr e;
                e.add(refs.gen_p[static_cast<std::size_t>(row.gen)][wi],
                      1.0 / gen.participation);
                for (const auto& sch_t : refs.sch) e.add(sch_t[wi], 1.0);
                if (reserve_slack) e.add((*reserve_slack)[wi], 1.0);
                prog.add_ge(e, gen.p_min / gen.participation + q);
                break;
            }
            case ChanceRow::Kind::CorridorUp: {
                const auto& cor = c.power.corridors[static_cast<std::size_t>(row.corridor)];
                const double gsum = gamma_ptdf_sum(c, cor, bidx);
                LinExpr e;
                for (std::size_t g = 0; g < c.generators.size(); ++g)
                    e.add(refs.gen_p[g][wi],
                          cor.bus_ptdf[static_cast<std::size_t>(
                              bidx.at(c.generators[g].bus))]);
                for (const auto& sch_t : refs.sch) e.add(sch_t[wi], gsum);
                if (corridor_up_slack)
                    e.add((*corridor_up_slack)[static_cast<std::size_t>(row.corridor)][wi],
                          -1.0);
                prog.add_le(e, cor.limit -
                                   demand.corridor_demand[static_cast<std::size_t>(
                                       row.corridor)][ti] -
                                   q);
                break;
            }
            case ChanceRow::Kind::CorridorDown: {
                const auto& cor = c.power.corridors[static_cast<std::size_t>(row.corridor)];
                const double gsum = gamma_ptdf_sum(c, cor, bidx);
                LinExpr e;
                for (std::size_t g = 0; g < c.generators.size(); ++g)
                    e.add(refs.gen_p[g][wi],
                          -cor.bus_ptdf[static_cast<std::size_t>(
                              bidx.at(c.generators[g].bus))]);
                for (const auto& sch_t : refs.sch) e.add(sch_t[wi], -gsum);
                if (corridor_down_slack)
                    e.add((*corridor_down_slack)[static_cast<std::size_t>(row.corridor)][wi],
                          -1.0);
                prog.add_le(e, cor.limit +
                                   demand.corridor_demand[static_cast<std::size_t>(
                                       row.corridor)][ti] -
                                   q);
                break;
            }
        }
    }
}

void check_heat_field_bounds(const CommunityCase& c, const DemandView& demand,
                             const char* stage) {
    for (int t = 0; t < c.horizon; ++t) {
        std::vector<double> node_demand(c.heat.nodes.size());
        for (std::size_t n = 0; n < node_demand.size(); ++n)
            node_demand[n] = demand.node_heat[n][static_cast<std::size_t>(t)];
        const auto field = solve_heat_field(c.heat, node_demand);
        if (!field.within_bounds)
            throw PipelineError(stage, "heat network temperature bounds at step " +
                                           std::to_string(t) + ": " + field.violation);
    }
}

}  // namespace

SlackReport solve_slack_relaxation(const CommunityCase& c, const DemandView& demand,
                                   const DayAheadOptions& opt) {
    check_heat_field_bounds(c, demand, "relaxation");
    const auto spec = build_chance_spec(c, opt);
    const auto bidx = bus_index_of(c);
    const auto T = static_cast<std::size_t>(c.horizon);
    const auto nk = c.power.corridors.size();

    ConicProgram prog;
    detail::CoreOptions core_opt;
    const auto refs = detail::build_core(prog, c, demand, 0, c.horizon, core_opt);

    std::vector<VarId> drs;
    for (std::size_t t = 0; t < T; ++t) {
        drs.push_back(prog.add_var("drs_" + std::to_string(t), 0.0, kInf));
        prog.add_linear_cost(drs.back(), opt.slack_weight_reserve);
    }
    std::vector<std::vector<VarId>> tsu(nk), tsd(nk);
    for (std::size_t k = 0; k < nk; ++k)
        for (std::size_t t = 0; t < T; ++t) {
            tsu[k].push_back(
                prog.add_var("tsu_" + std::to_string(k) + "_" + std::to_string(t), 0.0, kInf));
            tsd[k].push_back(
                prog.add_var("tsd_" + std::to_string(k) + "_" + std::to_string(t), 0.0, kInf));
            prog.add_linear_cost(tsu[k].back(), opt.slack_weight_corridor);
            prog.add_linear_cost(tsd[k].back(), opt.slack_weight_corridor);
        }

    add_chance_rows(prog, c, demand, refs, spec, bidx, nullptr, &drs, &tsu, &tsd);

    const auto res = solve(prog, opt.solver);
    if (res.status != SolveStatus::Optimal)
        throw PipelineError("relaxation",
                            std::string("solver returned ") + to_string(res.status) + ": " +
                                res.message);

    SlackReport rep;
    rep.reserve_down.resize(T);
    rep.corridor_up.assign(nk, std::vector<double>(T, 0.0));
    rep.corridor_down.assign(nk, std::vector<double>(T, 0.0));
    for (std::size_t t = 0; t < T; ++t)
        rep.reserve_down[t] = std::max(0.0, res.x[static_cast<std::size_t>(drs[t])]);
    for (std::size_t k = 0; k < nk; ++k)
        for (std::size_t t = 0; t < T; ++t) {
            rep.corridor_up[k][t] = std::max(0.0, res.x[static_cast<std::size_t>(tsu[k][t])]);
            rep.corridor_down[k][t] = std::max(0.0, res.x[static_cast<std::size_t>(tsd[k][t])]);
        }
    rep.weighted_objective = res.objective;
    rep.solver_iterations = res.iterations;
    return rep;
}

bool CurtailmentPlan::any() const {
    for (const auto& row : curtailed)
        for (char v : row)
            if (v) return true;
    return false;
}

namespace {

struct Violation {
    ChanceRow::Kind kind;
    int corridor;            // -1 for reserve
    double slack;            // required quantile reduction
    double level;            // quantile level
    std::vector<double> coeff;  // per renewable
    double base_quantile;       // quantile with no curtailment
};

// Piecewise-linear under-approximation of the expected-overflow penalty
// with tangent cuts, minimized subject to the reduced quantile bounds for
// one curtailment set.
struct SubsetLp {
    bool feasible = false;
    std::vector<double> cap;       // per unit in the subset order
    double epigraph_total = 0.0;   // cut-model objective
};

SubsetLp solve_subset_lp(const CommunityCase& c, int t, const std::vector<int>& subset,
                         const std::vector<Violation>& violations, int cuts) {
    const auto ti = static_cast<std::size_t>(t);
    ConicProgram lp;
    std::vector<VarId> cap_vars, epi_vars;
    for (int r : subset) {
        const auto& unit = c.renewables[static_cast<std::size_t>(r)];
        const VarId cv = lp.add_var("cap_" + std::to_string(r), 0.0, unit.capacity);
        const VarId ev = lp.add_var("pen_" + std::to_string(r), 0.0, kInf);
        lp.add_linear_cost(ev, 1.0);
        cap_vars.push_back(cv);
        epi_vars.push_back(ev);
        const auto& dist = unit.availability[ti];
        for (int k = 0; k < cuts; ++k) {
            const double x =
                unit.capacity * static_cast<double>(k) / static_cast<double>(cuts - 1);
            const double w = curtailment_penalty(dist, unit.penalty_k, unit.capacity, x);
            const double dw =
                penalty_derivatives(dist, unit.penalty_k, unit.capacity, x).first;
            // w + dw (cap - x) <= epi
            LinExpr e;
            e.add(cap_vars.back(), dw).add(epi_vars.back(), -1.0);
            lp.add_le(e, -(w - dw * x));
        }
    }

    for (const auto& v : violations) {
        // Curtailed positive-coefficient terms contribute coeff * cap; the
        // rest keep their availability quantile.
        LinearCombo residual;
        LinExpr lhs;
        bool any_cap = false;
        for (std::size_t r = 0; r < c.renewables.size(); ++r) {
            const double coef = v.coeff[r];
            if (coef == 0.0) continue;
            const auto it = std::find(subset.begin(), subset.end(), static_cast<int>(r));
            if (coef > 0.0 && it != subset.end()) {
                lhs.add(cap_vars[static_cast<std::size_t>(it - subset.begin())], coef);
                any_cap = true;
            } else {
                residual.add(coef, c.renewables[r].availability[ti]);
            }
        }
        const double residual_q = residual.size() ? residual.quantile(v.level) : 0.0;
        const double bound = v.base_quantile - v.slack - residual_q;
        if (!any_cap) {
            if (bound < -1e-9) return {};  // this subset cannot relieve the row
            continue;
        }
        lp.add_le(lhs, bound);
    }

    const auto res = solve(lp);
    if (res.status != SolveStatus::Optimal) return {};
    SubsetLp out;
    out.feasible = true;
    for (const auto v : cap_vars)
        out.cap.push_back(std::clamp(res.x[static_cast<std::size_t>(v)], 0.0, kInf));
    out.epigraph_total = res.objective;
    return out;
}

}  // namespace

CurtailmentPlan schedule_curtailment(const CommunityCase& c, const SlackReport& slack,
                                     const DayAheadOptions& opt) {
    const auto T = static_cast<std::size_t>(c.horizon);
    const auto nr = c.renewables.size();
    const auto spec = build_chance_spec(c, opt);
    const double tol = 1e-7;

    CurtailmentPlan plan;
    plan.cap.assign(nr, std::vector<double>(T, 0.0));
    for (std::size_t r = 0; r < nr; ++r)
        for (std::size_t t = 0; t < T; ++t) plan.cap[r][t] = c.renewables[r].capacity;
    plan.curtailed.assign(nr, std::vector<char>(T, 0));
    plan.step_penalty.assign(T, 0.0);
    plan.step_epigraph.assign(T, 0.0);

    for (std::size_t t = 0; t < T; ++t) {
        // Collect this step's violated rows and the reduction they demand.
        std::vector<Violation> violations;
        if (slack.reserve_down[t] > tol) {
            Violation v;
            v.kind = ChanceRow::Kind::ReserveDown;
            v.corridor = -1;
            v.slack = slack.reserve_down[t];
            for (const auto& row : spec.rows)
                if (row.kind == ChanceRow::Kind::ReserveDown &&
                    row.t == static_cast<int>(t) && row.gen == 0) {
                    v.level = row.level;
                    v.coeff = row.coeff;
                    v.base_quantile = row.quantile;
                }
            violations.push_back(std::move(v));
        }
        for (std::size_t k = 0; k < slack.corridor_up.size(); ++k) {
            if (slack.corridor_up[k][t] > tol) {
                Violation v;
                v.kind = ChanceRow::Kind::CorridorUp;
                v.corridor = static_cast<int>(k);
                v.slack = slack.corridor_up[k][t];
                for (const auto& row : spec.rows)
                    if (row.kind == ChanceRow::Kind::CorridorUp &&
                        row.t == static_cast<int>(t) && row.corridor == static_cast<int>(k)) {
                        v.level = row.level;
                        v.coeff = row.coeff;
                        v.base_quantile = row.quantile;
                    }
                violations.push_back(std::move(v));
            }
            if (slack.corridor_down[k][t] > tol) {
                Violation v;
                v.kind = ChanceRow::Kind::CorridorDown;
                v.corridor = static_cast<int>(k);
                v.slack = slack.corridor_down[k][t];
                for (const auto& row : spec.rows)
                    if (row.kind == ChanceRow::Kind::CorridorDown &&
                        row.t == static_cast<int>(t) && row.corridor == static_cast<int>(k)) {
                        v.level = row.level;
                        v.coeff = row.coeff;
                        v.base_quantile = row.quantile;
                    }
                violations.push_back(std::move(v));
            }
        }
        if (violations.empty()) continue;

        // Enumerate curtailment sets (at most 2^nr, nr is tiny) and keep
        // the feasible one with the smallest closed-form penalty.
        double best_penalty = kInf;
        std::vector<int> best_subset;
        std::vector<double> best_caps;
        double best_epigraph = 0.0;
        for (unsigned mask = 0; mask < (1u << nr); ++mask) {
            std::vector<int> subset;
            for (std::size_t r = 0; r < nr; ++r)
                if (mask & (1u << r)) subset.push_back(static_cast<int>(r));
            const auto lp = solve_subset_lp(c, static_cast<int>(t), subset, violations,
                                            opt.taylor_cuts);
            if (!lp.feasible) continue;
            double pen = 0.0;
            for (std::size_t s = 0; s < subset.size(); ++s) {
                const auto& unit = c.renewables[static_cast<std::size_t>(subset[s])];
                pen += curtailment_penalty(unit.availability[t], unit.penalty_k, unit.capacity,
                                           lp.cap[s]);
            }
            if (pen < best_penalty - 1e-12) {
                best_penalty = pen;
                best_subset = subset;
                best_caps = lp.cap;
                best_epigraph = lp.epigraph_total;
            }
        }
        if (!std::isfinite(best_penalty)) {
            std::ostringstream os;
            os << "no curtailment set restores feasibility at step " << t << " (";
            for (const auto& v : violations) {
                switch (v.kind) {
                    case ChanceRow::Kind::ReserveDown: os << "downward-reserve "; break;
                    case ChanceRow::Kind::CorridorUp:
                        os << "corridor+ " << c.power.corridors[static_cast<std::size_t>(
                                                  v.corridor)].id << " ";
                        break;
                    case ChanceRow::Kind::CorridorDown:
                        os << "corridor- " << c.power.corridors[static_cast<std::size_t>(
                                                  v.corridor)].id << " ";
                        break;
                    default: break;
                }
            }
            os << "required " << violations.size() << " reductions)";
            throw PipelineError("curtailment", os.str());
        }
        for (std::size_t s = 0; s < best_subset.size(); ++s) {
            const auto r = static_cast<std::size_t>(best_subset[s]);
            plan.cap[r][t] = best_caps[s];
            plan.curtailed[r][t] = 1;
        }
        plan.step_penalty[t] = best_penalty;
        plan.step_epigraph[t] = best_epigraph;
        plan.total_penalty += best_penalty;
    }
    return plan;
}

namespace {

// Quantile values with the plan's caps folded in through the censored-sum
// bound: capped positive-coefficient terms become coeff*cap constants, the
// rest keep their availability distribution.
std::vector<double> reduced_quantiles(const CommunityCase& c, const ChanceSpec& spec,
                                      const CurtailmentPlan& plan) {
    std::vector<double> q(spec.rows.size());
    for (std::size_t i = 0; i < spec.rows.size(); ++i) {
        const auto& row = spec.rows[i];
        const auto ti = static_cast<std::size_t>(row.t);
        double det = 0.0;
        LinearCombo residual;
        for (std::size_t r = 0; r < c.renewables.size(); ++r) {
            const double coef = row.coeff[r];
            if (coef == 0.0) continue;
            const bool capped = plan.curtailed[r][ti] != 0;
            if (capped && coef > 0.0 && row.kind != ChanceRow::Kind::ReserveUp) {
                det += coef * plan.cap[r][ti];
            } else {
                residual.add(coef, c.renewables[r].availability[ti]);
            }
        }
        q[i] = det + (residual.size() ? residual.quantile(row.level) : 0.0);
    }
    return q;
}

}  // namespace

DaySchedule solve_generation_schedule(const CommunityCase& c, const DemandView& demand,
                                      const EquilibriumOutcome& eq, const CurtailmentPlan& plan,
                                      const DayAheadOptions& opt) {
    check_heat_field_bounds(c, demand, "schedule");
    const auto spec = build_chance_spec(c, opt);
    const auto red_q = reduced_quantiles(c, spec, plan);
    const auto bidx = bus_index_of(c);
    const auto T = static_cast<std::size_t>(c.horizon);

    ConicProgram prog;
    detail::CoreOptions core_opt;
    core_opt.caps = &plan;
    const auto refs = detail::build_core(prog, c, demand, 0, c.horizon, core_opt);
    detail::add_dispatch_cost(prog, c, refs);
    add_chance_rows(prog, c, demand, refs, spec, bidx, &red_q, nullptr, nullptr, nullptr);

    const auto res = solve(prog, opt.solver);
    if (res.status != SolveStatus::Optimal)
        throw PipelineError("schedule", std::string("solver returned ") +
                                            to_string(res.status) + ": " + res.message);

    DaySchedule s;
    auto grab = [&](const std::vector<std::vector<VarId>>& vars) {
        std::vector<std::vector<double>> out(vars.size(), std::vector<double>(T, 0.0));
        for (std::size_t e = 0; e < vars.size(); ++e)
            for (std::size_t t = 0; t < T; ++t)
                out[e][t] = res.x[static_cast<std::size_t>(vars[e][t])];
        return out;
    };
    s.gen_p = grab(refs.gen_p);
    s.gen_q = grab(refs.gen_q);
    s.renew_sched = grab(refs.sch);
    s.cap = plan.cap;
    s.line_p = grab(refs.line_p);
    s.line_q = grab(refs.line_q);
    s.line_cur = grab(refs.line_cur);
    s.bus_v = grab(refs.bus_v);
    s.plant_power = grab(refs.plant_p);
    s.plant_gas = grab(refs.plant_gas);
    auto grab1 = [&](const std::vector<VarId>& vars) {
        std::vector<double> out(T, 0.0);
        for (std::size_t t = 0; t < T; ++t) out[t] = res.x[static_cast<std::size_t>(vars[t])];
        return out;
    };
    s.charge = grab1(refs.es_charge);
    s.discharge = grab1(refs.es_discharge);
    s.soc = grab1(refs.es_soc);
    s.heat_charge = grab1(refs.hs_charge);
    s.heat_discharge = grab1(refs.hs_discharge);
    s.heat_soc = grab1(refs.hs_soc);

    s.supply_temp.assign(c.heat.nodes.size(), std::vector<double>(T, 0.0));
    s.return_temp.assign(c.heat.nodes.size(), std::vector<double>(T, 0.0));
    for (std::size_t t = 0; t < T; ++t) {
        std::vector<double> node_demand(c.heat.nodes.size());
        for (std::size_t n = 0; n < node_demand.size(); ++n)
            node_demand[n] = demand.node_heat[n][t];
        const auto field = solve_heat_field(c.heat, node_demand);
        for (std::size_t n = 0; n < node_demand.size(); ++n) {
            s.supply_temp[n][t] = field.supply_temp[n];
            s.return_temp[n][t] = field.return_temp[n];
        }
    }

    s.price_power.resize(T);
    s.price_heat.resize(T);
    s.demand_power.assign(T, 0.0);
    s.demand_heat.assign(T, 0.0);
    for (std::size_t t = 0; t < T; ++t) {
        s.price_power[t] = eq.mean_power_price(static_cast<int>(t));
        s.price_heat[t] = eq.mean_heat_price(static_cast<int>(t));
        for (std::size_t b = 0; b < demand.bus_power.size(); ++b)
            s.demand_power[t] += demand.bus_power[b][t];
        s.demand_heat[t] = demand.heat_total[t];
    }

    for (std::size_t g = 0; g < c.generators.size(); ++g) {
        const auto& gen = c.generators[g];
        for (std::size_t t = 0; t < T; ++t) {
            const double p = s.gen_p[g][t];
            s.generation_cost += gen.cost_a * p * p + gen.cost_b * p + gen.cost_c;
        }
    }
    for (std::size_t h = 0; h < c.heat_plants.size(); ++h)
        for (std::size_t t = 0; t < T; ++t)
            s.gas_cost += s.plant_gas[h][t] * c.heat_plants[h].gas_price[t];
    for (std::size_t r = 0; r < c.renewables.size(); ++r) {
        const auto& unit = c.renewables[r];
        for (std::size_t t = 0; t < T; ++t)
            s.curtailment_penalty += curtailment_penalty(unit.availability[t], unit.penalty_k,
                                                         unit.capacity, plan.cap[r][t]);
    }
    s.total_cost = s.generation_cost + s.gas_cost + s.curtailment_penalty;
    s.socp_tightness = detail::socp_tightness(prog, c, refs, res);
    s.solver_iterations = res.iterations;
    s.demand = demand;
    return s;
}

DayAheadResult run_day_ahead(const CommunityCase& c, const DayAheadOptions& opt) {
    DayAheadResult out;
    out.equilibrium = fixed_point_equilibrium(c);
    if (!out.equilibrium.converged)
        throw PipelineError("equilibrium", "fixed point did not converge within " +
                                               std::to_string(out.equilibrium.iterations) +
                                               " sweeps (residual " +
                                               std::to_string(out.equilibrium.final_residual) +
                                               ")");
    const auto demand = make_demand_view(c, out.equilibrium);
    out.slack = solve_slack_relaxation(c, demand, opt);
    if (out.slack.all_zero()) {
        CurtailmentPlan plan;
        const auto T = static_cast<std::size_t>(c.horizon);
        plan.cap.assign(c.renewables.size(), std::vector<double>(T, 0.0));
        for (std::size_t r = 0; r < c.renewables.size(); ++r)
            for (std::size_t t = 0; t < T; ++t)
                plan.cap[r][t] = c.renewables[r].capacity;
        plan.curtailed.assign(c.renewables.size(), std::vector<char>(T, 0));
        plan.step_penalty.assign(T, 0.0);
        plan.step_epigraph.assign(T, 0.0);
        out.plan = std::move(plan);
        out.curtailment_stage_ran = false;
    } else {
        out.plan = schedule_curtailment(c, out.slack, opt);
        out.curtailment_stage_ran = true;
    }
    out.schedule = solve_generation_schedule(c, demand, out.equilibrium, out.plan, opt);
    return out;
}

}  // namespace ihp
