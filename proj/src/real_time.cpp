#include "ihp/real_time.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include "core_model.hpp"
#include "ihp/sampling.hpp"

namespace ihp {

Realization realize(const CommunityCase& c, const CurtailmentPlan& plan, std::uint64_t seed) {
    Realization real;
    real.seed = seed;
    const int slots = c.rt_steps();
    const int per_hour = c.rt_steps_per_hour();
    const auto nr = c.renewables.size();
    real.available.assign(nr, std::vector<double>(static_cast<std::size_t>(slots), 0.0));
    real.actual = real.available;
    for (std::size_t r = 0; r < nr; ++r) {
        const auto& unit = c.renewables[r];
        for (int h = 0; h < c.horizon; ++h) {
            // One draw per hour; supply is treated as stable within it.
            std::mt19937_64 rng(substream_seed(seed, r * 1000 + static_cast<std::size_t>(h)));
            const double draw = sample_gmm(unit.availability[static_cast<std::size_t>(h)], rng);
            const double avail = std::clamp(draw, 0.0, unit.capacity);
            const double act = std::min(avail, plan.cap[r][static_cast<std::size_t>(h)]);
            for (int s = 0; s < per_hour; ++s) {
                const auto slot = static_cast<std::size_t>(h * per_hour + s);
                real.available[r][slot] = avail;
                real.actual[r][slot] = act;
            }
        }
    }
    return real;
}

Realization realization_from_trace(const CommunityCase& c, const CurtailmentPlan& plan,
                                   const std::string& csv_path) {
    std::ifstream in(csv_path);
    if (!in) throw std::runtime_error("cannot open trace: " + csv_path);
    Realization real;
    const int slots = c.rt_steps();
    const int per_hour = c.rt_steps_per_hour();
    const auto nr = c.renewables.size();
    real.available.assign(nr, std::vector<double>(static_cast<std::size_t>(slots), 0.0));
    real.actual = real.available;
    std::string line;
    std::getline(in, line);  // header
    int slot = 0;
    while (std::getline(in, line) && slot < slots) {
        std::stringstream ss(line);
        std::string cell;
        std::getline(ss, cell, ',');  // slot index column
        for (std::size_t r = 0; r < nr; ++r) {
            if (!std::getline(ss, cell, ','))
                throw std::runtime_error("trace row " + std::to_string(slot) +
                                         ": expected one column per renewable unit");
            const double avail =
                std::clamp(std::stod(cell), 0.0, c.renewables[r].capacity);
            real.available[r][static_cast<std::size_t>(slot)] = avail;
            const int hour = slot / per_hour;
            real.actual[r][static_cast<std::size_t>(slot)] =
                std::min(avail, plan.cap[r][static_cast<std::size_t>(hour)]);
        }
        ++slot;
    }
    if (slot != slots)
        throw std::runtime_error("trace has " + std::to_string(slot) + " rows, expected " +
                                 std::to_string(slots));
    return real;
}

std::vector<double> affine_point(const CommunityCase& c, const std::vector<double>& scheduled,
                                 double deviation) {
    std::vector<double> out(scheduled.size());
    for (std::size_t g = 0; g < scheduled.size(); ++g)
        out[g] = scheduled[g] - c.generators[g].participation * deviation;
    return out;
}

namespace {

struct HourProblem {
    std::vector<double> gen_power;
    double shed = 0.0, spill = 0.0;
    double balance_residual = 0.0;
    double adjust_cost = 0.0;
};

double deviation_cost(const CommunityCase& c, const std::vector<double>& adjusted,
                      const std::vector<double>& scheduled, bool signed_cost) {
    double cost = 0.0;
    for (std::size_t g = 0; g < adjusted.size(); ++g) {
        const double d = adjusted[g] - scheduled[g];
        cost += c.generators[g].adjust_cost * (signed_cost ? d : std::abs(d));
    }
    return cost;
}

// The hourly re-dispatch behind each five-minute slot of that hour (the
// within-hour realization is constant, so the twelve slots share it).
HourProblem solve_hour(const CommunityCase& c, const DaySchedule& schedule,
                       const Realization& real, int hour, const std::vector<double>& prev_gen,
                       const DemandView& demand, const RtOptions& opt) {
    const auto hi = static_cast<std::size_t>(hour);
    const int per_hour = c.rt_steps_per_hour();
    const int slot0 = hour * per_hour;

    ConicProgram prog;
    detail::CoreOptions core;
    std::vector<std::vector<double>> fixed(c.renewables.size());
    for (std::size_t r = 0; r < c.renewables.size(); ++r)
        fixed[r] = {real.actual[r][static_cast<std::size_t>(slot0)]};
    core.fixed_renewables = fixed;
    core.pin_to_schedule = &schedule;
    core.es_soc_start = hour == 0 ? c.storage_electric.initial_mwh() : schedule.soc[hi - 1];
    core.hs_soc_start = hour == 0 ? c.storage_heat.initial_mwh() : schedule.heat_soc[hi - 1];
    core.es_soc_end = schedule.soc[hi];
    core.hs_soc_end = schedule.heat_soc[hi];
    core.prev_gen_p = prev_gen;
    core.with_emergency_slack = true;
    const auto refs = detail::build_core(prog, c, demand, hour, hour + 1, core);

    // Deviation cost around the frozen schedule.
    std::vector<VarId> dev_pos, dev_neg;
    for (std::size_t g = 0; g < c.generators.size(); ++g) {
        const double sched = schedule.gen_p[g][hi];
        const VarId dp = prog.add_var("devp_" + std::to_string(g), 0.0, kInf);
        const VarId dn = prog.add_var("devn_" + std::to_string(g), 0.0, kInf);
        dev_pos.push_back(dp);
        dev_neg.push_back(dn);
        LinExpr link;
        link.add(refs.gen_p[g][0], 1.0).add(dp, -1.0).add(dn, 1.0);
        prog.add_eq(link, sched);
        const double cpen = c.generators[g].adjust_cost;
        if (opt.signed_deviation_cost) {
            prog.add_linear_cost(dp, cpen);
            prog.add_linear_cost(dn, -cpen);
        } else {
            prog.add_linear_cost(dp, cpen);
            prog.add_linear_cost(dn, cpen);
        }
    }

    const auto res = solve(prog, opt.solver);
    if (res.status != SolveStatus::Optimal)
        throw PipelineError("real-time", "hour " + std::to_string(hour) +
                                             ": solver returned " + to_string(res.status));
    HourProblem out;
    for (std::size_t g = 0; g < c.generators.size(); ++g)
        out.gen_power.push_back(res.x[static_cast<std::size_t>(refs.gen_p[g][0])]);
    out.shed = res.x[static_cast<std::size_t>(refs.shed[0])];
    out.spill = res.x[static_cast<std::size_t>(refs.spill[0])];

    // Residual of the aggregate balance: adjusted totals absorb exactly
    // the renewable deviation from schedule (relief terms included).
    double sched_total = 0.0, adj_total = 0.0, dev = 0.0;
    for (std::size_t g = 0; g < c.generators.size(); ++g) {
        sched_total += schedule.gen_p[g][hi];
        adj_total += out.gen_power[g];
    }
    for (std::size_t r = 0; r < c.renewables.size(); ++r)
        dev += real.actual[r][static_cast<std::size_t>(slot0)] - schedule.renew_sched[r][hi];
    out.balance_residual =
        std::abs(adj_total - (sched_total - dev) - out.shed + out.spill);
    std::vector<double> sched_gen(c.generators.size());
    for (std::size_t g = 0; g < c.generators.size(); ++g) sched_gen[g] = schedule.gen_p[g][hi];
    out.adjust_cost = deviation_cost(c, out.gen_power, sched_gen, opt.signed_deviation_cost);
    return out;
}

}  // namespace

RtStep dispatch_step(const CommunityCase& c, const DaySchedule& schedule,
                     const Realization& real, int slot, const std::vector<double>& prev_gen,
                     const RtOptions& opt) {
    const int per_hour = c.rt_steps_per_hour();
    const int hour = slot / per_hour;
    // dispatch_step exists for callers stepping manually; run_real_time
    // caches the hourly solve across the twelve identical slots.
    const auto hp = solve_hour(c, schedule, real, hour, prev_gen, schedule.demand, opt);

    RtStep st;
    st.slot = slot;
    st.gen_power = hp.gen_power;
    st.adjust_cost = hp.adjust_cost;
    st.shed = hp.shed;
    st.spill = hp.spill;
    st.balance_residual = hp.balance_residual;

    const auto hi = static_cast<std::size_t>(hour);
    double dev = 0.0;
    for (std::size_t r = 0; r < c.renewables.size(); ++r)
        dev += real.actual[r][static_cast<std::size_t>(slot)] - schedule.renew_sched[r][hi];
    std::vector<double> sched_gen(c.generators.size());
    for (std::size_t g = 0; g < c.generators.size(); ++g) sched_gen[g] = schedule.gen_p[g][hi];
    const auto aff = affine_point(c, sched_gen, dev);
    st.affine_cost = deviation_cost(c, aff, sched_gen, opt.signed_deviation_cost);
    st.affine_feasible = true;
    for (std::size_t g = 0; g < c.generators.size(); ++g)
        if (aff[g] < c.generators[g].p_min - 1e-9 || aff[g] > c.generators[g].p_max + 1e-9)
            st.affine_feasible = false;
    return st;
}

RtDispatch run_real_time(const CommunityCase& c, const DaySchedule& schedule,
                         const Realization& real, const RtOptions& opt) {
    RtDispatch out;
    const int per_hour = c.rt_steps_per_hour();
    const DemandView& demand = schedule.demand;

    std::vector<double> prev_gen(c.generators.size());
    for (std::size_t g = 0; g < c.generators.size(); ++g)
        prev_gen[g] = schedule.gen_p[g][0];

    for (int hour = 0; hour < c.horizon; ++hour) {
        const auto hi = static_cast<std::size_t>(hour);
        const auto hp = solve_hour(c, schedule, real, hour, prev_gen, demand, opt);

        double dev = 0.0;
        for (std::size_t r = 0; r < c.renewables.size(); ++r)
            dev += real.actual[r][static_cast<std::size_t>(hour * per_hour)] -
                   schedule.renew_sched[r][hi];
        std::vector<double> sched_gen(c.generators.size());
        for (std::size_t g = 0; g < c.generators.size(); ++g)
            sched_gen[g] = schedule.gen_p[g][hi];
        const auto aff = affine_point(c, sched_gen, dev);
        bool aff_ok = true;
        for (std::size_t g = 0; g < c.generators.size(); ++g)
            if (aff[g] < c.generators[g].p_min - 1e-9 || aff[g] > c.generators[g].p_max + 1e-9)
                aff_ok = false;
        const double aff_cost = deviation_cost(c, aff, sched_gen, opt.signed_deviation_cost);

        for (int s = 0; s < per_hour; ++s) {
            RtStep st;
            st.slot = hour * per_hour + s;
            st.gen_power = hp.gen_power;
            st.adjust_cost = hp.adjust_cost;
            st.affine_cost = aff_cost;
            st.affine_feasible = aff_ok;
            st.balance_residual = hp.balance_residual;
            st.shed = hp.shed;
            st.spill = hp.spill;
            out.total_adjust_cost +=
                hp.adjust_cost * (c.rt_step_minutes / 60.0);  // cost accrues per slot
            if (hp.shed > 1e-6 || hp.spill > 1e-6) ++out.emergencies;
            out.max_balance_residual = std::max(out.max_balance_residual, st.balance_residual);
            out.steps.push_back(std::move(st));
        }
        prev_gen = hp.gen_power;

        // Hourly heat re-dispatch with the electric side frozen: with no
        // heat-side uncertainty it reproduces the day-ahead setpoints and
        // re-verifies the balance.
        HourHeat hh;
        hh.hour = hour;
        for (std::size_t h = 0; h < c.heat_plants.size(); ++h) {
            hh.plant_power.push_back(schedule.plant_power[h][hi]);
            hh.plant_gas.push_back(schedule.plant_gas[h][hi]);
        }
        hh.heat_charge = schedule.heat_charge[hi];
        hh.heat_discharge = schedule.heat_discharge[hi];
        double supply = hh.heat_discharge - hh.heat_charge;
        for (std::size_t h = 0; h < c.heat_plants.size(); ++h)
            supply += c.heat_plants[h].eff_power_to_heat * hh.plant_power[h] +
                      c.heat_plants[h].eff_gas_to_heat * hh.plant_gas[h];
        hh.balance_residual = std::abs(supply - demand.heat_total[hi]);
        out.heat.push_back(std::move(hh));
    }
    return out;
}

}  // namespace ihp
