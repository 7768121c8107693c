#include "ihp/chance_check.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "ihp/sampling.hpp"

namespace ihp {

double ChanceCheckReport::worst() const {
    return std::max({max_reserve_up, max_reserve_down, max_corridor_up, max_corridor_down});
}

ChanceCheckReport validate_chance_levels(const CommunityCase& c, const DaySchedule& schedule,
                                         std::size_t draws, std::uint64_t seed, ExecMode mode) {
    const auto T = static_cast<std::size_t>(c.horizon);
    const auto ng = c.generators.size();
    const auto nr = c.renewables.size();
    const auto nk = c.power.corridors.size();

    std::map<int, int> bidx;
    for (std::size_t b = 0; b < c.power.buses.size(); ++b)
        bidx[c.power.buses[b].id] = static_cast<int>(b);

    ChanceCheckReport rep;
    rep.draws = draws;

    const std::size_t nblocks = (draws + kMcBlock - 1) / kMcBlock;
    for (std::size_t t = 0; t < T; ++t) {
        // Violation counters per generator and per corridor direction.
        std::vector<long long> up(ng, 0), dn(ng, 0), cu(nk, 0), cd(nk, 0);

        double sched_total = 0.0;
        for (std::size_t r = 0; r < nr; ++r) sched_total += schedule.renew_sched[r][t];

        const auto run_block = [&](std::size_t blk, std::vector<long long>& bup,
                                   std::vector<long long>& bdn, std::vector<long long>& bcu,
                                   std::vector<long long>& bcd) {
            std::mt19937_64 rng(substream_seed(seed, t * 1000003 + blk));
            const std::size_t begin = blk * kMcBlock;
            const std::size_t end = std::min(begin + kMcBlock, draws);
            std::vector<double> actual(nr);
            for (std::size_t i = begin; i < end; ++i) {
                double dev = -sched_total;
                for (std::size_t r = 0; r < nr; ++r) {
                    const auto& unit = c.renewables[r];
                    const double avail =
                        std::clamp(sample_gmm(unit.availability[t], rng), 0.0, unit.capacity);
                    actual[r] = std::min(avail, schedule.cap[r][t]);
                    dev += actual[r];
                }
                for (std::size_t g = 0; g < ng; ++g) {
                    const double adj =
                        schedule.gen_p[g][t] - c.generators[g].participation * dev;
                    if (adj > c.generators[g].p_max + 1e-12) ++bup[g];
                    if (adj < c.generators[g].p_min - 1e-12) ++bdn[g];
                }
                for (std::size_t k = 0; k < nk; ++k) {
                    const auto& cor = c.power.corridors[k];
                    // corridor_demand already carries the load sign.
                    double flow = schedule.demand.corridor_demand[k][t];
                    for (std::size_t g = 0; g < ng; ++g) {
                        const double adj =
                            schedule.gen_p[g][t] - c.generators[g].participation * dev;
                        flow += cor.bus_ptdf[static_cast<std::size_t>(
                                    bidx.at(c.generators[g].bus))] *
                                adj;
                    }
                    for (std::size_t r = 0; r < nr; ++r)
                        flow += cor.bus_ptdf[static_cast<std::size_t>(
                                    bidx.at(c.renewables[r].bus))] *
                                actual[r];
                    if (flow > cor.limit + 1e-12) ++bcu[k];
                    if (flow < -cor.limit - 1e-12) ++bcd[k];
                }
            }
        };

        if (mode == ExecMode::Serial) {
            for (std::size_t blk = 0; blk < nblocks; ++blk) run_block(blk, up, dn, cu, cd);
        } else {
#pragma omp parallel
            {
                std::vector<long long> lu(ng, 0), ld(ng, 0), lcu(nk, 0), lcd(nk, 0);
#pragma omp for schedule(static) nowait
                for (long long blk = 0; blk < static_cast<long long>(nblocks); ++blk)
                    run_block(static_cast<std::size_t>(blk), lu, ld, lcu, lcd);
#pragma omp critical
                {
                    for (std::size_t g = 0; g < ng; ++g) {
                        up[g] += lu[g];
                        dn[g] += ld[g];
                    }
                    for (std::size_t k = 0; k < nk; ++k) {
                        cu[k] += lcu[k];
                        cd[k] += lcd[k];
                    }
                }
            }
        }

        const double inv = 1.0 / static_cast<double>(draws);
        for (std::size_t g = 0; g < ng; ++g) {
            if (up[g] * inv > rep.max_reserve_up) {
                rep.max_reserve_up = up[g] * inv;
                rep.worst_up_gen = static_cast<int>(g);
                rep.worst_up_step = static_cast<int>(t);
            }
            if (dn[g] * inv > rep.max_reserve_down) {
                rep.max_reserve_down = dn[g] * inv;
                rep.worst_down_gen = static_cast<int>(g);
                rep.worst_down_step = static_cast<int>(t);
            }
        }
        for (std::size_t k = 0; k < nk; ++k) {
            rep.max_corridor_up = std::max(rep.max_corridor_up, cu[k] * inv);
            rep.max_corridor_down = std::max(rep.max_corridor_down, cd[k] * inv);
        }
    }
    return rep;
}

}  // namespace ihp
