#include "ihp/market.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

namespace ihp {

double tlou_price(double base_price, double slope, double demand) {
    if (demand < 0.0) throw std::invalid_argument("tlou_price: negative demand");
    return base_price + slope * demand;
}

DemandPair optimal_demand(const Consumer& consumer, double price_p, double price_h) {
    if (!(price_p > 0.0) || !(price_h > 0.0))
        throw std::invalid_argument("optimal_demand: prices must be positive");
    return {consumer.alpha * consumer.budget / price_p,
            (1.0 - consumer.alpha) * consumer.budget / price_h};
}

double demand_price_root(double base_price, double slope, double budget_share) {
    if (slope < 0.0) throw std::invalid_argument("demand_price_root: negative slope");
    if (slope == 0.0) {
        if (!(base_price > 0.0))
            throw std::invalid_argument("demand_price_root: base price and slope both zero");
        return budget_share / base_price;
    }
    // slope d^2 + base d - share = 0, positive root.
    return (-base_price + std::sqrt(base_price * base_price + 4.0 * slope * budget_share)) /
           (2.0 * slope);
}

ClosedFormPoint closed_form_equilibrium(const Consumer& consumer, const Tariff& tariff, int t) {
    const auto ti = static_cast<std::size_t>(t);
    const double l = demand_price_root(tariff.base_power_price[ti], tariff.slope,
                                       consumer.alpha * consumer.budget);
    const double h = demand_price_root(tariff.base_heat_price[ti], tariff.slope,
                                       (1.0 - consumer.alpha) * consumer.budget);
    return {{l, h},
            tlou_price(tariff.base_power_price[ti], tariff.slope, l),
            tlou_price(tariff.base_heat_price[ti], tariff.slope, h)};
}

double EquilibriumOutcome::mean_power_price(int t) const {
    double s = 0.0;
    for (const auto& row : power_price) s += row[static_cast<std::size_t>(t)];
    return power_price.empty() ? 0.0 : s / static_cast<double>(power_price.size());
}

double EquilibriumOutcome::mean_heat_price(int t) const {
    double s = 0.0;
    for (const auto& row : heat_price) s += row[static_cast<std::size_t>(t)];
    return heat_price.empty() ? 0.0 : s / static_cast<double>(heat_price.size());
}

EquilibriumOutcome fixed_point_equilibrium(const CommunityCase& c,
                                           const EquilibriumOptions& opt) {
    const std::size_t N = c.consumers.size();
    const std::size_t T = static_cast<std::size_t>(c.horizon);
    EquilibriumOutcome out;
    out.power_demand.assign(N, std::vector<double>(T, 0.0));
    out.heat_demand.assign(N, std::vector<double>(T, 0.0));
    out.power_price.assign(N, std::vector<double>(T, 0.0));
    out.heat_price.assign(N, std::vector<double>(T, 0.0));

    // Initial demand guess at base prices.
    for (std::size_t n = 0; n < N; ++n)
        for (std::size_t t = 0; t < T; ++t) {
            const auto d = optimal_demand(c.consumers[n],
                                          std::max(1e-9, c.tariff.base_power_price[t]),
                                          std::max(1e-9, c.tariff.base_heat_price[t]));
            out.power_demand[n][t] = opt.initial_scale * d.power;
            out.heat_demand[n][t] = opt.initial_scale * d.heat;
        }

    double prev_residual = -1.0, prev_prev_residual = -1.0;
    bool damped = false;
    int k = 0;
    for (; k < opt.max_iter; ++k) {
        double residual = 0.0;
        double price_p_sum = 0.0, price_h_sum = 0.0;

        const auto sweep_consumer = [&](std::size_t n) {
            double local_res = 0.0;
            for (std::size_t t = 0; t < T; ++t) {
                const double lp = tlou_price(c.tariff.base_power_price[t], c.tariff.slope,
                                             out.power_demand[n][t]);
                const double hp = tlou_price(c.tariff.base_heat_price[t], c.tariff.slope,
                                             out.heat_demand[n][t]);
                out.power_price[n][t] = lp;
                out.heat_price[n][t] = hp;
                const auto d = optimal_demand(c.consumers[n], lp, hp);
                double lnew = d.power, hnew = d.heat;
                if (damped) {
                    lnew = 0.5 * (out.power_demand[n][t] + lnew);
                    hnew = 0.5 * (out.heat_demand[n][t] + hnew);
                }
                local_res += std::abs(lnew - out.power_demand[n][t]) +
                             std::abs(hnew - out.heat_demand[n][t]);
                out.power_demand[n][t] = lnew;
                out.heat_demand[n][t] = hnew;
            }
            return local_res;
        };

        if (opt.mode == ExecMode::Parallel) {
            double res_acc = 0.0;
#pragma omp parallel for schedule(static) reduction(+ : res_acc)
            for (long long n = 0; n < static_cast<long long>(N); ++n)
                res_acc += sweep_consumer(static_cast<std::size_t>(n));
            residual = res_acc;
        } else {
            for (std::size_t n = 0; n < N; ++n) residual += sweep_consumer(n);
        }

        for (std::size_t t = 0; t < T; ++t) {
            price_p_sum += out.mean_power_price(static_cast<int>(t));
            price_h_sum += out.mean_heat_price(static_cast<int>(t));
        }
        out.trace.push_back({k + 1, residual, price_p_sum / static_cast<double>(T),
                             price_h_sum / static_cast<double>(T)});
        out.final_residual = residual;
        if (residual < opt.tolerance) {
            out.converged = true;
            ++k;
            break;
        }
        // Averaged updates take over when the pure sweep oscillates (two
        // consecutive residual increases) or barely contracts (the map's
        // multiplier approaches -1 as slope * demand dominates the base
        // price; the averaged map contracts at a rate below one half there).
        if (!damped && prev_residual > 0.0 && prev_prev_residual > 0.0) {
            const bool rising = residual > prev_residual && prev_residual > prev_prev_residual;
            const bool crawling =
                residual > 0.9 * prev_residual && prev_residual > 0.9 * prev_prev_residual;
            if (rising || crawling) damped = true;
        }
        prev_prev_residual = prev_residual;
        prev_residual = residual;
    }
    out.iterations = k;

    out.total_power.assign(T, 0.0);
    out.total_heat.assign(T, 0.0);
    for (std::size_t n = 0; n < N; ++n)
        for (std::size_t t = 0; t < T; ++t) {
            out.total_power[t] += out.power_demand[n][t];
            out.total_heat[t] += out.heat_demand[n][t];
        }
    return out;
}

void write_equilibrium_trace_csv(const EquilibriumOutcome& out, std::ostream& os) {
    os << "iter,residual,mean_price_p,mean_price_h\n";
    char buf[160];
    for (const auto& p : out.trace) {
        std::snprintf(buf, sizeof buf, "%d,%.12g,%.12g,%.12g\n", p.iter, p.residual,
                      p.mean_price_p, p.mean_price_h);
        os << buf;
    }
}

}  // namespace ihp
