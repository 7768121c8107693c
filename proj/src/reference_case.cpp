#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>

#include "ihp/case.hpp"

namespace ihp {

namespace {

// Classic 33-bus radial feeder branch data (ohms), 12.66 kV.
struct BranchOhm {
    int from, to;
    double r, x;
};
constexpr BranchOhm kFeeder[] = {
    {0, 1, 0.0922, 0.0470},   {1, 2, 0.4930, 0.2511},   {2, 3, 0.3660, 0.1864},
    {3, 4, 0.3811, 0.1941},   {4, 5, 0.8190, 0.7070},   {5, 6, 0.1872, 0.6188},
    {6, 7, 0.7114, 0.2351},   {7, 8, 1.0300, 0.7400},   {8, 9, 1.0440, 0.7400},
    {9, 10, 0.1966, 0.0650},  {10, 11, 0.3744, 0.1238}, {11, 12, 1.4680, 1.1550},
    {12, 13, 0.5416, 0.7129}, {13, 14, 0.5910, 0.5260}, {14, 15, 0.7463, 0.5450},
    {15, 16, 1.2890, 1.7210}, {16, 17, 0.7320, 0.5740}, {1, 18, 0.1640, 0.1565},
    {18, 19, 1.5042, 1.3554}, {19, 20, 0.4095, 0.4784}, {20, 21, 0.7089, 0.9373},
    {2, 22, 0.4512, 0.3083},  {22, 23, 0.8980, 0.7091}, {23, 24, 0.8960, 0.7011},
    {5, 25, 0.2030, 0.1034},  {25, 26, 0.2842, 0.1447}, {26, 27, 1.0590, 0.9337},
    {27, 28, 0.8042, 0.7006}, {28, 29, 0.5075, 0.2585}, {29, 30, 0.9744, 0.9630},
    {30, 31, 0.3105, 0.3619}, {31, 32, 0.3410, 0.5302},
};
constexpr double kZBase = 160.276;  // ohm, 12.66 kV / 1 MVA

double day_curve(double t, double peak_hour) {
    return 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * (t - peak_hour + 12.0) / 24.0));
}

}  // namespace

CommunityCase build_reference_case(bool tight) {
    CommunityCase c;
    c.horizon = 24;
    c.step_hours = 1.0;
    c.rt_step_minutes = 5.0;
    const int T = c.horizon;

    // --- power network -----------------------------------------------------
    c.power.root_bus = 0;
    c.power.root_v_sq = 1.0;
    for (int b = 0; b < 33; ++b) c.power.buses.push_back({b, 0.81, 1.21});
    for (const auto& br : kFeeder) {
        Line l;
        l.from = br.from;
        l.to = br.to;
        l.r = br.r / kZBase;
        l.x = br.x / kZBase;
        l.flow_max = br.from <= 1 ? 5.0 : 4.0;
        l.current_max = 30.0;
        c.power.lines.push_back(l);
    }

    // Subtree membership for PTDF rows (flow measured from parent to child:
    // downstream injections reduce it, downstream loads raise it).
    std::map<int, std::vector<int>> children;
    for (const auto& br : kFeeder) children[br.from].push_back(br.to);
    auto subtree = [&](int root_child) {
        std::vector<bool> in(33, false);
        std::vector<int> stack{root_child};
        while (!stack.empty()) {
            const int u = stack.back();
            stack.pop_back();
            in[static_cast<std::size_t>(u)] = true;
            for (int v : children[u]) stack.push_back(v);
        }
        return in;
    };
    {
        MonitoredCorridor transformer;
        transformer.id = "transformer";
        transformer.limit = 1.5;  // MW
        const auto in = subtree(1);
        transformer.bus_ptdf.assign(33, 0.0);
        for (int b = 0; b < 33; ++b)
            if (in[static_cast<std::size_t>(b)]) transformer.bus_ptdf[static_cast<std::size_t>(b)] = -1.0;
        c.power.corridors.push_back(transformer);

        MonitoredCorridor mid;
        mid.id = "midfeeder";
        mid.limit = tight ? 0.9 : 1.8;
        const auto in6 = subtree(6);
        mid.bus_ptdf.assign(33, 0.0);
        for (int b = 0; b < 33; ++b)
            if (in6[static_cast<std::size_t>(b)]) mid.bus_ptdf[static_cast<std::size_t>(b)] = -1.0;
        c.power.corridors.push_back(mid);
    }

    // --- generators ----------------------------------------------------------
    c.generators.push_back({"g1", 0, 20.0, 35.0, 5.0, tight ? 0.35 : 0.10, 2.5, 1.5, 1.5, 0.5,
                            40.0, -1.5, 1.5});
    c.generators.push_back({"g2", 21, 30.0, 45.0, 3.0, 0.05, 1.2, 0.8, 0.8, 0.3, 40.0, -0.8, 0.8});
    c.generators.push_back({"g3", 24, 40.0, 50.0, 2.0, 0.00, 1.0, 0.6, 0.6, 0.2, 40.0, -0.6, 0.6});

    // --- renewables ----------------------------------------------------------
    {
        RenewableUnit wind;
        wind.id = "wind1";
        wind.bus = 17;
        wind.kind = RenewableKind::Wind;
        wind.capacity = 1.5;
        wind.penalty_k = 60.0;
        const double C = wind.capacity;
        for (int t = 0; t < T; ++t) {
            const double m =
                C * ((tight ? 0.52 : 0.45) +
                     0.25 * std::cos(2.0 * std::numbers::pi * (t - 2.0) / 24.0));
            wind.availability.push_back(Gmm({{0.45, 0.85 * m, 0.10 * C},
                                             {0.35, 1.10 * m, 0.09 * C},
                                             {0.20, 1.35 * m, 0.13 * C}}));
            wind.forecast.push_back(std::min(C, wind.availability.back().mean()));
        }
        c.renewables.push_back(std::move(wind));

        RenewableUnit solar;
        solar.id = "solar1";
        solar.bus = 11;
        solar.kind = RenewableKind::Solar;
        solar.capacity = 1.0;
        solar.penalty_k = 60.0;
        const double Cs = solar.capacity;
        for (int t = 0; t < T; ++t) {
            const double frac =
                (t >= 6 && t <= 18) ? std::sin(std::numbers::pi * (t - 6.0) / 12.0) : 0.0;
            const double s = Cs * frac;
            const double spread = 0.06 * Cs * std::max(0.05, frac) + 1e-3;
            solar.availability.push_back(
                Gmm({{0.55, 0.92 * s, spread}, {0.45, 1.08 * s, 1.4 * spread}}));
            solar.forecast.push_back(std::clamp(solar.availability.back().mean(), 0.0, Cs));
        }
        c.renewables.push_back(std::move(solar));
    }

    // --- heat network: source 0, mixing junctions 2 and 5, loads elsewhere ---
    {
        c.heat.ambient = 10.0;
        c.heat.cp = 4182.0;
        auto add_node = [&](int id, HeatNodeKind kind) {
            HeatNode n;
            n.id = id;
            n.kind = kind;
            n.extraction_flow = kind == HeatNodeKind::Load ? 0.6 : 0.0;
            n.supply_min = 60.0;
            n.supply_max = 110.0;
            n.return_min = 20.0;
            n.return_max = 95.0;
            if (kind == HeatNodeKind::Source) n.supply_setpoint = 95.0;
            c.heat.nodes.push_back(n);
        };
        for (int id = 0; id < 32; ++id) {
            if (id == 0)
                add_node(id, HeatNodeKind::Source);
            else if (id == 2 || id == 5)
                add_node(id, HeatNodeKind::Mix);
            else
                add_node(id, HeatNodeKind::Load);
        }
        auto pipe = [&](int a, int b, double len) {
            HeatPipe p;
            p.from = a;
            p.to = b;
            p.length = len;
            p.mass_flow = 0.0;  // filled from downstream extractions below
            p.loss_coeff = 0.25;
            c.heat.pipes.push_back(p);
        };
        for (int i = 0; i < 7; ++i) pipe(i, i + 1, 220.0 + 15.0 * i);     // spine 0..7
        pipe(2, 8, 260.0);
        for (int i = 8; i < 15; ++i) pipe(i, i + 1, 180.0 + 10.0 * i);    // lateral A
        pipe(5, 16, 240.0);
        for (int i = 16; i < 23; ++i) pipe(i, i + 1, 170.0 + 8.0 * i);    // lateral B
        pipe(7, 24, 250.0);
        for (int i = 24; i < 31; ++i) pipe(i, i + 1, 160.0 + 6.0 * i);    // lateral C

        // Pipe flows = sum of extraction flows downstream.
        std::map<int, std::vector<std::size_t>> out;
        for (std::size_t i = 0; i < c.heat.pipes.size(); ++i)
            out[c.heat.pipes[i].from].push_back(i);
        std::function<double(int)> downstream = [&](int node) -> double {
            double f = c.heat.nodes[static_cast<std::size_t>(node)].extraction_flow;
            for (std::size_t pi : out[node]) f += downstream(c.heat.pipes[pi].to);
            return f;
        };
        for (auto& p : c.heat.pipes) p.mass_flow = downstream(p.to);
    }

    // --- heat plant, storage ---------------------------------------------------
    {
        HeatPlant hp;
        hp.id = "plant1";
        hp.bus = 3;
        hp.heat_node = 0;
        hp.eff_power_to_heat = 0.95;
        hp.eff_gas_to_heat = 0.90;
        hp.p_min = 0.0;
        hp.p_max = tight ? 0.25 : 1.2;
        hp.gas_min = 0.0;
        hp.gas_max = 3.0;
        for (int t = 0; t < T; ++t)
            hp.gas_price.push_back(45.0 +
                                   25.0 * std::sin(2.0 * std::numbers::pi * (t - 10.0) / 24.0));
        c.heat_plants.push_back(std::move(hp));
    }
    c.storage_electric = {1000.0, 0.125, 0.125, 0.1, 0.9, 0.9, 0.9, 200.0, 1.0, 0};
    c.storage_heat = {1000.0, 0.125, 0.125, 0.1, 0.9, 0.9, 0.9, 200.0, 1.0, 0};

    // --- consumers --------------------------------------------------------------
    {
        std::vector<int> load_nodes;
        for (const auto& n : c.heat.nodes)
            if (n.kind == HeatNodeKind::Load) load_nodes.push_back(n.id);
        const int N = 200;
        for (int i = 0; i < N; ++i) {
            Consumer n;
            n.id = "c" + std::to_string(i + 1);
            n.bus = 1 + (i % 32);
            n.heat_node = load_nodes[static_cast<std::size_t>(i) % load_nodes.size()];
            n.alpha = 0.3;
            n.budget = 0.5;
            const double phase = 0.4 * (i % 5);
            for (int t = 0; t < T; ++t) {
                const double dp = day_curve(t + phase, 19.0);
                const double dh = day_curve(t + phase, 7.0);
                n.base_power.push_back(0.004 + 0.0035 * dp);
                n.base_heat.push_back(0.0030 + 0.0020 * dh);
                n.base_reactive.push_back(0.3 * n.base_power.back());
            }
            c.consumers.push_back(std::move(n));
        }
    }

    // --- tariff and risk -----------------------------------------------------------
    for (int t = 0; t < T; ++t) {
        c.tariff.base_power_price.push_back(
            90.0 + 20.0 * std::sin(2.0 * std::numbers::pi * (t - 9.0) / 24.0));
        c.tariff.base_heat_price.push_back(
            70.0 + 10.0 * std::sin(2.0 * std::numbers::pi * (t - 12.0) / 24.0));
    }
    c.tariff.slope = 10000.0;
    c.risk = {0.05, 0.05, 0.05, 0.05};
    return c;
}

}  // namespace ihp
