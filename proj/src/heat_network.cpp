#include "ihp/heat_network.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace ihp {

double pipe_outlet_temp(double t_in, double ambient, double length, double mass_flow,
                        double loss_coeff, double cp) {
    const double decay = std::exp(-loss_coeff * length / (cp * mass_flow));
    return (t_in - ambient) * decay + ambient;
}

HeatField solve_heat_field(const HeatNetwork& net, const std::vector<double>& demand_mw) {
    const std::size_t n = net.nodes.size();
    if (demand_mw.size() != n)
        throw std::invalid_argument("solve_heat_field: demand length mismatch");

    std::map<int, std::size_t> index;
    for (std::size_t i = 0; i < n; ++i) index[net.nodes[i].id] = i;

    std::vector<std::vector<std::size_t>> pipes_in(n), pipes_out(n);
    std::vector<std::size_t> indeg(n, 0);
    for (std::size_t p = 0; p < net.pipes.size(); ++p) {
        const auto from = index.at(net.pipes[p].from);
        const auto to = index.at(net.pipes[p].to);
        pipes_out[from].push_back(p);
        pipes_in[to].push_back(p);
        ++indeg[to];
    }

    // Topological order of the supply digraph.
    std::vector<std::size_t> order;
    {
        std::vector<std::size_t> deg = indeg;
        std::vector<std::size_t> queue;
        for (std::size_t i = 0; i < n; ++i)
            if (deg[i] == 0) queue.push_back(i);
        while (!queue.empty()) {
            const std::size_t u = queue.back();
            queue.pop_back();
            order.push_back(u);
            for (std::size_t p : pipes_out[u]) {
                const auto v = index.at(net.pipes[p].to);
                if (--deg[v] == 0) queue.push_back(v);
            }
        }
        if (order.size() != n)
            throw std::invalid_argument("solve_heat_field: supply network has a cycle");
    }

    HeatField f;
    f.supply_temp.assign(n, net.ambient);
    f.return_temp.assign(n, net.ambient);

    // Supply side: sources inject at their setpoint; every other node mixes
    // the outlet temperatures of its incoming pipes by mass flow.
    for (std::size_t u : order) {
        const auto& node = net.nodes[u];
        if (node.kind == HeatNodeKind::Source) {
            f.supply_temp[u] = node.supply_setpoint;
            continue;
        }
        double flow = 0.0, weighted = 0.0;
        for (std::size_t p : pipes_in[u]) {
            const auto& pipe = net.pipes[p];
            const double t_out =
                pipe_outlet_temp(f.supply_temp[index.at(pipe.from)], net.ambient, pipe.length,
                                 pipe.mass_flow, pipe.loss_coeff, net.cp);
            flow += pipe.mass_flow;
            weighted += pipe.mass_flow * t_out;
        }
        f.supply_temp[u] = flow > 0.0 ? weighted / flow : net.ambient;
    }

    // Return side: loads return at supply minus the extraction temperature
    // drop; the return network mirrors the supply pipes in reverse and
    // mixes at junctions. Pass-through flow (supply headed further
    // downstream) returns through the same node, so its return temperature
    // aggregates everything coming back from below plus the local branch.
    std::vector<double> return_flow(n, 0.0);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        const std::size_t u = *it;
        const auto& node = net.nodes[u];
        double flow = 0.0, weighted = 0.0;
        // Returns arriving from downstream nodes through reversed pipes.
        for (std::size_t p : pipes_out[u]) {
            const auto& pipe = net.pipes[p];
            const auto v = index.at(pipe.to);
            const double t_back = pipe_outlet_temp(f.return_temp[v], net.ambient, pipe.length,
                                                   pipe.mass_flow, pipe.loss_coeff, net.cp);
            flow += pipe.mass_flow;
            weighted += pipe.mass_flow * t_back;
        }
        // Local extraction branch.
        if (node.kind == HeatNodeKind::Load && node.extraction_flow > 0.0) {
            const double drop =
                demand_mw[u] * 1e6 / (net.cp * node.extraction_flow);
            const double t_branch = f.supply_temp[u] - drop;
            flow += node.extraction_flow;
            weighted += node.extraction_flow * t_branch;
        }
        f.return_temp[u] = flow > 0.0 ? weighted / flow : f.supply_temp[u];
        return_flow[u] = flow;
    }

    // Pipe-wall losses on both sides, for reporting.
    double loss_w = 0.0;
    for (const auto& pipe : net.pipes) {
        const auto from = index.at(pipe.from);
        const auto to = index.at(pipe.to);
        const double t_in_s = f.supply_temp[from];
        const double t_out_s = pipe_outlet_temp(t_in_s, net.ambient, pipe.length, pipe.mass_flow,
                                                pipe.loss_coeff, net.cp);
        loss_w += net.cp * pipe.mass_flow * (t_in_s - t_out_s);
        const double t_in_r = f.return_temp[to];
        const double t_out_r = pipe_outlet_temp(t_in_r, net.ambient, pipe.length, pipe.mass_flow,
                                                pipe.loss_coeff, net.cp);
        loss_w += net.cp * pipe.mass_flow * (t_in_r - t_out_r);
    }
    f.network_loss_mw = loss_w / 1e6;

    for (std::size_t i = 0; i < n; ++i) {
        const auto& node = net.nodes[i];
        auto fail = [&](const std::string& what, double value) {
            f.within_bounds = false;
            if (f.violation.empty())
                f.violation = "node " + std::to_string(node.id) + ": " + what + " = " +
                              std::to_string(value) + " outside bounds";
        };
        if (f.supply_temp[i] < node.supply_min - 1e-9 ||
            f.supply_temp[i] > node.supply_max + 1e-9)
            fail("supply temperature", f.supply_temp[i]);
        if (f.return_temp[i] < node.return_min - 1e-9 ||
            f.return_temp[i] > node.return_max + 1e-9)
            fail("return temperature", f.return_temp[i]);
    }
    return f;
}

}  // namespace ihp
