#include "ihp/conic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>
#include <stdexcept>

#include "std_form.hpp"

namespace ihp {

const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::Optimal: return "optimal";
        case SolveStatus::Infeasible: return "infeasible";
        case SolveStatus::Unbounded: return "unbounded";
        case SolveStatus::NumericalFailure: return "numerical-failure";
    }
    return "unknown";
}

VarId ConicProgram::add_var(std::string name, double lb, double ub) {
    if (index_.count(name)) throw std::invalid_argument("duplicate variable name: " + name);
    if (lb > ub) throw std::invalid_argument("variable " + name + ": lb > ub");
    const VarId v = static_cast<VarId>(names_.size());
    index_.emplace(name, v);
    names_.push_back(std::move(name));
    lb_.push_back(lb);
    ub_.push_back(ub);
    lin_cost_.push_back(0.0);
    quad_cost_.push_back(0.0);
    return v;
}

void ConicProgram::set_bounds(VarId v, double lb, double ub) {
    if (lb > ub) throw std::invalid_argument("set_bounds: lb > ub");
    lb_[static_cast<std::size_t>(v)] = lb;
    ub_[static_cast<std::size_t>(v)] = ub;
}

void ConicProgram::add_linear_cost(VarId v, double coeff) {
    lin_cost_[static_cast<std::size_t>(v)] += coeff;
}

void ConicProgram::add_quadratic_cost(VarId v, double coeff) {
    if (coeff < 0.0) throw std::invalid_argument("add_quadratic_cost: negative coefficient");
    quad_cost_[static_cast<std::size_t>(v)] += coeff;
}

int ConicProgram::add_row(RowSense sense, const LinExpr& e, double rhs) {
    for (const auto& t : e.terms())
        if (t.var < 0 || static_cast<std::size_t>(t.var) >= names_.size())
            throw std::invalid_argument("row references undeclared variable");
    rows_.push_back({sense, e, rhs - e.constant()});
    return static_cast<int>(rows_.size()) - 1;
}

int ConicProgram::add_soc(std::vector<LinExpr> norm, LinExpr rhs) {
    if (norm.empty()) throw std::invalid_argument("add_soc: empty norm");
    socs_.push_back({std::move(norm), std::move(rhs)});
    return static_cast<int>(socs_.size()) - 1;
}

VarId ConicProgram::find_var(const std::string& name) const {
    auto it = index_.find(name);
    return it == index_.end() ? -1 : it->second;
}

double ConicProgram::objective_value(const std::vector<double>& x) const {
    double v = cost_offset_;
    for (std::size_t j = 0; j < names_.size(); ++j)
        v += lin_cost_[j] * x[j] + quad_cost_[j] * x[j] * x[j];
    return v;
}

double ConicProgram::value_of(const SolveResult& r, const std::string& name) const {
    const VarId v = find_var(name);
    if (v < 0) throw std::invalid_argument("no such variable: " + name);
    return r.x[static_cast<std::size_t>(v)];
}

namespace detail {

StdForm lower_program(const ConicProgram& p, std::uint64_t permute_seed) {
    StdForm f;
    const int nv = static_cast<int>(p.num_vars());

    // Variable order: identity or a seeded shuffle; epigraph variables for
    // quadratic costs are appended at the end either way.
    std::vector<int> order(nv);
    std::iota(order.begin(), order.end(), 0);
    if (permute_seed != 0) {
        std::mt19937_64 rng(permute_seed);
        std::shuffle(order.begin(), order.end(), rng);
    }
    f.program_to_std.assign(nv, -1);
    for (int i = 0; i < nv; ++i) {
        f.var_perm.push_back(order[static_cast<std::size_t>(i)]);
        f.program_to_std[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = i;
    }
    int n = nv;
    std::vector<std::pair<int, double>> epigraphs;  // (std index of t, quad coeff) per var
    for (int v = 0; v < nv; ++v) {
        const double q = p.quadratic_cost(v);
        if (q > 0.0) {
            epigraphs.emplace_back(n, q);
            f.var_perm.push_back(-1);
            ++n;
        }
    }
    f.n = n;
    f.cost_offset = p.cost_offset();

    f.c = Vec::Zero(n);
    for (int v = 0; v < nv; ++v)
        f.c[f.program_to_std[static_cast<std::size_t>(v)]] = p.linear_cost(v);
    {
        std::size_t e = 0;
        for (int v = 0; v < nv; ++v)
            if (p.quadratic_cost(v) > 0.0) f.c[epigraphs[e++].first] += 1.0;
    }

    std::vector<Eigen::Triplet<double>> ta, tg;
    std::vector<double> bb, hh;

    auto std_idx = [&](VarId v) { return f.program_to_std[static_cast<std::size_t>(v)]; };

    // Equality rows.
    int p_rows = 0;
    f.ge_row.assign(p.rows().size(), false);
    for (std::size_t r = 0; r < p.rows().size(); ++r) {
        const auto& row = p.rows()[r];
        if (row.sense != RowSense::Eq) continue;
        for (const auto& t : row.expr.terms())
            ta.emplace_back(p_rows, std_idx(t.var), t.coeff);
        bb.push_back(row.rhs);
        f.eq_row_origin.push_back(static_cast<int>(r));
        ++p_rows;
    }

    // Nonnegative-orthant rows: inequalities then bounds.
    int m = 0;
    for (std::size_t r = 0; r < p.rows().size(); ++r) {
        const auto& row = p.rows()[r];
        if (row.sense == RowSense::Eq) continue;
        const double sgn = (row.sense == RowSense::Le) ? 1.0 : -1.0;
        f.ge_row[r] = row.sense == RowSense::Ge;
        for (const auto& t : row.expr.terms())
            tg.emplace_back(m, std_idx(t.var), sgn * t.coeff);
        hh.push_back(sgn * row.rhs);
        f.lin_origin.push_back({LinRowOrigin::IneqRow, static_cast<int>(r)});
        ++m;
    }
    for (int v = 0; v < nv; ++v) {
        if (std::isfinite(p.lb(v))) {
            tg.emplace_back(m, std_idx(v), -1.0);
            hh.push_back(-p.lb(v));
            f.lin_origin.push_back({LinRowOrigin::LowerBound, v});
            ++m;
        }
        if (std::isfinite(p.ub(v))) {
            tg.emplace_back(m, std_idx(v), 1.0);
            hh.push_back(p.ub(v));
            f.lin_origin.push_back({LinRowOrigin::UpperBound, v});
            ++m;
        }
    }
    f.nlin = m;

    // Program SOC blocks: s = (rhs expr, norm exprs).
    auto emit_expr = [&](const LinExpr& e, int row, double sgn) {
        for (const auto& t : e.terms()) tg.emplace_back(row, std_idx(t.var), -sgn * t.coeff);
        hh.push_back(sgn * e.constant());
    };
    for (std::size_t s = 0; s < p.socs().size(); ++s) {
        const auto& soc = p.socs()[s];
        f.soc_offsets.push_back(m);
        f.soc_origin.push_back({SocOrigin::ProgramSoc, static_cast<int>(s)});
        emit_expr(soc.rhs, m, 1.0);
        ++m;
        for (const auto& e : soc.norm) {
            emit_expr(e, m, 1.0);
            ++m;
        }
        f.soc_dims.push_back(static_cast<int>(soc.norm.size()) + 1);
    }

    // Epigraph cones a x^2 <= t as ||(2 sqrt(a) x, 1 - t)|| <= 1 + t.
    {
        std::size_t e = 0;
        for (int v = 0; v < nv; ++v) {
            const double a = p.quadratic_cost(v);
            if (a <= 0.0) continue;
            const int t_idx = epigraphs[e++].first;
            f.soc_offsets.push_back(m);
            f.soc_origin.push_back({SocOrigin::QuadEpigraph, v});
            tg.emplace_back(m, t_idx, -1.0);
            hh.push_back(1.0);
            ++m;
            tg.emplace_back(m, std_idx(v), -2.0 * std::sqrt(a));
            hh.push_back(0.0);
            ++m;
            tg.emplace_back(m, t_idx, 1.0);
            hh.push_back(1.0);
            ++m;
            f.soc_dims.push_back(3);
        }
    }

    f.A.resize(p_rows, n);
    f.A.setFromTriplets(ta.begin(), ta.end());
    f.b = Eigen::Map<Vec>(bb.data(), static_cast<Eigen::Index>(bb.size()));
    f.G.resize(m, n);
    f.G.setFromTriplets(tg.begin(), tg.end());
    f.h = Eigen::Map<Vec>(hh.data(), static_cast<Eigen::Index>(hh.size()));
    return f;
}

}  // namespace detail

double KktReport::worst() const {
    return std::max({primal_residual, dual_residual, complementarity, dual_cone_violation});
}

KktReport check_kkt(const ConicProgram& p, const SolveResult& r) {
    if (r.status != SolveStatus::Optimal)
        throw std::invalid_argument("check_kkt: result is not optimal");
    KktReport rep;
    const auto& x = r.x;
    const std::size_t nv = p.num_vars();

    auto eval = [&](const LinExpr& e) {
        double v = e.constant();
        for (const auto& t : e.terms()) v += t.coeff * x[static_cast<std::size_t>(t.var)];
        return v;
    };

    // Primal feasibility and complementarity over linear rows and bounds.
    double comp = 0.0;
    for (std::size_t i = 0; i < p.rows().size(); ++i) {
        const auto& row = p.rows()[i];
        double lhs = 0.0;
        for (const auto& t : row.expr.terms()) lhs += t.coeff * x[static_cast<std::size_t>(t.var)];
        const double scale = 1.0 + std::abs(row.rhs);
        const double dual = i < r.row_duals.size() ? r.row_duals[i] : 0.0;
        switch (row.sense) {
            case RowSense::Eq:
                rep.primal_residual =
                    std::max(rep.primal_residual, std::abs(lhs - row.rhs) / scale);
                break;
            case RowSense::Le: {
                const double slack = row.rhs - lhs;
                rep.primal_residual = std::max(rep.primal_residual, -slack / scale);
                rep.dual_cone_violation = std::max(rep.dual_cone_violation, -dual);
                comp = std::max(comp, std::abs(dual * slack) / scale);
                break;
            }
            case RowSense::Ge: {
                const double slack = lhs - row.rhs;
                rep.primal_residual = std::max(rep.primal_residual, -slack / scale);
                rep.dual_cone_violation = std::max(rep.dual_cone_violation, -dual);
                comp = std::max(comp, std::abs(dual * slack) / scale);
                break;
            }
        }
    }
    for (std::size_t v = 0; v < nv; ++v) {
        const double xv = x[v];
        if (std::isfinite(p.lb(static_cast<VarId>(v)))) {
            const double lb = p.lb(static_cast<VarId>(v));
            const double scale = 1.0 + std::abs(lb);
            rep.primal_residual = std::max(rep.primal_residual, (lb - xv) / scale);
            const double zl = v < r.lb_duals.size() ? r.lb_duals[v] : 0.0;
            rep.dual_cone_violation = std::max(rep.dual_cone_violation, -zl);
            comp = std::max(comp, std::abs(zl * (xv - lb)) / scale);
        }
        if (std::isfinite(p.ub(static_cast<VarId>(v)))) {
            const double ub = p.ub(static_cast<VarId>(v));
            const double scale = 1.0 + std::abs(ub);
            rep.primal_residual = std::max(rep.primal_residual, (xv - ub) / scale);
            const double zu = v < r.ub_duals.size() ? r.ub_duals[v] : 0.0;
            rep.dual_cone_violation = std::max(rep.dual_cone_violation, -zu);
            comp = std::max(comp, std::abs(zu * (ub - xv)) / scale);
        }
    }

    // SOC feasibility and complementarity.
    for (std::size_t s = 0; s < p.socs().size(); ++s) {
        const auto& soc = p.socs()[s];
        const double rhs = eval(soc.rhs);
        double nrm2 = 0.0;
        for (const auto& e : soc.norm) {
            const double v = eval(e);
            nrm2 += v * v;
        }
        const double nrm = std::sqrt(nrm2);
        const double scale = 1.0 + std::abs(rhs);
        rep.primal_residual = std::max(rep.primal_residual, (nrm - rhs) / scale);
        if (s < r.soc_duals.size() && !r.soc_duals[s].empty()) {
            const auto& u = r.soc_duals[s];
            double un2 = 0.0;
            for (std::size_t i = 1; i < u.size(); ++i) un2 += u[i] * u[i];
            rep.dual_cone_violation =
                std::max(rep.dual_cone_violation, std::sqrt(un2) - u[0]);
            double sz = u[0] * rhs;
            for (std::size_t i = 0; i < soc.norm.size() && i + 1 < u.size(); ++i)
                sz += u[i + 1] * eval(soc.norm[i]);
            comp = std::max(comp, std::abs(sz) / scale);
        }
    }
    rep.complementarity = comp;

    // Stationarity: c_j + 2 q_j x_j + sum duals * gradients = 0.
    std::vector<double> grad(nv, 0.0);
    double grad_scale = 1.0;
    for (std::size_t v = 0; v < nv; ++v) {
        grad[v] = p.linear_cost(static_cast<VarId>(v)) +
                  2.0 * p.quadratic_cost(static_cast<VarId>(v)) * x[v];
        grad_scale = std::max(grad_scale, std::abs(grad[v]));
    }
    for (std::size_t i = 0; i < p.rows().size(); ++i) {
        const auto& row = p.rows()[i];
        const double dual = i < r.row_duals.size() ? r.row_duals[i] : 0.0;
        const double sgn = row.sense == RowSense::Ge ? -1.0 : 1.0;
        for (const auto& t : row.expr.terms())
            grad[static_cast<std::size_t>(t.var)] += sgn * dual * t.coeff;
    }
    for (std::size_t v = 0; v < nv; ++v) {
        if (v < r.lb_duals.size()) grad[v] -= r.lb_duals[v];
        if (v < r.ub_duals.size()) grad[v] += r.ub_duals[v];
    }
    for (std::size_t s = 0; s < p.socs().size(); ++s) {
        if (s >= r.soc_duals.size() || r.soc_duals[s].empty()) continue;
        const auto& soc = p.socs()[s];
        const auto& u = r.soc_duals[s];
        for (const auto& t : soc.rhs.terms())
            grad[static_cast<std::size_t>(t.var)] -= u[0] * t.coeff;
        for (std::size_t i = 0; i < soc.norm.size() && i + 1 < u.size(); ++i)
            for (const auto& t : soc.norm[i].terms())
                grad[static_cast<std::size_t>(t.var)] -= u[i + 1] * t.coeff;
    }
    double dres = 0.0;
    for (std::size_t v = 0; v < nv; ++v) dres = std::max(dres, std::abs(grad[v]));
    rep.dual_residual = dres / grad_scale;
    return rep;
}

void dump_cbf(const ConicProgram& p, std::ostream& os) {
    const auto f = detail::lower_program(p, 0);
    os << "VER\n3\n\n";
    os << "OBJSENSE\nMIN\n\n";
    os << "VAR\n" << f.n << " 1\nF " << f.n << "\n\n";

    const int p_rows = static_cast<int>(f.b.size());
    const int m_rows = static_cast<int>(f.h.size());
    int ncones = (p_rows > 0 ? 1 : 0) + (f.nlin > 0 ? 1 : 0) + static_cast<int>(f.soc_dims.size());
    os << "CON\n" << (p_rows + m_rows) << " " << ncones << "\n";
    if (p_rows > 0) os << "L= " << p_rows << "\n";
    if (f.nlin > 0) os << "L+ " << f.nlin << "\n";
    for (int d : f.soc_dims) os << "Q " << d << "\n";
    os << "\n";

    if (f.c.size() > 0) {
        int nnz = 0;
        for (int j = 0; j < f.n; ++j)
            if (f.c[j] != 0.0) ++nnz;
        os << "OBJACOORD\n" << nnz << "\n";
        for (int j = 0; j < f.n; ++j)
            if (f.c[j] != 0.0) os << j << " " << f.c[j] << "\n";
        os << "\n";
    }
    if (f.cost_offset != 0.0) os << "OBJBCOORD\n" << f.cost_offset << "\n\n";

    // Constraint maps: rows 0..p-1 hold A x - b in {0}; rows p.. hold
    // h - G x in the product cone.
    std::vector<std::string> acoord, bcoord;
    char buf[128];
    for (int k = 0; k < f.A.outerSize(); ++k)
        for (detail::SpMat::InnerIterator it(f.A, k); it; ++it) {
            std::snprintf(buf, sizeof buf, "%lld %lld %.17g",
                          static_cast<long long>(it.row()), static_cast<long long>(it.col()),
                          it.value());
            acoord.emplace_back(buf);
        }
    for (int i = 0; i < p_rows; ++i)
        if (f.b[i] != 0.0) {
            std::snprintf(buf, sizeof buf, "%d %.17g", i, -f.b[i]);
            bcoord.emplace_back(buf);
        }
    for (int k = 0; k < f.G.outerSize(); ++k)
        for (detail::SpMat::InnerIterator it(f.G, k); it; ++it) {
            std::snprintf(buf, sizeof buf, "%lld %lld %.17g",
                          static_cast<long long>(it.row() + p_rows),
                          static_cast<long long>(it.col()), -it.value());
            acoord.emplace_back(buf);
        }
    for (int i = 0; i < m_rows; ++i)
        if (f.h[i] != 0.0) {
            std::snprintf(buf, sizeof buf, "%d %.17g", i + p_rows, f.h[i]);
            bcoord.emplace_back(buf);
        }
    os << "ACOORD\n" << acoord.size() << "\n";
    for (const auto& s : acoord) os << s << "\n";
    os << "\nBCOORD\n" << bcoord.size() << "\n";
    for (const auto& s : bcoord) os << s << "\n";
}

}  // namespace ihp
