#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <unordered_map>
#include <vector>

namespace ihp {

using VarId = int;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Sparse affine expression over named program variables.
class LinExpr {
  public:
    struct Term {
        VarId var;
        double coeff;
    };

    LinExpr() = default;
    explicit LinExpr(double constant) : constant_(constant) {}

    LinExpr& add(VarId v, double coeff) {
        if (coeff != 0.0) terms_.push_back({v, coeff});
        return *this;
    }
    LinExpr& add_constant(double c) {
        constant_ += c;
        return *this;
    }

    const std::vector<Term>& terms() const { return terms_; }
    double constant() const { return constant_; }

  private:
    std::vector<Term> terms_;
    double constant_ = 0.0;
};

enum class SolveStatus { Optimal, Infeasible, Unbounded, NumericalFailure };

const char* to_string(SolveStatus s);

enum class RowSense { Eq, Le, Ge };

struct SolveOptions {
    double feas_tol = 1e-9;
    double gap_tol = 1e-10;
    /// Complementarity target on equilibrated data. Flat quadratic
    /// directions resolve their argmin to roughly sqrt(mu), so the default
    /// keeps epigraph-lowered quadratics accurate to ~1e-7.
    double mu_tol = 2e-14;
    int max_iter = 200;
    /// Nonzero: lower the program with a seeded permutation of variable
    /// order. The optimum must not depend on it.
    std::uint64_t permute_seed = 0;
    bool verbose = false;
};

struct SolveResult {
    SolveStatus status = SolveStatus::NumericalFailure;
    double objective = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> x;  ///< by VarId

    std::vector<double> row_duals;              ///< per linear row (Eq: free sign; Le/Ge: >= 0)
    std::vector<double> lb_duals, ub_duals;     ///< per variable, >= 0
    std::vector<std::vector<double>> soc_duals; ///< per cone, (u0, u1...) with u0 >= |u1|

    int iterations = 0;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    double rel_gap = 0.0;
    std::string message;
};

/// Solver-agnostic LP/QP/SOCP instance. Quadratic costs are diagonal
/// (sum of a_j x_j^2 with a_j >= 0) and are lowered by the backend to
/// second-order-cone epigraphs.
class ConicProgram {
  public:
    VarId add_var(std::string name, double lb = -kInf, double ub = kInf);
    void set_bounds(VarId v, double lb, double ub);

    void add_linear_cost(VarId v, double coeff);
    void add_quadratic_cost(VarId v, double coeff);  // coeff * x^2, coeff >= 0
    void add_cost_offset(double c) { cost_offset_ += c; }

    int add_row(RowSense sense, const LinExpr& e, double rhs);
    int add_eq(const LinExpr& e, double rhs) { return add_row(RowSense::Eq, e, rhs); }
    int add_le(const LinExpr& e, double rhs) { return add_row(RowSense::Le, e, rhs); }
    int add_ge(const LinExpr& e, double rhs) { return add_row(RowSense::Ge, e, rhs); }

    /// ||(norm_0, norm_1, ...)|| <= rhs
    int add_soc(std::vector<LinExpr> norm, LinExpr rhs);

    std::size_t num_vars() const { return names_.size(); }
    std::size_t num_rows() const { return rows_.size(); }
    std::size_t num_socs() const { return socs_.size(); }

    const std::string& var_name(VarId v) const { return names_[static_cast<std::size_t>(v)]; }
    VarId find_var(const std::string& name) const;  // -1 if absent
    double lb(VarId v) const { return lb_[static_cast<std::size_t>(v)]; }
    double ub(VarId v) const { return ub_[static_cast<std::size_t>(v)]; }
    double linear_cost(VarId v) const { return lin_cost_[static_cast<std::size_t>(v)]; }
    double quadratic_cost(VarId v) const { return quad_cost_[static_cast<std::size_t>(v)]; }
    double cost_offset() const { return cost_offset_; }

    struct Row {
        RowSense sense;
        LinExpr expr;
        double rhs;
    };
    struct Soc {
        std::vector<LinExpr> norm;
        LinExpr rhs;
    };
    const std::vector<Row>& rows() const { return rows_; }
    const std::vector<Soc>& socs() const { return socs_; }

    /// Objective value of a candidate point (linear + quadratic + offset).
    double objective_value(const std::vector<double>& x) const;

    double value_of(const SolveResult& r, const std::string& name) const;

  private:
    std::vector<std::string> names_;
    std::unordered_map<std::string, VarId> index_;
    std::vector<double> lb_, ub_;
    std::vector<double> lin_cost_, quad_cost_;
    double cost_offset_ = 0.0;
    std::vector<Row> rows_;
    std::vector<Soc> socs_;
};

SolveResult solve(const ConicProgram& program, const SolveOptions& options = {});

/// KKT residuals recomputed from the program data alone (no backend
/// involvement): primal feasibility, stationarity (using the diagonal
/// quadratic gradient directly), dual cone feasibility, complementarity.
struct KktReport {
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    double complementarity = 0.0;
    double dual_cone_violation = 0.0;

    double worst() const;
    bool ok(double tol = 1e-6) const { return worst() <= tol; }
};

KktReport check_kkt(const ConicProgram& program, const SolveResult& result);

/// Writes the instance in conic-benchmark text form (CBF) for external
/// cross-checks.
void dump_cbf(const ConicProgram& program, std::ostream& os);

}  // namespace ihp
