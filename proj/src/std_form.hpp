#pragma once

// Internal lowering of a ConicProgram to the standard conic form
//   min c'x  s.t.  A x = b,  G x + s = h,  s in R+^nlin x SOC(d1) x ...
// shared by the interior-point backend and the CBF writer.

#include <Eigen/Sparse>
#include <cstdint>
#include <vector>

#include "ihp/conic.hpp"

namespace ihp::detail {

using SpMat = Eigen::SparseMatrix<double>;
using Vec = Eigen::VectorXd;

struct LinRowOrigin {
    enum Kind { LowerBound, UpperBound, IneqRow } kind;
    int index;  // variable id for bounds, program row index for ineqs
};

struct SocOrigin {
    enum Kind { ProgramSoc, QuadEpigraph } kind;
    int index;  // program soc index, or variable id for epigraphs
};

struct StdForm {
    int n = 0;  // variables (program vars then epigraph vars)
    SpMat A;    // p x n equality rows
    Vec b;
    SpMat G;    // m x n cone rows: nlin nonnegative rows then SOC blocks
    Vec h;
    Vec c;
    double cost_offset = 0.0;

    int nlin = 0;
    std::vector<int> soc_dims;
    std::vector<int> soc_offsets;  // offsets of each SOC block within G rows

    std::vector<int> var_perm;            // std index -> program VarId (or -1 for epigraph)
    std::vector<int> program_to_std;      // program VarId -> std index
    std::vector<int> eq_row_origin;       // std eq row -> program row index
    std::vector<LinRowOrigin> lin_origin; // per nonnegative row
    std::vector<SocOrigin> soc_origin;    // per SOC block
    std::vector<bool> ge_row;             // per program row: true if sense was Ge (negated)
};

StdForm lower_program(const ConicProgram& program, std::uint64_t permute_seed);

}  // namespace ihp::detail
