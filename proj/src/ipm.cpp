// Homogeneous self-dual primal-dual interior-point method for
//   min c'x  s.t.  A x = b,  G x + s = h,  s in R+^nlin x SOC(d1) x ...
// with Nesterov-Todd scaling and a Mehrotra predictor-corrector step.
// The embedding carries (x, y, z, s, tau, kappa); tau -> 0 with kappa > 0
// yields clean infeasibility certificates.

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <vector>

#include "ihp/conic.hpp"
#include "std_form.hpp"

namespace ihp {
namespace {

using detail::SpMat;
using detail::StdForm;
using detail::Vec;

struct ConeLayout {
    int nlin = 0;
    std::vector<int> dims;
    std::vector<int> offs;
    int m = 0;
    int order = 0;  // nlin + number of SOC blocks
};

ConeLayout make_layout(const StdForm& f) {
    ConeLayout L;
    L.nlin = f.nlin;
    L.dims = f.soc_dims;
    L.offs = f.soc_offsets;
    L.m = static_cast<int>(f.h.size());
    L.order = f.nlin + static_cast<int>(f.soc_dims.size());
    return L;
}

Vec cone_identity(const ConeLayout& L) {
    Vec e = Vec::Zero(L.m);
    for (int i = 0; i < L.nlin; ++i) e[i] = 1.0;
    for (std::size_t k = 0; k < L.dims.size(); ++k) e[L.offs[k]] = 1.0;
    return e;
}

// min over blocks of the distance to the cone boundary (lin: v_i,
// soc: v0 - |v1|).
double interiority(const ConeLayout& L, const Vec& v) {
    double worst = std::numeric_limits<double>::infinity();
    for (int i = 0; i < L.nlin; ++i) worst = std::min(worst, v[i]);
    for (std::size_t k = 0; k < L.dims.size(); ++k) {
        const int o = L.offs[k], d = L.dims[k];
        worst = std::min(worst, v[o] - v.segment(o + 1, d - 1).norm());
    }
    return worst;
}

// Largest step alpha with v + alpha dv staying in the cone (may be inf).
double max_step(const ConeLayout& L, const Vec& v, const Vec& dv) {
    double amax = std::numeric_limits<double>::infinity();
    for (int i = 0; i < L.nlin; ++i)
        if (dv[i] < 0.0) amax = std::min(amax, -v[i] / dv[i]);
    for (std::size_t k = 0; k < L.dims.size(); ++k) {
        const int o = L.offs[k], d = L.dims[k];
        const auto v1 = v.segment(o + 1, d - 1);
        const auto d1 = dv.segment(o + 1, d - 1);
        // (v0 + a d0)^2 - |v1 + a d1|^2 >= 0 and v0 + a d0 >= 0.
        const double qa = dv[o] * dv[o] - d1.squaredNorm();
        const double qb = 2.0 * (v[o] * dv[o] - v1.dot(d1));
        const double qc = v[o] * v[o] - v1.squaredNorm();
        double root = std::numeric_limits<double>::infinity();
        if (std::abs(qa) < 1e-300) {
            if (qb < 0.0) root = -qc / qb;
        } else {
            const double disc = qb * qb - 4.0 * qa * qc;
            if (disc >= 0.0) {
                const double sq = std::sqrt(disc);
                const double r1 = (-qb - sq) / (2.0 * qa);
                const double r2 = (-qb + sq) / (2.0 * qa);
                if (r1 > 1e-300) root = std::min(root, r1);
                if (r2 > 1e-300) root = std::min(root, r2);
            }
        }
        if (dv[o] < 0.0) root = std::min(root, -v[o] / dv[o]);
        amax = std::min(amax, root);
    }
    return amax;
}

// Jordan product u o v.
void jprod(const ConeLayout& L, const Vec& u, const Vec& v, Vec& out) {
    for (int i = 0; i < L.nlin; ++i) out[i] = u[i] * v[i];
    for (std::size_t k = 0; k < L.dims.size(); ++k) {
        const int o = L.offs[k], d = L.dims[k];
        const auto u1 = u.segment(o + 1, d - 1);
        const auto v1 = v.segment(o + 1, d - 1);
        out[o] = u[o] * v[o] + u1.dot(v1);
        out.segment(o + 1, d - 1) = u[o] * v1 + v[o] * u1;
    }
}

// Jordan division lambda \ w (solve lambda o d = w).
void jdiv(const ConeLayout& L, const Vec& lam, const Vec& w, Vec& out) {
    for (int i = 0; i < L.nlin; ++i) out[i] = w[i] / lam[i];
    for (std::size_t k = 0; k < L.dims.size(); ++k) {
        const int o = L.offs[k], d = L.dims[k];
        const auto l1 = lam.segment(o + 1, d - 1);
        const auto w1 = w.segment(o + 1, d - 1);
        const double det = lam[o] * lam[o] - l1.squaredNorm();
        const double d0 = (lam[o] * w[o] - l1.dot(w1)) / det;
        out[o] = d0;
        out.segment(o + 1, d - 1) = (w1 - d0 * l1) / lam[o];
    }
}

// Nesterov-Todd scaling: W z = W^{-1} s = lambda with W in the cone's
// automorphism group.
struct Scaling {
    Vec wlin;  // sqrt(s_i / z_i) per nonnegative coordinate
    struct Soc {
        double eta;
        Vec wbar;  // normalized scaling point, wbar'J wbar = 1
    };
    std::vector<Soc> socs;
    Vec lambda;
};

bool scaling_viable(const ConeLayout& L, const Vec& s, const Vec& z) {
    for (int i = 0; i < L.nlin; ++i)
        if (!(s[i] > 0.0) || !(z[i] > 0.0)) return false;
    for (std::size_t k = 0; k < L.dims.size(); ++k) {
        const int o = L.offs[k], d = L.dims[k];
        if (!(s[o] * s[o] - s.segment(o + 1, d - 1).squaredNorm() > 0.0)) return false;
        if (!(z[o] * z[o] - z.segment(o + 1, d - 1).squaredNorm() > 0.0)) return false;
    }
    return true;
}

Scaling compute_scaling(const ConeLayout& L, const Vec& s, const Vec& z) {
    Scaling W;
    W.wlin = Vec::Zero(L.nlin);
    W.lambda = Vec::Zero(L.m);
    for (int i = 0; i < L.nlin; ++i) {
        W.wlin[i] = std::sqrt(s[i] / z[i]);
        W.lambda[i] = std::sqrt(s[i] * z[i]);
    }
    W.socs.resize(L.dims.size());
    for (std::size_t k = 0; k < L.dims.size(); ++k) {
        const int o = L.offs[k], d = L.dims[k];
        const auto s1 = s.segment(o + 1, d - 1);
        const auto z1 = z.segment(o + 1, d - 1);
        const double snorm = std::sqrt(s[o] * s[o] - s1.squaredNorm());
        const double znorm = std::sqrt(z[o] * z[o] - z1.squaredNorm());
        const double gamma =
            std::sqrt((1.0 + (s[o] * z[o] + s1.dot(z1)) / (snorm * znorm)) / 2.0);
        auto& sc = W.socs[k];
        sc.eta = std::sqrt(snorm / znorm);
        sc.wbar = Vec::Zero(d);
        sc.wbar[0] = (s[o] / snorm + z[o] / znorm) / (2.0 * gamma);
        sc.wbar.segment(1, d - 1) = (s1 / snorm - z1 / znorm) / (2.0 * gamma);
        // lambda = W z, computed through the scaling-point formula.
        const auto& wb = sc.wbar;
        const double wz = wb[0] * z[o] + wb.segment(1, d - 1).dot(z1);
        W.lambda[o] = sc.eta * wz;
        W.lambda.segment(o + 1, d - 1) =
            sc.eta * (z1 + (wb.segment(1, d - 1).dot(z1) / (1.0 + wb[0])) * wb.segment(1, d - 1) +
                      z[o] * wb.segment(1, d - 1));
    }
    return W;
}

// v := W u (apply the scaling).
void apply_w(const ConeLayout& L, const Scaling& W, const Vec& u, Vec& out) {
    for (int i = 0; i < L.nlin; ++i) out[i] = W.wlin[i] * u[i];
    for (std::size_t k = 0; k < L.dims.size(); ++k) {
        const int o = L.offs[k], d = L.dims[k];
        const auto& wb = W.socs[k].wbar;
        const auto u1 = u.segment(o + 1, d - 1);
        const auto w1 = wb.segment(1, d - 1);
        const double dot = w1.dot(u1);
        out[o] = W.socs[k].eta * (wb[0] * u[o] + dot);
        out.segment(o + 1, d - 1) =
            W.socs[k].eta * (u1 + (dot / (1.0 + wb[0])) * w1 + u[o] * w1);
    }
}

// v := W^{-1} u.
void apply_winv(const ConeLayout& L, const Scaling& W, const Vec& u, Vec& out) {
    for (int i = 0; i < L.nlin; ++i) out[i] = u[i] / W.wlin[i];
    for (std::size_t k = 0; k < L.dims.size(); ++k) {
        const int o = L.offs[k], d = L.dims[k];
        const auto& wb = W.socs[k].wbar;
        const auto u1 = u.segment(o + 1, d - 1);
        const auto w1 = wb.segment(1, d - 1);
        const double dot = w1.dot(u1);
        out[o] = (wb[0] * u[o] - dot) / W.socs[k].eta;
        out.segment(o + 1, d - 1) =
            (u1 + (dot / (1.0 + wb[0])) * w1 - u[o] * w1) / W.socs[k].eta;
    }
}

struct Equilibration {
    Vec dcol;   // variable scaling, x = dcol .* x_scaled
    Vec drowA;  // equality-row scaling
    Vec drowG;  // cone-row scaling (uniform within each SOC block)
    double cost_scale = 1.0;
};

Equilibration equilibrate(StdForm& f) {
    const int n = f.n;
    const int p = static_cast<int>(f.b.size());
    const int m = static_cast<int>(f.h.size());
    Equilibration eq;
    eq.dcol = Vec::Ones(n);
    eq.drowA = Vec::Ones(p);
    eq.drowG = Vec::Ones(m);

    for (int round = 0; round < 6; ++round) {
        Vec colmax = Vec::Zero(n), rowA = Vec::Zero(p), rowG = Vec::Zero(m);
        for (int k = 0; k < f.A.outerSize(); ++k)
            for (SpMat::InnerIterator it(f.A, k); it; ++it) {
                const double a = std::abs(it.value());
                colmax[it.col()] = std::max(colmax[it.col()], a);
                rowA[it.row()] = std::max(rowA[it.row()], a);
            }
        for (int k = 0; k < f.G.outerSize(); ++k)
            for (SpMat::InnerIterator it(f.G, k); it; ++it) {
                const double a = std::abs(it.value());
                colmax[it.col()] = std::max(colmax[it.col()], a);
                rowG[it.row()] = std::max(rowG[it.row()], a);
            }
        // One factor per SOC block keeps the cone intact.
        for (std::size_t kk = 0; kk < f.soc_dims.size(); ++kk) {
            const int o = f.soc_offsets[kk], d = f.soc_dims[kk];
            double blockmax = 0.0;
            for (int i = 0; i < d; ++i) blockmax = std::max(blockmax, rowG[o + i]);
            for (int i = 0; i < d; ++i) rowG[o + i] = blockmax;
        }
        auto factor = [](double v) { return v > 0.0 ? 1.0 / std::sqrt(v) : 1.0; };
        Vec fc = colmax.unaryExpr(factor), fa = rowA.unaryExpr(factor),
            fg = rowG.unaryExpr(factor);
        eq.dcol.array() *= fc.array();
        eq.drowA.array() *= fa.array();
        eq.drowG.array() *= fg.array();
        for (int k = 0; k < f.A.outerSize(); ++k)
            for (SpMat::InnerIterator it(f.A, k); it; ++it)
                it.valueRef() *= fa[it.row()] * fc[it.col()];
        for (int k = 0; k < f.G.outerSize(); ++k)
            for (SpMat::InnerIterator it(f.G, k); it; ++it)
                it.valueRef() *= fg[it.row()] * fc[it.col()];
    }
    f.b.array() *= eq.drowA.array();
    f.h.array() *= eq.drowG.array();
    f.c.array() *= eq.dcol.array();
    const double cmax = f.c.size() > 0 ? f.c.cwiseAbs().maxCoeff() : 0.0;
    eq.cost_scale = 1.0 / std::max(1.0, cmax);
    f.c *= eq.cost_scale;
    return eq;
}

class KktSystem {
  public:
    KktSystem(const StdForm& f, const ConeLayout& L)
        : f_(f), L_(L), n_(f.n), p_(static_cast<int>(f.b.size())),
          m_(static_cast<int>(f.h.size())), N_(n_ + p_ + m_) {
        // Assemble the fixed sparsity pattern once with unit scaling.
        pattern_.clear();
        for (int i = 0; i < n_; ++i) pattern_.emplace_back(i, i, 1.0);
        for (int k = 0; k < f_.A.outerSize(); ++k)
            for (SpMat::InnerIterator it(f_.A, k); it; ++it) {
                pattern_.emplace_back(n_ + it.row(), it.col(), it.value());
                pattern_.emplace_back(it.col(), n_ + it.row(), it.value());
            }
        for (int i = 0; i < p_; ++i) pattern_.emplace_back(n_ + i, n_ + i, -1.0);
        for (int k = 0; k < f_.G.outerSize(); ++k)
            for (SpMat::InnerIterator it(f_.G, k); it; ++it) {
                pattern_.emplace_back(n_ + p_ + it.row(), it.col(), it.value());
                pattern_.emplace_back(it.col(), n_ + p_ + it.row(), it.value());
            }
        for (int i = 0; i < L_.nlin; ++i) {
            const int r = n_ + p_ + i;
            pattern_.emplace_back(r, r, -1.0);
        }
        for (std::size_t kk = 0; kk < L_.dims.size(); ++kk) {
            const int o = n_ + p_ + L_.offs[kk], d = L_.dims[kk];
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) pattern_.emplace_back(o + i, o + j, i == j ? -1.0 : 0.0);
        }
        K_.resize(N_, N_);
        K_.setFromTriplets(pattern_.begin(), pattern_.end());
        K_.makeCompressed();
        ldlt_.analyzePattern(K_);
    }

    // Refactor with the current scaling; returns false if the
    // factorization fails at every regularization level.
    bool factor(const Scaling& W) {
        scaling_ = &W;
        for (double reg : {1e-9, 1e-7, 1e-5}) {
            std::vector<Eigen::Triplet<double>> t;
            t.reserve(pattern_.size());
            for (int i = 0; i < n_; ++i) t.emplace_back(i, i, reg);
            for (int k = 0; k < f_.A.outerSize(); ++k)
                for (SpMat::InnerIterator it(f_.A, k); it; ++it) {
                    t.emplace_back(n_ + it.row(), it.col(), it.value());
                    t.emplace_back(it.col(), n_ + it.row(), it.value());
                }
            for (int i = 0; i < p_; ++i) t.emplace_back(n_ + i, n_ + i, -reg);
            for (int k = 0; k < f_.G.outerSize(); ++k)
                for (SpMat::InnerIterator it(f_.G, k); it; ++it) {
                    t.emplace_back(n_ + p_ + it.row(), it.col(), it.value());
                    t.emplace_back(it.col(), n_ + p_ + it.row(), it.value());
                }
            for (int i = 0; i < L_.nlin; ++i) {
                const int r = n_ + p_ + i;
                const double w2 = W.wlin[i] * W.wlin[i];
                t.emplace_back(r, r, -w2 - reg);
            }
            for (std::size_t kk = 0; kk < L_.dims.size(); ++kk) {
                const int o = L_.offs[kk], d = L_.dims[kk];
                const auto& sc = W.socs[kk];
                // W'W = eta^2 (2 wbar wbar' - J)
                for (int i = 0; i < d; ++i)
                    for (int j = 0; j < d; ++j) {
                        double v = 2.0 * sc.wbar[i] * sc.wbar[j];
                        if (i == j) v -= (i == 0 ? 1.0 : -1.0);
                        v *= sc.eta * sc.eta;
                        double entry = -v;
                        if (i == j) entry -= reg;
                        t.emplace_back(n_ + p_ + o + i, n_ + p_ + o + j, entry);
                    }
            }
            K_.setFromTriplets(t.begin(), t.end());
            ldlt_.factorize(K_);
            if (ldlt_.info() == Eigen::Success) {
                reg_ = reg;
                return true;
            }
        }
        return false;
    }

    // Solve [0 A' G'; A 0 0; G 0 -W'W] u = rhs with iterative refinement
    // against the unregularized operator.
    void solve3(const Vec& bx, const Vec& by, const Vec& bz, Vec& ux, Vec& uy, Vec& uz) const {
        Vec rhs(N_);
        rhs.segment(0, n_) = bx;
        rhs.segment(n_, p_) = by;
        rhs.segment(n_ + p_, m_) = bz;
        Vec u = ldlt_.solve(rhs);
        for (int it = 0; it < 2; ++it) {
            Vec r = rhs - apply_k0(u);
            if (r.lpNorm<Eigen::Infinity>() < 1e-14 * (1.0 + rhs.lpNorm<Eigen::Infinity>()))
                break;
            u += ldlt_.solve(r);
        }
        ux = u.segment(0, n_);
        uy = u.segment(n_, p_);
        uz = u.segment(n_ + p_, m_);
    }

  private:
    Vec apply_k0(const Vec& u) const {
        // K0 = K with the static regularization removed.
        Vec v = K_ * u;
        v.segment(0, n_) -= reg_ * u.segment(0, n_);
        v.segment(n_, p_) += reg_ * u.segment(n_, p_);
        v.segment(n_ + p_, m_) += reg_ * u.segment(n_ + p_, m_);
        return v;
    }

    const StdForm& f_;
    const ConeLayout& L_;
    int n_, p_, m_, N_;
    std::vector<Eigen::Triplet<double>> pattern_;
    SpMat K_;
    Eigen::SimplicialLDLT<SpMat, Eigen::Lower> ldlt_;
    const Scaling* scaling_ = nullptr;
    double reg_ = 1e-9;
};

struct IpmState {
    Vec x, y, z, s;
    double tau = 1.0, kappa = 1.0;
};

struct Metrics {
    double pres, dres, relgap, pcost, dcost, mu;
};

}  // namespace

SolveResult solve(const ConicProgram& program, const SolveOptions& options) {
    SolveResult out;
    StdForm f = detail::lower_program(program, options.permute_seed);
    const ConeLayout L = make_layout(f);
    const int n = f.n, p = static_cast<int>(f.b.size()), m = static_cast<int>(f.h.size());
    const Equilibration eq = equilibrate(f);

    const double bnorm = p > 0 ? f.b.lpNorm<Eigen::Infinity>() : 0.0;
    const double hnorm = m > 0 ? f.h.lpNorm<Eigen::Infinity>() : 0.0;
    const double cnorm = n > 0 ? f.c.lpNorm<Eigen::Infinity>() : 0.0;

    KktSystem kkt(f, L);
    IpmState st;
    st.x = Vec::Zero(n);
    st.y = Vec::Zero(p);
    st.z = Vec::Zero(m);
    st.s = Vec::Zero(m);
    const Vec e = cone_identity(L);

    // Initial point from two least-squares-flavoured KKT solves with
    // identity scaling, pushed into the cone interior.
    {
        Scaling W0;
        W0.wlin = Vec::Ones(L.nlin);
        W0.socs.resize(L.dims.size());
        for (std::size_t k = 0; k < L.dims.size(); ++k) {
            W0.socs[k].eta = 1.0;
            W0.socs[k].wbar = Vec::Zero(L.dims[k]);
            W0.socs[k].wbar[0] = 1.0;
        }
        W0.lambda = e;
        if (!kkt.factor(W0)) {
            out.status = SolveStatus::NumericalFailure;
            out.message = "initial KKT factorization failed";
            return out;
        }
        Vec ux, uy, uz;
        kkt.solve3(Vec::Zero(n), f.b, f.h, ux, uy, uz);
        st.x = ux;
        st.s = -uz;
        const double sviol = interiority(L, st.s);
        if (sviol <= 0.0) st.s += (1.0 - sviol) * e;
        kkt.solve3(-f.c, Vec::Zero(p), Vec::Zero(m), ux, uy, uz);
        st.y = uy;
        st.z = uz;
        const double zviol = interiority(L, st.z);
        if (zviol <= 0.0) st.z += (1.0 - zviol) * e;
    }

    const double nu = static_cast<double>(L.order) + 1.0;
    Metrics best{1e300, 1e300, 1e300, 0, 0, 1e300};
    IpmState best_state = st;
    int iter = 0;
    int stall_count = 0;
    double floor_pres = 1e300, floor_dres = 1e300, floor_gap = 1e300, floor_mu = 1e300;
    std::string stop_reason;

    Vec rx(n), ry(p), rz(m);
    Vec lam_sq(m), ds_cone(m), tmp(m), wdz(m), winv_ds(m);
    Vec x1(n), y1(p), z1(m), x2(n), y2(p), z2(m);

    auto metrics_of = [&](const IpmState& S) {
        Metrics M;
        const double t = S.tau;
        M.pcost = f.c.dot(S.x) / t;
        M.dcost = -(f.b.dot(S.y) + f.h.dot(S.z)) / t;
        const double pr_eq = p > 0 ? (f.A * S.x - f.b * t).lpNorm<Eigen::Infinity>() / (t * (1.0 + bnorm)) : 0.0;
        const double pr_in = m > 0 ? (f.G * S.x + S.s - f.h * t).lpNorm<Eigen::Infinity>() / (t * (1.0 + hnorm)) : 0.0;
        M.pres = std::max(pr_eq, pr_in);
        Vec rdual = f.c * t;
        if (p > 0) rdual += f.A.transpose() * S.y;
        if (m > 0) rdual += f.G.transpose() * S.z;
        M.dres = rdual.lpNorm<Eigen::Infinity>() / (t * (1.0 + cnorm));
        const double gap_abs = std::abs(M.pcost - M.dcost);
        M.relgap = gap_abs / std::max(1.0, std::max(std::abs(M.pcost), std::abs(M.dcost)));
        M.mu = (S.s.dot(S.z) + S.tau * S.kappa) / nu;
        return M;
    };

    for (iter = 0; iter < options.max_iter; ++iter) {
        // Residuals of the embedding.
        rx = -f.c * st.tau;
        if (p > 0) rx -= f.A.transpose() * st.y;
        if (m > 0) rx -= f.G.transpose() * st.z;
        if (p > 0) ry = f.A * st.x - f.b * st.tau;
        if (m > 0) rz = f.G * st.x + st.s - f.h * st.tau;
        const double rtau = st.kappa + f.c.dot(st.x) + f.b.dot(st.y) + f.h.dot(st.z);
        const double mu = (st.s.dot(st.z) + st.tau * st.kappa) / nu;

        const Metrics M = metrics_of(st);
        if (options.verbose)
            std::fprintf(stderr, "it %2d  pres %.2e dres %.2e gap %.2e  tau %.2e kap %.2e mu %.2e\n",
                         iter, M.pres, M.dres, M.relgap, st.tau, st.kappa, mu);
        const bool finite = std::isfinite(M.pres) && std::isfinite(M.dres) &&
                            std::isfinite(M.relgap) && std::isfinite(M.mu);
        if (!finite) {
            stop_reason = "numerical breakdown";
            break;
        }
        // Progress on any one metric keeps the run alive; a frozen or
        // oscillating iterate gets cut off.
        if (M.pres < 0.99 * floor_pres || M.dres < 0.99 * floor_dres ||
            M.relgap < 0.99 * floor_gap || M.mu < 0.99 * floor_mu) {
            stall_count = 0;
        } else if (++stall_count >= 20) {
            stop_reason = "stalled";
            break;
        }
        floor_pres = std::min(floor_pres, M.pres);
        floor_dres = std::min(floor_dres, M.dres);
        floor_gap = std::min(floor_gap, M.relgap);
        floor_mu = std::min(floor_mu, M.mu);
        if (std::max({M.pres, M.dres, M.relgap, M.mu}) <
            std::max({best.pres, best.dres, best.relgap, best.mu})) {
            best = M;
            best_state = st;
        }
        if (M.pres <= options.feas_tol && M.dres <= options.feas_tol &&
            M.relgap <= options.gap_tol && M.mu <= options.mu_tol) {
            stop_reason = "converged";
            break;
        }
        // Certificates.
        const double byhz = f.b.dot(st.y) + f.h.dot(st.z);
        if (byhz < -1e-12) {
            Vec atgz = Vec::Zero(n);
            if (p > 0) atgz += f.A.transpose() * st.y;
            if (m > 0) atgz += f.G.transpose() * st.z;
            if (atgz.lpNorm<Eigen::Infinity>() / (-byhz) <= options.feas_tol * (1.0 + cnorm)) {
                out.status = SolveStatus::Infeasible;
                out.message = "primal infeasibility certificate";
                out.iterations = iter;
                return out;
            }
        }
        const double cx = f.c.dot(st.x);
        if (cx < -1e-12) {
            const double ra = p > 0 ? (f.A * st.x).lpNorm<Eigen::Infinity>() / (-cx) : 0.0;
            const double rg = m > 0 ? (f.G * st.x + st.s).lpNorm<Eigen::Infinity>() / (-cx) : 0.0;
            if (ra <= options.feas_tol * (1.0 + bnorm) && rg <= options.feas_tol * (1.0 + hnorm)) {
                out.status = SolveStatus::Unbounded;
                out.message = "dual infeasibility certificate (objective unbounded below)";
                out.iterations = iter;
                return out;
            }
        }
        if (mu < 1e-16) {
            stop_reason = "mu vanished";
            break;
        }

        if (!scaling_viable(L, st.s, st.z)) {
            stop_reason = "iterate reached the cone boundary";
            break;
        }
        const Scaling W = compute_scaling(L, st.s, st.z);
        if (!kkt.factor(W)) {
            stop_reason = "KKT factorization failed";
            break;
        }
        kkt.solve3(-f.c, f.b, f.h, x1, y1, z1);
        const double cx1 = f.c.dot(x1) + f.b.dot(y1) + f.h.dot(z1);

        auto direction = [&](double sigma, const Vec& dcone, double dkt, IpmState& D) {
            // dcone is the target for lambda o (W dz + W^{-T} ds);
            // dkt the target for tau dkappa + kappa dtau.
            jdiv(L, W.lambda, dcone, tmp);
            apply_w(L, W, tmp, winv_ds);  // W (lambda \ dcone)
            const double c1 = 1.0 - sigma;
            Vec bz2 = -c1 * rz - winv_ds;
            kkt.solve3(c1 * rx, -c1 * ry, bz2, x2, y2, z2);
            const double num =
                -c1 * rtau - dkt / st.tau - (f.c.dot(x2) + f.b.dot(y2) + f.h.dot(z2));
            const double den = -st.kappa / st.tau + cx1;
            const double dtau = num / den;
            D.x = x2 + dtau * x1;
            D.y = y2 + dtau * y1;
            D.z = z2 + dtau * z1;
            D.s = -c1 * rz + dtau * f.h;
            if (m > 0) D.s -= f.G * D.x;
            D.tau = dtau;
            D.kappa = (dkt - st.kappa * dtau) / st.tau;
        };

        // Affine (predictor) direction.
        jprod(L, W.lambda, W.lambda, lam_sq);
        IpmState aff;
        direction(0.0, -lam_sq, -st.tau * st.kappa, aff);

        double amax = max_step(L, st.s, aff.s);
        amax = std::min(amax, max_step(L, st.z, aff.z));
        if (aff.tau < 0.0) amax = std::min(amax, -st.tau / aff.tau);
        if (aff.kappa < 0.0) amax = std::min(amax, -st.kappa / aff.kappa);
        const double a_aff = std::min(1.0, amax);
        const double mu_aff = ((st.s + a_aff * aff.s).dot(st.z + a_aff * aff.z) +
                               (st.tau + a_aff * aff.tau) * (st.kappa + a_aff * aff.kappa)) /
                              nu;
        double sigma = std::pow(std::clamp(mu_aff / mu, 0.0, 1.0), 3.0);

        // Combined (corrector) direction.
        apply_winv(L, W, aff.s, winv_ds);
        apply_w(L, W, aff.z, wdz);
        jprod(L, winv_ds, wdz, tmp);
        ds_cone = -lam_sq - tmp + sigma * mu * e;
        const double dkt = -st.tau * st.kappa - aff.tau * aff.kappa + sigma * mu;
        IpmState dir;
        direction(sigma, ds_cone, dkt, dir);

        double amax2 = max_step(L, st.s, dir.s);
        amax2 = std::min(amax2, max_step(L, st.z, dir.z));
        if (dir.tau < 0.0) amax2 = std::min(amax2, -st.tau / dir.tau);
        if (dir.kappa < 0.0) amax2 = std::min(amax2, -st.kappa / dir.kappa);
        const double alpha = std::min(1.0, 0.99 * amax2);
        if (!(alpha > 1e-10)) {
            stop_reason = "step collapsed";
            break;
        }
        st.x += alpha * dir.x;
        st.y += alpha * dir.y;
        st.z += alpha * dir.z;
        st.s += alpha * dir.s;
        st.tau += alpha * dir.tau;
        st.kappa += alpha * dir.kappa;
    }

    // Classify the terminal iterate.
    const Metrics Mb = best;
    const IpmState& S = best_state;
    const bool tight = Mb.pres <= options.feas_tol && Mb.dres <= options.feas_tol &&
                       Mb.relgap <= options.gap_tol;
    const bool loose = Mb.pres <= 1e-6 && Mb.dres <= 1e-6 && Mb.relgap <= 1e-6;
    if (!tight && !loose) {
        // One more certificate look before giving up.
        out.status = SolveStatus::NumericalFailure;
        out.message = "no convergence: " + (stop_reason.empty() ? "iteration limit" : stop_reason);
        out.iterations = iter;
        out.primal_residual = Mb.pres;
        out.dual_residual = Mb.dres;
        out.rel_gap = Mb.relgap;
        return out;
    }

    out.status = SolveStatus::Optimal;
    out.message = tight ? "converged" : "converged at reduced accuracy";
    out.iterations = iter;
    out.primal_residual = Mb.pres;
    out.dual_residual = Mb.dres;
    out.rel_gap = Mb.relgap;

    // Unscale: x = dcol .* x/tau; y = drowA .* y / (tau cost_scale); same for z.
    const double t = S.tau;
    Vec X = (S.x / t).cwiseProduct(eq.dcol);
    Vec Y = p > 0 ? Vec((S.y / (t * eq.cost_scale)).cwiseProduct(eq.drowA)) : Vec();
    Vec Z = m > 0 ? Vec((S.z / (t * eq.cost_scale)).cwiseProduct(eq.drowG)) : Vec();

    const std::size_t nv = program.num_vars();
    out.x.assign(nv, 0.0);
    for (std::size_t v = 0; v < nv; ++v)
        out.x[v] = X[f.program_to_std[v]];
    out.objective = program.objective_value(out.x);

    out.row_duals.assign(program.num_rows(), 0.0);
    out.lb_duals.assign(nv, 0.0);
    out.ub_duals.assign(nv, 0.0);
    out.soc_duals.assign(program.num_socs(), {});
    for (int r = 0; r < p; ++r) out.row_duals[static_cast<std::size_t>(f.eq_row_origin[r])] = Y[r];
    for (int i = 0; i < L.nlin; ++i) {
        const auto& orig = f.lin_origin[static_cast<std::size_t>(i)];
        const double zi = std::max(0.0, Z[i]);
        switch (orig.kind) {
            case detail::LinRowOrigin::IneqRow:
                out.row_duals[static_cast<std::size_t>(orig.index)] = zi;
                break;
            case detail::LinRowOrigin::LowerBound:
                out.lb_duals[static_cast<std::size_t>(orig.index)] = zi;
                break;
            case detail::LinRowOrigin::UpperBound:
                out.ub_duals[static_cast<std::size_t>(orig.index)] = zi;
                break;
        }
    }
    for (std::size_t k = 0; k < L.dims.size(); ++k) {
        const auto& orig = f.soc_origin[k];
        if (orig.kind != detail::SocOrigin::ProgramSoc) continue;
        std::vector<double> u(static_cast<std::size_t>(L.dims[k]));
        for (int i = 0; i < L.dims[k]; ++i) u[static_cast<std::size_t>(i)] = Z[L.offs[k] + i];
        out.soc_duals[static_cast<std::size_t>(orig.index)] = std::move(u);
    }
    return out;
}

}  // namespace ihp
