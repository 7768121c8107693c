#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace ihp {

/// Standard normal CDF.
///
/// Computed as erfc(-x/sqrt(2))/2; glibc's erfc is accurate to a few ulp,
/// so the absolute error of the CDF is far below 1e-15 over the whole axis.
double standard_normal_cdf(double x);

/// Standard normal density.
double standard_normal_pdf(double x);

struct GaussComponent {
    double weight;
    double mean;
    double stddev;
};

/// Finite Gaussian mixture over the real line.
///
/// Weights must sum to one (1e-12 tolerance) and be strictly positive;
/// standard deviations must be strictly positive.
class Gmm {
  public:
    Gmm() = default;
    explicit Gmm(std::vector<GaussComponent> components);

    static Gmm single(double mean, double stddev);

    const std::vector<GaussComponent>& components() const { return comps_; }
    bool empty() const { return comps_.empty(); }

    double pdf(double x) const;
    double cdf(double x) const;
    double mean() const;
    double variance() const;

    /// p-quantile by bisection on [min(mu-12sigma), max(mu+12sigma)],
    /// terminating when |cdf(q) - p| <= 1e-10.
    double quantile(double p) const;

    /// Distribution of c * X.
    Gmm scaled(double c) const;

    /// Distribution of X + Y for independent mixtures (component-wise
    /// cross product: weights multiply, means add, variances add).
    Gmm convolved_with(const Gmm& other) const;

    double lower_bracket() const;
    double upper_bracket() const;

  private:
    std::vector<GaussComponent> comps_;
};

/// Distribution of min(X, cap) for a mixture X: the CDF follows the base
/// below the cap and jumps to one at the cap (point mass 1 - CDF(cap)).
struct CensoredGmm {
    Gmm base;
    double cap = 0.0;

    double cdf(double x) const;
};

/// Weighted sum of independent mixture-distributed terms, some of which
/// may be censored at a cap.
class LinearCombo {
  public:
    struct Term {
        double coeff;
        Gmm dist;
        bool censored = false;
        double cap = 0.0;
    };

    void add(double coeff, Gmm dist);
    void add_censored(double coeff, Gmm dist, double cap);

    const std::vector<Term>& terms() const { return terms_; }
    bool has_censored() const;
    std::size_t size() const { return terms_.size(); }

    /// Collapses the combo to a single mixture. Throws if any term is
    /// censored (censored sums are not closed under convolution; callers
    /// must reduce them first, see censored_quantile_bound).
    Gmm as_gmm() const;

    /// Exact p-quantile of an all-uncensored combo.
    double quantile(double p) const;

  private:
    std::vector<Term> terms_;
};

/// Expected overflow penalty K * E[(X - rbar)^+ restricted to X <= cap_max],
/// i.e. K * integral_{rbar}^{cap_max} (x - rbar) pdf(x) dx, in closed form
/// via Gaussian partial expectations.
double curtailment_penalty(const Gmm& dist, double k_penalty, double cap_max, double rbar);

struct PenaltyDerivatives {
    double first;   ///< K * (CDF(rbar) - CDF(cap_max)), always <= 0
    double second;  ///< K * PDF(rbar), always >= 0
};

PenaltyDerivatives penalty_derivatives(const Gmm& dist, double k_penalty, double cap_max,
                                       double rbar);

/// Deterministic upper bound on the p-quantile of a combo with censored
/// terms: terms in `cap_set` (indices into the combo, coefficient >= 0
/// required) contribute coeff * cap outright; every other censored term is
/// replaced by its uncensored base distribution and the residual quantile
/// is evaluated exactly. The bound dominates the true quantile.
struct CensoredQuantileBound {
    double deterministic;      ///< sum of coeff * cap over the chosen set
    double residual_quantile;  ///< quantile of the remaining uncensored combo
    double value() const { return deterministic + residual_quantile; }
};

CensoredQuantileBound censored_quantile_bound(const LinearCombo& combo,
                                              const std::vector<std::size_t>& cap_set, double p);

}  // namespace ihp
