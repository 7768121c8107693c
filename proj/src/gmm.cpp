#include "ihp/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace ihp {

namespace {
constexpr double kWeightTol = 1e-12;
constexpr double kCdfTol = 1e-10;
constexpr double kBracketSigmas = 12.0;
}  // namespace

double standard_normal_cdf(double x) {
    return 0.5 * std::erfc(-x * std::numbers::sqrt2 / 2.0);
}

double standard_normal_pdf(double x) {
    static const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
    return inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

Gmm::Gmm(std::vector<GaussComponent> components) : comps_(std::move(components)) {
    if (comps_.empty()) throw std::invalid_argument("gmm: no components");
    double wsum = 0.0;
    for (const auto& c : comps_) {
        if (!(c.weight > 0.0)) throw std::invalid_argument("gmm: weights must be positive");
        if (!(c.stddev > 0.0)) throw std::invalid_argument("gmm: stddevs must be positive");
        if (!std::isfinite(c.mean)) throw std::invalid_argument("gmm: non-finite mean");
        wsum += c.weight;
    }
    if (std::abs(wsum - 1.0) > kWeightTol)
        throw std::invalid_argument("gmm: weights sum to " + std::to_string(wsum) +
                                    ", expected 1");
}

Gmm Gmm::single(double mean, double stddev) { return Gmm({{1.0, mean, stddev}}); }

double Gmm::pdf(double x) const {
    double v = 0.0;
    for (const auto& c : comps_) {
        const double z = (x - c.mean) / c.stddev;
        v += c.weight * standard_normal_pdf(z) / c.stddev;
    }
    return v;
}

double Gmm::cdf(double x) const {
    double v = 0.0;
    for (const auto& c : comps_) v += c.weight * standard_normal_cdf((x - c.mean) / c.stddev);
    return v;
}

double Gmm::mean() const {
    double v = 0.0;
    for (const auto& c : comps_) v += c.weight * c.mean;
    return v;
}

double Gmm::variance() const {
    const double m = mean();
    double v = 0.0;
    for (const auto& c : comps_)
        v += c.weight * (c.stddev * c.stddev + (c.mean - m) * (c.mean - m));
    return v;
}

double Gmm::lower_bracket() const {
    double lo = std::numeric_limits<double>::infinity();
    for (const auto& c : comps_) lo = std::min(lo, c.mean - kBracketSigmas * c.stddev);
    return lo;
}

double Gmm::upper_bracket() const {
    double hi = -std::numeric_limits<double>::infinity();
    for (const auto& c : comps_) hi = std::max(hi, c.mean + kBracketSigmas * c.stddev);
    return hi;
}

double Gmm::quantile(double p) const {
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("quantile: p must lie in (0,1)");
    if (comps_.empty()) throw std::logic_error("quantile: empty mixture");
    double lo = lower_bracket();
    double hi = upper_bracket();
    // Mass beyond 12 sigma is below double-precision resolution, so the
    // bracket always straddles the target level.
    for (int it = 0; it < 400; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double f = cdf(mid);
        if (std::abs(f - p) <= kCdfTol) return mid;
        if (f < p)
            lo = mid;
        else
            hi = mid;
        if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(mid)))
            return mid;
    }
    return 0.5 * (lo + hi);
}

Gmm Gmm::scaled(double c) const {
    if (c == 0.0) throw std::invalid_argument("scaled: zero coefficient would degenerate");
    std::vector<GaussComponent> out;
    out.reserve(comps_.size());
    for (const auto& g : comps_) out.push_back({g.weight, c * g.mean, std::abs(c) * g.stddev});
    return Gmm(std::move(out));
}

Gmm Gmm::convolved_with(const Gmm& other) const {
    std::vector<GaussComponent> out;
    out.reserve(comps_.size() * other.comps_.size());
    for (const auto& a : comps_)
        for (const auto& b : other.comps_)
            out.push_back({a.weight * b.weight, a.mean + b.mean,
                           std::sqrt(a.stddev * a.stddev + b.stddev * b.stddev)});
    return Gmm(std::move(out));
}

double CensoredGmm::cdf(double x) const { return x < cap ? base.cdf(x) : 1.0; }

void LinearCombo::add(double coeff, Gmm dist) {
    if (!std::isfinite(coeff)) throw std::invalid_argument("combo: non-finite coefficient");
    terms_.push_back({coeff, std::move(dist), false, 0.0});
}

void LinearCombo::add_censored(double coeff, Gmm dist, double cap) {
    if (!std::isfinite(coeff)) throw std::invalid_argument("combo: non-finite coefficient");
    if (!(cap >= 0.0)) throw std::invalid_argument("combo: censoring cap must be >= 0");
    terms_.push_back({coeff, std::move(dist), true, cap});
}

bool LinearCombo::has_censored() const {
    return std::any_of(terms_.begin(), terms_.end(), [](const Term& t) { return t.censored; });
}

Gmm LinearCombo::as_gmm() const {
    if (terms_.empty()) throw std::logic_error("combo: empty");
    if (has_censored())
        throw std::logic_error(
            "combo: censored term present; reduce via censored_quantile_bound first");
    Gmm acc = terms_.front().dist.scaled(terms_.front().coeff);
    for (std::size_t i = 1; i < terms_.size(); ++i)
        acc = acc.convolved_with(terms_[i].dist.scaled(terms_[i].coeff));
    return acc;
}

double LinearCombo::quantile(double p) const { return as_gmm().quantile(p); }

double curtailment_penalty(const Gmm& dist, double k_penalty, double cap_max, double rbar) {
    if (!(rbar >= 0.0 && rbar <= cap_max))
        throw std::invalid_argument("curtailment_penalty: rbar outside [0, cap]");
    // Per component: integral_a^b (x - rbar) phi((x-mu)/sigma)/sigma dx
    //   = (mu - rbar) (Phi(beta) - Phi(alpha)) + sigma (phi(alpha) - phi(beta)).
    double v = 0.0;
    for (const auto& c : dist.components()) {
        const double a = (rbar - c.mean) / c.stddev;
        const double b = (cap_max - c.mean) / c.stddev;
        v += c.weight * ((c.mean - rbar) * (standard_normal_cdf(b) - standard_normal_cdf(a)) +
                         c.stddev * (standard_normal_pdf(a) - standard_normal_pdf(b)));
    }
    return std::max(0.0, k_penalty * v);
}

PenaltyDerivatives penalty_derivatives(const Gmm& dist, double k_penalty, double cap_max,
                                       double rbar) {
    if (!(rbar >= 0.0 && rbar <= cap_max))
        throw std::invalid_argument("penalty_derivatives: rbar outside [0, cap]");
    return {k_penalty * (dist.cdf(rbar) - dist.cdf(cap_max)), k_penalty * dist.pdf(rbar)};
}

CensoredQuantileBound censored_quantile_bound(const LinearCombo& combo,
                                              const std::vector<std::size_t>& cap_set, double p) {
    const auto& terms = combo.terms();
    std::vector<bool> capped(terms.size(), false);
    double det = 0.0;
    for (std::size_t idx : cap_set) {
        if (idx >= terms.size())
            throw std::invalid_argument("censored_quantile_bound: index out of range");
        const auto& t = terms[idx];
        if (!t.censored)
            throw std::invalid_argument("censored_quantile_bound: index is not a censored term");
        if (t.coeff < 0.0)
            throw std::invalid_argument(
                "censored_quantile_bound: negative coefficient on a capped term");
        capped[idx] = true;
        det += t.coeff * t.cap;
    }
    LinearCombo residual;
    for (std::size_t i = 0; i < terms.size(); ++i) {
        if (capped[i]) continue;
        // Censored terms outside the chosen set revert to their base
        // (uncensored) distribution, which dominates them pathwise.
        residual.add(terms[i].coeff, terms[i].dist);
    }
    double q = 0.0;
    if (residual.size() > 0) q = residual.quantile(p);
    return {det, q};
}

}  // namespace ihp
