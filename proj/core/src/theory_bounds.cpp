#include "deepratio/theory_bounds.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace deepratio::theory {

std::vector<double> effective_smoothness(const std::vector<double>& betas) {
    if (betas.empty()) throw std::invalid_argument("effective_smoothness: no layers");
    for (double b : betas)
        if (!(b > 0.0)) throw std::invalid_argument("effective_smoothness: smoothness must be positive");
    std::vector<double> out(betas.size());
    double tail = 1.0;
    for (std::size_t i = betas.size(); i-- > 0;) {
        out[i] = betas[i] * tail;
        tail *= std::min(betas[i], 1.0);
    }
    return out;
}

double rate_phi(double horizon, const SmoothnessSpec& spec) {
    if (!(horizon > 1.0)) throw std::invalid_argument("rate_phi: horizon must exceed 1");
    if (spec.betas.size() != spec.ts.size()) throw std::invalid_argument("rate_phi: betas and ts differ in length");
    const auto bstar = effective_smoothness(spec.betas);
    double phi = 0.0;
    for (std::size_t i = 0; i < bstar.size(); ++i) {
        if (!(spec.ts[i] >= 1.0)) throw std::invalid_argument("rate_phi: t_i must be >= 1");
        phi = std::max(phi, std::pow(horizon, -2.0 * bstar[i] / (2.0 * bstar[i] + spec.ts[i])));
    }
    return phi;
}

double covering_bound(const NetSizeSpec& size) {
    if (!(size.delta > 0.0)) throw std::invalid_argument("covering_bound: delta must be positive");
    if (size.widths.size() != size.depth + 2)
        throw std::invalid_argument("covering_bound: expected L + 2 widths");
    double log_inner = std::log(2.0 / size.delta) + std::log(static_cast<double>(size.depth) + 1.0);
    for (double p : size.widths) log_inner += std::log(p + 1.0);
    return (size.sparsity + 1.0) * log_inner;
}

double tail_sup_constant(double k) {
    const double u = std::max(1.0, 2.0 * (k - 1.0));
    return std::pow(u, k - 1.0) * std::exp(-u / 2.0);
}

double tail_integral_bound(double p, double q, double C, double B, double k) {
    if (!(p > 0.0 && q >= 0.0 && C > 0.0 && B > 0.0))
        throw std::invalid_argument("tail_integral_bound: p, C, B must be positive and q >= 0");
    if (!((q + 1.0) / p <= k)) throw std::invalid_argument("tail_integral_bound: requires (q+1)/p <= k");
    const double cbp = C * std::pow(B, p);
    if (!(cbp >= 1.0)) throw std::invalid_argument("tail_integral_bound: requires C B^p >= 1");
    const double ck = 2.0 * tail_sup_constant(k);
    return ck / p * std::pow(C, -(1.0 + q) / p) * std::exp(-0.5 * cbp);
}

double compatibility_ratio(double x) {
    if (!(x > 0.0)) throw std::invalid_argument("compatibility_ratio: x must be positive");
    const double u = x - 1.0;
    if (std::abs(u) < 1e-4) return 0.5 - u / 3.0 + u * u / 4.0 - u * u * u / 5.0;  // Taylor series at 1
    return (u - std::log1p(u)) / (u * u);
}

namespace {

// Golden-section search for the minimum of sign * f on [a, b].
double golden_extreme(double a, double b, double sign) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    for (int it = 0; it < 200 && (b - a) > 1e-15 * std::max(1.0, std::abs(a)); ++it) {
        if (sign * compatibility_ratio(c) < sign * compatibility_ratio(d)) {
            b = d;
        } else {
            a = c;
        }
        c = b - inv_phi * (b - a);
        d = a + inv_phi * (b - a);
    }
    return sign * compatibility_ratio(0.5 * (a + b));
}

}  // namespace

std::pair<double, double> compatibility_constants(double x0, double x1) {
    if (!(x0 > 0.0 && x1 > x0 && std::isfinite(x1)))
        throw std::invalid_argument("compatibility_constants: need 0 < x0 < x1");
    if (!(x0 <= 1.0 && 1.0 <= x1)) throw std::invalid_argument("compatibility_constants: interval must contain 1");
    constexpr int kScan = 4096;
    const double h = (x1 - x0) / kScan;
    int arg_lo = 0;
    int arg_hi = 0;
    double lo = compatibility_ratio(x0);
    double hi = lo;
    for (int n = 1; n <= kScan; ++n) {
        const double v = compatibility_ratio(n == kScan ? x1 : x0 + n * h);
        if (v < lo) {
            lo = v;
            arg_lo = n;
        }
        if (v > hi) {
            hi = v;
            arg_hi = n;
        }
    }
    auto bracket = [&](int n) {
        return std::pair{std::max(x0, x0 + (n - 1) * h), std::min(x1, x0 + (n + 1) * h)};
    };
    const auto [a_lo, b_lo] = bracket(arg_lo);
    const auto [a_hi, b_hi] = bracket(arg_hi);
    lo = std::min(lo, golden_extreme(a_lo, b_lo, 1.0));
    hi = std::max(hi, -golden_extreme(a_hi, b_hi, -1.0));
    return {lo, hi};
}

}  // namespace deepratio::theory
