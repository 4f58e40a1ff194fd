#pragma once

#include <cstddef>
#include <utility>
#include <vector>

namespace deepratio::theory {

/// Composition of Hoelder functions: smoothness beta_i and effective input
/// dimension t_i of each of the q + 1 layers.
struct SmoothnessSpec {
    std::vector<double> betas;
    std::vector<double> ts;

    std::size_t depth() const { return betas.empty() ? 0 : betas.size() - 1; }  // q
};

/// Sparse network class size: depth L, widths p_0..p_{L+1}, sparsity s, covering radius delta.
struct NetSizeSpec {
    std::size_t depth = 0;
    std::vector<double> widths;
    double sparsity = 0.0;
    double delta = 1.0;
};

/// beta*_i = beta_i * prod_{j > i} min(beta_j, 1).
std::vector<double> effective_smoothness(const std::vector<double>& betas);

/// phi_T = max_i T^{-2 beta*_i / (2 beta*_i + t_i)}.
double rate_phi(double horizon, const SmoothnessSpec& spec);

/// (s + 1) log[2 delta^{-1} (L + 1) prod_l (p_l + 1)], natural log.
double covering_bound(const NetSizeSpec& size);

/// sup_{u >= 1} u^{k-1} e^{-u/2}.
double tail_sup_constant(double k);

/// Upper bound c_k p^{-1} C^{-(1+q)/p} exp(-C B^p / 2) on
/// I(p,q,C,B) = int_B^inf y^q exp(-C y^p) dy, with c_k = 2 tail_sup_constant(k).
/// Requires (q+1)/p <= k and C B^p >= 1.
double tail_integral_bound(double p, double q, double C, double B, double k);

/// f(x) = (x - 1 - log x) / (x - 1)^2, continuous at x = 1 with f(1) = 1/2.
double compatibility_ratio(double x);

/// (inf, sup) of compatibility_ratio over [x0, x1] by dense scan and
/// golden-section refinement. Requires 0 < x0 <= 1 <= x1, x0 < x1.
std::pair<double, double> compatibility_constants(double x0, double x1);

}  // namespace deepratio::theory
