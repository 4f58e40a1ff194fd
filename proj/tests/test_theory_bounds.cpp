#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <random>

#include "deepratio/theory_bounds.hpp"

using namespace deepratio::theory;

namespace {

// Adaptive Gauss-Kronrod on [B, y_max] with y_max where C y^p = 700.
double tail_integral_quadrature(double p, double q, double C, double B) {
    const double y_max = std::pow(700.0 / C, 1.0 / p);
    if (y_max <= B) return 0.0;
    auto f = [&](double y) { return std::pow(y, q) * std::exp(-C * std::pow(y, p)); };
    double err = 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, B, y_max, 30, 1e-12, &err);
}

double f_ratio(double x) { return (x - 1.0 - std::log(x)) / ((x - 1.0) * (x - 1.0)); }

}  // namespace

TEST(EffectiveSmoothness, Examples) {
    EXPECT_EQ(effective_smoothness({1.0}), (std::vector<double>{1.0}));
    const auto b = effective_smoothness({2.0, 0.5});
    EXPECT_DOUBLE_EQ(b[0], 1.0);
    EXPECT_DOUBLE_EQ(b[1], 0.5);
    EXPECT_EQ(effective_smoothness({1.5, 2.0, 3.0}), (std::vector<double>{1.5, 2.0, 3.0}));
    const auto c = effective_smoothness({2.0, 0.5, 0.8});
    EXPECT_DOUBLE_EQ(c[0], 2.0 * 0.5 * 0.8);
    EXPECT_DOUBLE_EQ(c[1], 0.5 * 0.8);
    EXPECT_DOUBLE_EQ(c[2], 0.8);
    EXPECT_THROW(effective_smoothness({}), std::invalid_argument);
    EXPECT_THROW(effective_smoothness({1.0, 0.0}), std::invalid_argument);
    EXPECT_THROW(effective_smoothness({-1.0}), std::invalid_argument);
}

TEST(RatePhi, Examples) {
    EXPECT_NEAR(rate_phi(1e4, {{1.0}, {2.0}}), 0.01, 1e-12);
    // beta* = (1, 0.5), t = (2, 1): exponents 1/2 and 1/2
    EXPECT_NEAR(rate_phi(1e4, {{2.0, 0.5}, {2.0, 1.0}}), 0.01, 1e-12);
    // beta* = (1, 2), t = (4, 1): exponents 1/3 and 4/5, the slower one wins
    EXPECT_NEAR(rate_phi(1000.0, {{1.0, 2.0}, {4.0, 1.0}}), 0.1, 1e-12);
    EXPECT_THROW(rate_phi(1.0, {{1.0}, {2.0}}), std::invalid_argument);
    EXPECT_THROW(rate_phi(10.0, {{1.0, 2.0}, {2.0}}), std::invalid_argument);
}

TEST(RatePhi, MonotoneAndRoughLayersSlowIt) {
    const SmoothnessSpec spec{{1.5, 0.7}, {3.0, 2.0}};
    for (double T = 2.0; T < 1e7; T *= 3.0) {
        const double phi = rate_phi(T, spec);
        EXPECT_GT(phi, 0.0);
        EXPECT_LT(phi, 1.0);
        EXPECT_LT(rate_phi(2.0 * T, spec), phi);
        EXPECT_GE(rate_phi(T, {{1.5, 0.7, 0.2}, {3.0, 2.0, 1.0}}), phi * (1.0 - 1e-15));
    }
}

TEST(CoveringBound, Examples) {
    EXPECT_NEAR(covering_bound({1, {1.0, 1.0, 1.0}, 1.0, 1.0}), 2.0 * std::log(32.0), 1e-12);
    // s = 10, delta = 0.5, L = 2, widths (3, 8, 8, 7): 11 log(2 * 2 * 3 * 4 * 9 * 9 * 8)
    EXPECT_NEAR(covering_bound({2, {3.0, 8.0, 8.0, 7.0}, 10.0, 0.5}), 11.0 * std::log(4.0 * 3.0 * 4.0 * 9.0 * 9.0 * 8.0), 1e-12);
    EXPECT_THROW(covering_bound({1, {1.0, 1.0, 1.0}, 1.0, 0.0}), std::invalid_argument);
    EXPECT_THROW(covering_bound({2, {1.0, 1.0, 1.0}, 1.0, 1.0}), std::invalid_argument);
}

TEST(CoveringBound, Monotone) {
    double prev = 0.0;
    for (double s = 0.0; s < 50.0; s += 5.0) {
        const double v = covering_bound({3, {2, 4, 4, 4, 1}, s, 0.1});
        EXPECT_GT(v, prev);
        prev = v;
    }
    prev = 0.0;
    for (double delta = 2.0; delta > 1e-6; delta /= 3.0) {
        const double v = covering_bound({3, {2, 4, 4, 4, 1}, 10.0, delta});
        EXPECT_GT(v, prev);
        prev = v;
    }
}

TEST(TailBound, SupConstant) {
    EXPECT_NEAR(tail_sup_constant(1.0), std::exp(-0.5), 1e-15);
    EXPECT_NEAR(tail_sup_constant(2.0), 2.0 * std::exp(-1.0), 1e-15);
    EXPECT_NEAR(tail_sup_constant(1.2), std::exp(-0.5), 1e-15);  // sup at u = 1 while 2(k-1) < 1
    // dense scan over u >= 1
    for (double k : {1.0, 1.7, 3.0, 5.5}) {
        double best = 0.0;
        for (double u = 1.0; u < 200.0; u += 1e-3) best = std::max(best, std::pow(u, k - 1.0) * std::exp(-u / 2.0));
        EXPECT_NEAR(tail_sup_constant(k), best, 1e-9 * best);
        EXPECT_GE(tail_sup_constant(k), best * (1.0 - 1e-14));
    }
}

TEST(TailBound, ClosedFormExamples) {
    const double exact1 = 2.0 * std::exp(-1.0);
    const double b1 = tail_integral_bound(1.0, 1.0, 1.0, 1.0, 2.0);
    EXPECT_NEAR(b1, 2.0 * (2.0 / std::exp(1.0)) * std::exp(-0.5), 1e-12);
    EXPECT_NEAR(b1, 0.8925, 1e-4);
    EXPECT_GE(b1, exact1);
    EXPECT_NEAR(tail_integral_quadrature(1.0, 1.0, 1.0, 1.0), exact1, 1e-10);

    const double exact2 = std::exp(-1.0) / 2.0;
    EXPECT_NEAR(tail_integral_quadrature(2.0, 1.0, 1.0, 1.0), exact2, 1e-10);
    EXPECT_GE(tail_integral_bound(2.0, 1.0, 1.0, 1.0, 1.0), exact2);
}

TEST(TailBound, Preconditions) {
    EXPECT_THROW(tail_integral_bound(1.0, 3.0, 1.0, 1.0, 2.0), std::invalid_argument);  // (q+1)/p > k
    EXPECT_THROW(tail_integral_bound(1.0, 1.0, 1.0, 0.5, 2.0), std::invalid_argument);  // C B^p < 1
    EXPECT_THROW(tail_integral_bound(0.0, 1.0, 1.0, 1.0, 2.0), std::invalid_argument);
    EXPECT_THROW(tail_integral_bound(1.0, 1.0, -1.0, 1.0, 2.0), std::invalid_argument);
}

TEST(TailBound, DominatesQuadratureOnGrid) {
    const double ps[5] = {0.5, 1.0, 1.5, 2.0, 3.0};
    const double qs[5] = {0.0, 0.5, 1.0, 2.0, 4.0};
    const double Cs[5] = {0.25, 0.5, 1.0, 2.0, 8.0};
    const double Bscale[5] = {1.0, 1.2, 1.5, 2.0, 3.0};
    int cases = 0;
    for (double p : ps)
        for (double q : qs)
            for (double C : Cs)
                for (double s : Bscale) {
                    double B = s * std::pow(1.0 / C, 1.0 / p);  // C B^p = s^p >= 1
                    while (C * std::pow(B, p) < 1.0) B = std::nextafter(B, INFINITY);
                    const double k = std::ceil((q + 1.0) / p);
                    const double quad = tail_integral_quadrature(p, q, C, B);
                    const double bound = tail_integral_bound(p, q, C, B, k);
                    EXPECT_GE(bound, quad) << "p=" << p << " q=" << q << " C=" << C << " B=" << B;
                    ++cases;
                }
    EXPECT_EQ(cases, 625);
}

TEST(Compatibility, RatioContinuousAtOne) {
    EXPECT_DOUBLE_EQ(compatibility_ratio(1.0), 0.5);
    for (double h : {1e-3, 1e-5, 1e-7}) {
        EXPECT_NEAR(compatibility_ratio(1.0 + h), 0.5 - h / 3.0, 1e-6);
        EXPECT_NEAR(compatibility_ratio(1.0 - h), 0.5 + h / 3.0, 1e-6);
    }
    EXPECT_NEAR(compatibility_ratio(2.0), f_ratio(2.0), 1e-15);
    EXPECT_THROW(compatibility_ratio(0.0), std::invalid_argument);
}

TEST(Compatibility, ConstantsAgainstDenseScan) {
    const auto [c0, c1] = compatibility_constants(0.5, 2.0);
    EXPECT_NEAR(c0, 0.30685, 1e-4);
    EXPECT_NEAR(c1, 0.77259, 1e-4);
    double lo = INFINITY, hi = -INFINITY;
    for (int i = 0; i <= 1000000; ++i) {
        const double x = 0.5 + 1.5 * i / 1e6;
        const double f = compatibility_ratio(x);
        lo = std::min(lo, f);
        hi = std::max(hi, f);
    }
    EXPECT_NEAR(c0, lo, 1e-9);
    EXPECT_NEAR(c1, hi, 1e-9);
    EXPECT_NEAR(c0, 1.0 - std::log(2.0), 1e-12);
    EXPECT_NEAR(c1, 2.0 * (std::log(2.0) - 0.5) / 0.5, 1e-12);
}

TEST(Compatibility, TinyIntervalAndSandwich) {
    const auto [a, b] = compatibility_constants(1.0 - 1e-9, 1.0 + 1e-9);
    EXPECT_NEAR(a, 0.5, 1e-8);
    EXPECT_NEAR(b, 0.5, 1e-8);

    const double x0 = 0.2, x1 = 5.0;
    const auto [c0, c1] = compatibility_constants(x0, x1);
    EXPECT_LE(c0, 0.5);
    EXPECT_GE(c1, 0.5);
    std::mt19937_64 eng(1);
    std::uniform_real_distribution<double> u(x0, x1);
    for (int n = 0; n < 10000; ++n) {
        const double x = u(eng);
        const double sq = (x - 1.0) * (x - 1.0);
        const double mid = x - 1.0 - std::log(x);
        EXPECT_LE(c0 * sq, mid + 1e-15);
        EXPECT_GE(c1 * sq, mid - 1e-15);
    }
}

TEST(Compatibility, InvalidIntervals) {
    EXPECT_THROW(compatibility_constants(0.0, 2.0), std::invalid_argument);
    EXPECT_THROW(compatibility_constants(1.2, 2.0), std::invalid_argument);
    EXPECT_THROW(compatibility_constants(0.5, 0.9), std::invalid_argument);
    EXPECT_THROW(compatibility_constants(1.0, 1.0), std::invalid_argument);
}
