#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "deepratio/sim_core.hpp"
#include "oracles.hpp"

using namespace deepratio;
using namespace deepratio::sim;

TEST(OuTransition, ZeroTimeIsIdentity) {
    EXPECT_EQ(ou_transition(5.0, 0.0, {0.3, 1.0, 0.7}, 1.234), 5.0);
}

TEST(OuTransition, ConditionalMean) {
    EXPECT_NEAR(ou_transition(1.0, 1.0, {0.2, 0.0, 0.2}, 0.0), 0.8187307530779818, 1e-15);
}

TEST(OuTransition, SmallThetaLimit) {
    const OUParams p{1e-14, 0.0, 0.3};
    EXPECT_NEAR(ou_transition(0.0, 4.0, p, 1.0), 0.3 * 2.0, 1e-9);
}

TEST(OuTransition, RejectsBadInput) {
    const OUParams p{0.1, 0.0, 0.1};
    EXPECT_THROW(ou_transition(std::nan(""), 1.0, p, 0.0), std::invalid_argument);
    EXPECT_THROW(ou_transition(0.0, -1.0, p, 0.0), std::invalid_argument);
    EXPECT_THROW(ou_transition(0.0, 1.0, p, INFINITY), std::invalid_argument);
}

namespace {

void check_moments(double x0, double dt, const OUParams& p, double mean, double var) {
    std::mt19937_64 eng(42);
    std::normal_distribution<double> z;
    const int n = 100000;
    double s = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double v = ou_transition(x0, dt, p, z(eng));
        s += v;
        s2 += v * v;
    }
    const double m = s / n;
    const double v = s2 / n - m * m;
    EXPECT_NEAR(m, mean, 4.0 * std::sqrt(var / n));
    // variance of the sample variance of a Gaussian: 2 sigma^4 / (n - 1)
    EXPECT_NEAR(v, var, 4.0 * std::sqrt(2.0 * var * var / (n - 1)));
}

}  // namespace

TEST(OuTransition, MonteCarloMomentsOneStep) {
    const OUParams p{0.2, 0.5, 0.2};
    const double dt = 1.5;
    const double mean = 0.5 + (1.0 - 0.5) * std::exp(-0.2 * dt);
    const double var = 0.04 * (1.0 - std::exp(-0.4 * dt)) / 0.4;
    check_moments(1.0, dt, p, mean, var);
}

TEST(OuTransition, MonteCarloMomentsStationary) {
    const OUParams p{0.1, 0.0, 0.1};
    check_moments(1.0, 500.0, p, 0.0, 0.05);
    EXPECT_DOUBLE_EQ(ou_stationary_variance(p), 0.05);
}

TEST(Baseline, Values) {
    EXPECT_NEAR(baseline_intensity(0.0), 2.0, 1e-15);
    EXPECT_NEAR(baseline_intensity(0.5), 0.0, 1e-15);
    EXPECT_NEAR(baseline_intensity(7.25), 1.0, 1e-12);
    for (double t = 0.0; t < 3.0; t += 0.01) {
        EXPECT_GE(baseline_intensity(t), 0.0);
        EXPECT_LE(baseline_intensity(t), 2.0);
        EXPECT_NEAR(baseline_intensity(t), baseline_intensity(t + 1.0), 1e-12);
    }
}

TEST(Intensity, ClosedFormValues) {
    const double a[2] = {0.0, 0.0};
    const double b[2] = {0.0, 17.0};
    const double c[2] = {0.25, 0.0};
    EXPECT_DOUBLE_EQ(true_intensity(0, a), 2.0);
    EXPECT_DOUBLE_EQ(true_intensity(3, b), 2.0);
    EXPECT_DOUBLE_EQ(true_intensity(2, c), 2.5);
    EXPECT_THROW(true_intensity(4, a), std::out_of_range);
    EXPECT_THROW(true_intensity(-1, a), std::out_of_range);
}

TEST(Intensity, MatchesFormulasAtRandomPoints) {
    std::mt19937_64 eng(5);
    std::normal_distribution<double> z(0.0, 1.5);
    for (int n = 0; n < 1000; ++n) {
        const double x[2] = {z(eng), z(eng)};
        EXPECT_NEAR(true_intensity(0, x), 2.0 + std::tanh(x[0]) * std::exp(-x[1] * x[1]), 1e-14);
        EXPECT_NEAR(true_intensity(1, x), 2.0 + std::cos(std::numbers::pi * x[0]) * std::tanh(x[1]), 1e-14);
        EXPECT_NEAR(true_intensity(2, x), 2.0 + std::sin(2.0 * std::numbers::pi * x[0]) * oracle::logistic(x[1]), 1e-14);
        EXPECT_NEAR(true_intensity(3, x), 3.0 - std::exp(-x[0] * x[0]), 1e-14);
        for (int i = 0; i < 4; ++i) EXPECT_GT(true_intensity(i, x), 0.0);
    }
}

TEST(MarkProbability, ClosedFormValues) {
    const double y0[1] = {0.0};
    const double y1[1] = {3.7};
    EXPECT_DOUBLE_EQ(sim::mark_probability(0, 0, y1), 0.25);
    EXPECT_DOUBLE_EQ(sim::mark_probability(2, 0, y0), 0.5);
    EXPECT_NEAR(sim::mark_probability(1, 0, y0), 0.95, 1e-15);
    EXPECT_THROW(sim::mark_probability(0, 2, y0), std::out_of_range);
    EXPECT_THROW(sim::mark_probability(5, 0, y0), std::out_of_range);
}

TEST(MarkProbability, NormalisedEverywhere) {
    std::mt19937_64 eng(6);
    std::normal_distribution<double> z(0.0, 2.0);
    for (int n = 0; n < 10000; ++n) {
        const double y[1] = {z(eng)};
        for (int i = 0; i < 4; ++i) {
            const double p0 = sim::mark_probability(i, 0, y);
            const double p1 = sim::mark_probability(i, 1, y);
            EXPECT_GE(p0, 0.0);
            EXPECT_LE(p0, 1.0);
            EXPECT_NEAR(p0 + p1, 1.0, 1e-12);
        }
    }
}

TEST(JointProbability, HandEvaluatedVector) {
    // lambda = (2, 2, 2, 2) at x = 0; marks (0.25, 0.75), (0.95, 0.05), (0.5, 0.5), (0.6, 0.4) at y = 0
    const double lam[4] = {2.0 + std::tanh(0.0), 2.0 + std::cos(0.0) * std::tanh(0.0), 2.0 + std::sin(0.0) * 0.5,
                           3.0 - std::exp(-0.0)};
    const double p0[4] = {0.25, 0.05 + 0.9 * std::abs(std::cos(0.0)), 1.0 / (1.0 + std::exp(-0.0)), 0.6 * std::exp(-0.0)};
    double expected[8];
    double total = 0.0;
    for (int i = 0; i < 4; ++i) {
        expected[2 * i] = lam[i] * p0[i];
        expected[2 * i + 1] = lam[i] * (1.0 - p0[i]);
        total += lam[i];
    }
    for (double& e : expected) e /= total;

    const double x[2] = {0.0, 0.0};
    const double y[1] = {0.0};
    const auto p = true_joint_probability(paper_model(), x, y);
    const double literal[8] = {0.0625, 0.1875, 0.2375, 0.0125, 0.125, 0.125, 0.15, 0.1};
    ASSERT_EQ(p.size(), 8u);
    for (int c = 0; c < 8; ++c) {
        EXPECT_NEAR(p[c], expected[c], 1e-15);
        EXPECT_NEAR(p[c], literal[c], 1e-15);
    }
}

TEST(JointProbability, SumsToOneAndSymmetricModelIsUniform) {
    std::mt19937_64 eng(8);
    std::normal_distribution<double> z(0.0, 1.0);
    const auto paper = paper_model();
    const auto sym = symmetric_model();
    for (int n = 0; n < 1000; ++n) {
        const double x[2] = {z(eng), z(eng)};
        const double y[1] = {z(eng)};
        const auto p = true_joint_probability(paper, x, y);
        double s = 0.0;
        for (double v : p) s += v;
        EXPECT_NEAR(s, 1.0, 1e-12);
        for (double v : true_joint_probability(sym, x, y)) EXPECT_NEAR(v, 0.125, 1e-15);
    }
}

TEST(JointProbability, LogRatiosAgreeWithProbabilities) {
    const auto m = paper_model();
    const double x[2] = {0.3, -0.2};
    const double y[1] = {0.4};
    const auto p = true_joint_probability(m, x, y);
    const auto l = joint_log_ratios(m, x, y);
    ASSERT_EQ(l.size(), 7u);
    for (int c = 1; c < 8; ++c) EXPECT_NEAR(l[c - 1], std::log(p[c] / p[0]), 1e-13);
    const auto lt = type_log_ratios(m, x);
    ASSERT_EQ(lt.size(), 3u);
    for (int i = 1; i < 4; ++i) EXPECT_NEAR(lt[i - 1], std::log(true_intensity(i, x) / true_intensity(0, x)), 1e-13);
    for (int i = 0; i < 4; ++i) {
        const auto lm = mark_log_ratios(m, i, y);
        ASSERT_EQ(lm.size(), 1u);
        EXPECT_NEAR(lm[0], std::log(sim::mark_probability(i, 1, y) / sim::mark_probability(i, 0, y)), 1e-13);
    }
}

TEST(DominatingBound, Values) {
    EXPECT_DOUBLE_EQ(dominating_bound(paper_model()), 24.0);
    EXPECT_DOUBLE_EQ(dominating_bound(constant_model(1.0)), 4.0);
    EXPECT_DOUBLE_EQ(dominating_bound(constant_model(2.5)), 10.0);
}

TEST(DominatingBound, RandomAudit) {
    const auto m = paper_model();
    const double M = dominating_bound(m);
    std::mt19937_64 eng(99);
    std::uniform_real_distribution<double> ut(0.0, 100.0);
    std::normal_distribution<double> z(0.0, 3.0);
    for (int n = 0; n < 1000000; ++n) {
        const double x[2] = {z(eng), z(eng)};
        double s = 0.0;
        for (int i = 0; i < 4; ++i) s += m.intensity(i, x);
        ASSERT_LE(m.baseline(ut(eng)) * s, M);
    }
}

TEST(Simulate, RejectsNonPositiveHorizon) {
    EXPECT_THROW(simulate(paper_model(), 0.0, 1), std::invalid_argument);
    EXPECT_THROW(simulate(paper_model(), -3.0, 1), std::invalid_argument);
}

TEST(Simulate, BitwiseReproducible) {
    const auto a = simulate(paper_model(), 300.0, 17);
    const auto b = simulate(paper_model(), 300.0, 17);
    ASSERT_EQ(a.events.size(), b.events.size());
    for (std::size_t n = 0; n < a.events.size(); ++n) {
        EXPECT_EQ(a.events[n].time, b.events[n].time);
        EXPECT_EQ(a.events[n].type, b.events[n].type);
        EXPECT_EQ(a.events[n].mark, b.events[n].mark);
        EXPECT_EQ(a.events[n].x, b.events[n].x);
        EXPECT_EQ(a.events[n].y, b.events[n].y);
    }
    EXPECT_EQ(a.covariate_grid.values, b.covariate_grid.values);
    const auto c = simulate(paper_model(), 300.0, 18);
    EXPECT_NE(a.events.front().time, c.events.front().time);
}

TEST(Simulate, StreamInvariants) {
    const auto s = simulate(paper_model(), 500.0, 3);
    EXPECT_NO_THROW(validate(s));
    EXPECT_EQ(s.n_types, 4);
    EXPECT_EQ(s.d_x, 2u);
    EXPECT_EQ(s.d_y, 1u);
    EXPECT_NEAR(static_cast<double>(s.covariate_grid.rows()), 5001.0, 1.0);
    EXPECT_EQ(s.covariate_grid.dim, 3u);
}

TEST(Simulate, ConstantModelCountWithinFourSigma) {
    const auto s = simulate(constant_model(1.0), 10000.0, 21);
    EXPECT_NEAR(static_cast<double>(s.events.size()), 40000.0, 4.0 * 200.0);
}

TEST(Simulate, ConstantModelInterArrivalsAreExponential) {
    const auto s = simulate(constant_model(1.0), 5000.0, 22);
    std::vector<double> gaps;
    double prev = 0.0;
    for (const auto& ev : s.events) {
        gaps.push_back(ev.time - prev);
        prev = ev.time;
    }
    const double d = oracle::ks_statistic(gaps, [](double t) { return oracle::exp_cdf(4.0, t); });
    EXPECT_GT(oracle::ks_pvalue(d, gaps.size()), 0.01);
}

TEST(Simulate, TimeChangeGivesUnitExponentials) {
    // Frozen covariates: lambda^{i,k}(t) = lambda_0(t) lambda^i(x) p_i^k(y), with
    // compensator Lambda_i(t) = lambda^i(x) (t + sin(2 pi t) / (2 pi)) for type i.
    auto m = paper_model();
    m.ou_x = {{0.1, 0.3, 0.0}, {0.2, -0.5, 0.0}};
    m.ou_y = {{0.1, 0.2, 0.0}};
    const auto s = simulate(m, 4000.0, 23);
    const double x[2] = {0.3, -0.5};
    for (int i = 0; i < 4; ++i) {
        const double li = m.intensity(i, x);
        auto comp = [&](double t) { return li * (t + std::sin(2.0 * std::numbers::pi * t) / (2.0 * std::numbers::pi)); };
        std::vector<double> gaps;
        double prev = 0.0;
        for (const auto& ev : s.events) {
            if (ev.type != i) continue;
            EXPECT_EQ(ev.x[0], 0.3);
            gaps.push_back(comp(ev.time) - prev);
            prev = comp(ev.time);
        }
        ASSERT_GT(gaps.size(), 1000u);
        const double d = oracle::ks_statistic(gaps, [](double t) { return oracle::exp_cdf(1.0, t); });
        EXPECT_GT(oracle::ks_pvalue(d, gaps.size()), 0.01) << "type " << i;
    }
}

TEST(Simulate, MarkFrequenciesFollowClosedForm) {
    const auto s = simulate(paper_model(), 4000.0, 24);
    std::size_t n0 = 0, n00 = 0;
    double expected_p1 = 0.0, n1 = 0.0, n10 = 0.0;
    for (const auto& ev : s.events) {
        if (ev.type == 0) {
            ++n0;
            n00 += ev.mark == 0;
        }
        if (ev.type == 1) {
            n1 += 1.0;
            n10 += ev.mark == 0;
            expected_p1 += sim::mark_probability(1, 0, ev.y);
        }
    }
    const double f0 = static_cast<double>(n00) / static_cast<double>(n0);
    EXPECT_NEAR(f0, 0.25, 4.0 * std::sqrt(0.25 * 0.75 / static_cast<double>(n0)));
    EXPECT_NEAR(n10 / n1, expected_p1 / n1, 4.0 * std::sqrt(0.25 / n1));
}
