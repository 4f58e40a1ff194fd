#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "deepratio/sample.hpp"

namespace deepratio::sim {

struct OUParams {
    double theta = 1.0;  // mean-reversion rate, > 0
    double xbar = 0.0;   // long-run mean
    double sigma = 0.0;  // volatility, >= 0
};

/// Exact Gaussian transition of dX = theta (xbar - X) dt + sigma dB over dt.
double ou_transition(double state, double dt, const OUParams& params, double gauss);

/// sigma^2 / (2 theta).
double ou_stationary_variance(const OUParams& params);

/// 1 + cos(2 pi t).
double baseline_intensity(double t);

// Closed forms of the four-type, two-mark simulation model.
namespace paper {
inline constexpr int kTypes = 4;
inline constexpr int kMarks = 2;

double intensity(int type, std::span<const double> x);
double mark_probability(int type, int mark, std::span<const double> y);
}  // namespace paper

/// Ground-truth marked intensity lambda_0(t) lambda^i(x) p_i^k(y).
///
/// The suprema are analytic and feed the thinning bound.
struct GroundTruthModel {
    std::string id;
    std::vector<OUParams> ou_x;
    std::vector<OUParams> ou_y;
    int n_types = 4;
    int n_marks = 2;
    std::function<double(double)> baseline;
    double baseline_sup = 0.0;
    std::function<double(int, std::span<const double>)> intensity;
    std::vector<double> intensity_sup;  // per type
    std::function<double(int, int, std::span<const double>)> mark_probability;

    int n_classes() const { return n_types * n_marks; }
};

/// The OU/intensity/mark model used for the simulation study.
GroundTruthModel paper_model();
/// lambda_0 == 1, lambda^i == c for four types, marks fair; OU covariates as in paper_model.
GroundTruthModel constant_model(double c);
/// Paper baseline and covariates, all lambda^i == 2, all p_i^k == 1/2.
GroundTruthModel symmetric_model();
/// Looks up one of the models above by id ("paper", "constant", "symmetric").
GroundTruthModel model_by_id(const std::string& id);

double true_intensity(int type, std::span<const double> x);
double mark_probability(int type, int mark, std::span<const double> y);

/// p^{i,k}(x,y) = lambda^i p_i^k / sum_j,l lambda^j p_j^l, in encode_class order.
std::vector<double> true_joint_probability(const GroundTruthModel& model, std::span<const double> x,
                                           std::span<const double> y);

// True log-ratios relative to the pinned reference class 0.
std::vector<double> joint_log_ratios(const GroundTruthModel& model, std::span<const double> x,
                                     std::span<const double> y);
std::vector<double> type_log_ratios(const GroundTruthModel& model, std::span<const double> x);
std::vector<double> mark_log_ratios(const GroundTruthModel& model, int type, std::span<const double> y);

/// M >= lambda_0(t) sum_i lambda^i(x) over the reachable state space.
double dominating_bound(const GroundTruthModel& model);

/// Ogata thinning with exact OU covariate transitions between candidates.
///
/// OU coordinates start from their stationary law. A snapshot of the
/// covariates is taken every `grid_step` time units (0 disables it).
MarkedPointSample simulate(const GroundTruthModel& model, double horizon, std::uint64_t seed,
                           double grid_step = 0.1);

}  // namespace deepratio::sim
