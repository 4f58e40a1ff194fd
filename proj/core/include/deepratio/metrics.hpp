#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "deepratio/estimators.hpp"
#include "deepratio/sample.hpp"
#include "deepratio/sim_core.hpp"

namespace deepratio::metrics {

/// Regular per-axis grids between the 1% and 99% empirical quantiles.
struct GridSpec {
    std::vector<std::vector<double>> axes;  // one G+1 array per covariate (x..., y...)
    std::vector<std::string> warnings;

    std::size_t cardinality() const;
    std::size_t dims() const { return axes.size(); }
    /// Cartesian product, one point per column (last axis varies fastest).
    Eigen::MatrixXd points() const;
};

/// Type-7 (linear interpolation of order statistics) quantile.
double quantile(std::vector<double> draws, double prob);

/// `draws[a]` holds the draws of axis a. Requires >= 100 draws per axis and G >= 1.
/// A degenerate axis (equal quantiles) yields a repeated point and a warning.
GridSpec quantile_grid(const std::vector<std::vector<double>>& draws, std::size_t G);
/// Grid over the sample's covariate path (or event covariates when no path was recorded).
GridSpec quantile_grid(const MarkedPointSample& sample, std::size_t G);

struct GridErrors {
    double eps_l2 = 0.0;    // sum over classes of the grid RMS error
    double eps_linf = 0.0;  // max over classes and grid points
};

/// Errors between two probability tables (n_classes x n_points).
GridErrors grid_errors(const Eigen::MatrixXd& predicted, const Eigen::MatrixXd& truth);

/// Probability tables on the grid's points, split into x (first d_x axes) and y.
Eigen::MatrixXd predicted_on_grid(const est::OneStepLogits& logits, const GridSpec& grid, std::size_t d_x);
Eigen::MatrixXd predicted_on_grid(const est::TwoStepLogits& logits, const GridSpec& grid, std::size_t d_x);
Eigen::MatrixXd truth_on_grid(const sim::GroundTruthModel& truth, const GridSpec& grid);

/// Empirical excess risk -(1/T) sum_events [log p_hat - log p] on a fresh sample.
double empirical_risk(const est::OneStepLogits& model, const est::OneStepLogits& truth, const MarkedPointSample& fresh);
double empirical_risk_onestep(const est::OneStepModel& model, const sim::GroundTruthModel& truth,
                              const MarkedPointSample& fresh);

struct TwoStepRisk {
    double type_term = 0.0;
    std::vector<double> mark_terms;  // per type, over that type's events
    double total() const;
};

TwoStepRisk empirical_risk(const est::TwoStepLogits& model, const est::TwoStepLogits& truth,
                           const MarkedPointSample& fresh);
TwoStepRisk empirical_risk_twostep(const est::TwoStepModel& model, const sim::GroundTruthModel& truth,
                                   const MarkedPointSample& fresh);

/// Held-out negative log-likelihood per unit time, for data without a ground truth.
double heldout_nll_rate(const est::OneStepLogits& model, const MarkedPointSample& fresh);
double heldout_nll_rate(const est::TwoStepLogits& model, const MarkedPointSample& fresh);

struct Conditioning {
    std::size_t axis;  // index into the joint features (x..., y...)
    double value;
};

struct BinnedProbs {
    std::vector<double> edges;                       // n_bins + 1
    std::vector<std::size_t> counts;                 // events per bin
    std::vector<std::optional<std::vector<double>>> freqs;  // per bin, per class; nullopt when empty

    double center(std::size_t bin) const { return 0.5 * (edges[bin] + edges[bin + 1]); }
};

/// Relative class frequencies of events binned on one continuous covariate,
/// restricted to events whose discrete covariates equal the conditioning
/// values. Without an explicit range the data range is used.
BinnedProbs empirical_binned_probs(const MarkedPointSample& sample, std::size_t axis, std::size_t n_bins,
                                   std::span<const Conditioning> conditioning,
                                   std::optional<std::pair<double, double>> range = std::nullopt);

}  // namespace deepratio::metrics
