#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace deepratio {

/// Flattened class index of a marked event: type * n_marks + mark.
constexpr int encode_class(int type, int mark, int n_marks = 2) { return type * n_marks + mark; }

struct ClassPair {
    int type;
    int mark;
    friend bool operator==(const ClassPair&, const ClassPair&) = default;
};

constexpr ClassPair decode_class(int cls, int n_marks = 2) { return {cls / n_marks, cls % n_marks}; }

/// One observed event with the covariates just before its time.
struct EventRecord {
    double time = 0.0;
    int type = 0;
    int mark = 0;
    std::vector<double> x;  // covariates driving the type intensities
    std::vector<double> y;  // covariates driving the mark probabilities (may be empty)
};

/// Covariate path sampled on a regular time grid, rows of (x..., y...).
struct CovariateGrid {
    double step = 0.0;
    std::size_t dim = 0;
    std::vector<double> values;

    std::size_t rows() const { return dim == 0 ? 0 : values.size() / dim; }
    std::span<const double> row(std::size_t r) const { return {values.data() + r * dim, dim}; }
};

/// Event stream of a marked multivariate point process on (0, horizon].
///
/// When `d_y == 0` the mark probabilities are modelled on the x covariates
/// (this is the limit-order-book layout); otherwise mark networks consume y.
struct MarkedPointSample {
    std::string source;  // model id or input description
    double horizon = 0.0;
    std::uint64_t seed = 0;
    int n_types = 4;
    int n_marks = 2;
    std::size_t d_x = 2;
    std::size_t d_y = 1;
    std::vector<EventRecord> events;
    CovariateGrid covariate_grid;

    int n_classes() const { return n_types * n_marks; }
    std::size_t feature_dim() const { return d_x + d_y; }
    std::size_t mark_feature_dim() const { return d_y == 0 ? d_x : d_y; }

    /// Counts per flattened class.
    std::vector<std::size_t> class_counts() const;
};

/// Features fed to a joint (one-step) model: concat(x, y).
std::vector<double> joint_features(const EventRecord& ev);
/// Features fed to a mark model: y, or x when the sample has no mark covariates.
std::span<const double> mark_features(const EventRecord& ev);

/// Throws std::invalid_argument when event times are not increasing inside
/// (0, horizon], indices are out of range or covariate widths disagree.
/// `strict` requires strictly increasing times (simulated data); ingested
/// market data can carry equal timestamps.
void validate(const MarkedPointSample& sample, bool strict = true);

}  // namespace deepratio
