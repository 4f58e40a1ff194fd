#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "deepratio/estimators.hpp"
#include "deepratio/lob_ingest.hpp"
#include "deepratio/metrics.hpp"
#include "deepratio/sim_core.hpp"

namespace deepratio::harness {

enum Method : int { kOneStep = 1, kTwoStep = 2 };

const char* method_name(int method);
int method_from_name(const std::string& name);  // "one-step" | "two-step" | "1" | "2"

inline constexpr std::uint64_t kEvaluationSeedOffset = 1'000'000;

struct ExperimentConfig {
    std::string kind = "convergence";  // single | convergence | robustness
    std::string model = "paper";
    std::vector<double> horizons{1000, 2000, 4000, 8000, 16000};
    std::size_t replications = 5;
    std::vector<int> methods{kOneStep, kTwoStep};
    std::size_t n_layers = 8;  // shape for single fits and the convergence study
    std::size_t width = 64;
    std::vector<std::size_t> n_layers_list{2, 8};  // robustness grid
    std::vector<std::size_t> widths_list{16, 64};
    bool activate_last_hidden = false;
    est::TrainConfig train;
    std::size_t grid_size = 20;
    std::filesystem::path out_dir = "results";
    std::uint64_t base_seed = 1;
    std::size_t workers = 1;
    bool write_artifacts = false;
    double max_failure_fraction = 0.2;

    /// Throws std::invalid_argument on an unusable configuration.
    void validate() const;

    std::string to_json() const;
    static ExperimentConfig from_json(const std::string& text);
    static ExperimentConfig load(const std::filesystem::path& path);
    /// FNV-1a of the canonical JSON text (output directory and worker count excluded).
    std::string hash() const;
};

struct ErrorReport {
    int method = kOneStep;
    double horizon = 0.0;
    std::uint64_t seed = 0;
    std::size_t n_layers = 0;
    std::size_t width = 0;
    double eps_l2 = 0.0;
    double eps_linf = 0.0;
    double risk = 0.0;
    double wall_s = 0.0;
};

struct Aggregate {
    int method = kOneStep;
    double horizon = 0.0;
    std::size_t n_layers = 0;
    std::size_t width = 0;
    std::size_t n = 0;
    double mean_eps_l2 = 0.0;
    double mean_eps_linf = 0.0;
    double mean_risk = 0.0;
};

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_stderr = 0.0;
};

/// Ordinary least squares y = a + b x with the standard error of b.
LinearFit ols(const std::vector<double>& x, const std::vector<double>& y);

struct SlopeRecord {
    int method = kOneStep;
    std::string measure;  // eps_l2 | eps_linf | risk
    LinearFit fit;        // log(mean measure) against log(T)
};

struct StudyResult {
    std::vector<ErrorReport> rows;  // sorted by (method, T, seed, nL, nN)
    std::vector<Aggregate> aggregates;
    std::vector<SlopeRecord> slopes;
    std::size_t tasks = 0;
    std::vector<std::string> failures;
};

/// Means per (method, T, nL, nN) of rows sorted as in StudyResult.
std::vector<Aggregate> aggregate(const std::vector<ErrorReport>& rows);
/// Log-log slopes of each aggregate measure against T, per method.
std::vector<SlopeRecord> convergence_slopes(const std::vector<Aggregate>& aggregates);

/// One unit of work: simulate the training sample (seed) and a fresh sample
/// (seed + offset), fit one method, measure its errors.
struct FitTask {
    int method = kOneStep;
    double horizon = 0.0;
    std::uint64_t seed = 0;
    std::size_t n_layers = 8;
    std::size_t width = 64;
};

ErrorReport run_task(const ExperimentConfig& config, const FitTask& task);

/// Runs tasks on a bounded pool of `workers` threads. Failed tasks are
/// recorded and skipped; throws std::runtime_error when the failure share
/// exceeds config.max_failure_fraction.
StudyResult run_tasks(const ExperimentConfig& config, const std::vector<FitTask>& tasks);

StudyResult run_convergence_study(const ExperimentConfig& config);
StudyResult run_robustness_grid(const ExperimentConfig& config);

struct SingleFitResult {
    est::OneStepModel onestep;
    est::TwoStepModel twostep;
    std::vector<ErrorReport> reports;
    std::vector<std::filesystem::path> written;
};

/// Fits both methods on one sample (horizons[0], base_seed) and writes the
/// learned-function, probability and truth-overlay tables.
SingleFitResult run_single_fit(const ExperimentConfig& config);

// Output writers
void write_results_csv(const std::vector<ErrorReport>& rows, const std::filesystem::path& path);
void write_aggregate_csv(const std::vector<Aggregate>& aggregates, const std::filesystem::path& path);
void write_slopes_json(const std::vector<SlopeRecord>& slopes, const std::string& config_hash,
                       const std::filesystem::path& path);
/// One CSV per (measure, method): rows n_layers, columns widths.
std::vector<std::filesystem::path> write_heatmaps(const std::vector<Aggregate>& aggregates,
                                                  const std::filesystem::path& dir);

/// Quantile panels (alpha, beta in {0.2, 0.4, 0.6, 0.8}) sampled on 101 points.
inline constexpr std::size_t kCurvePoints = 101;
inline constexpr double kPanelQuantiles[4] = {0.2, 0.4, 0.6, 0.8};

// ---------------------------------------------------------------------------
// Limit-order-book fit

struct LobFitOptions {
    std::vector<std::filesystem::path> inputs;  // one CSV per session
    std::vector<int> methods{kOneStep, kTwoStep};
    std::filesystem::path out_dir = "lob_fit";
    std::size_t n_layers = 8;
    std::size_t width = 64;
    est::TrainConfig train;
    std::int64_t tick_size = 1;
    std::size_t empirical_bins = 20;
};

struct LobFitResult {
    MarkedPointSample sample;
    std::size_t rejected = 0;
    std::vector<est::OneStepModel> onestep;  // empty unless requested
    std::vector<est::TwoStepModel> twostep;
};

/// Fitted p^{i,k}(x0 | x1, x2) on 101 imbalance points for each of the six
/// (sign, spread) cells, as rows of (x1, x2, x0, p00, p01, p10, p11).
std::vector<std::array<double, 7>> lob_curves(const est::OneStepLogits& logits);
std::vector<std::array<double, 7>> lob_curves(const est::TwoStepLogits& logits);

LobFitResult run_lob_fit(const LobFitOptions& options);
/// Same pipeline on sessions already in memory.
LobFitResult run_lob_fit(std::vector<lob::Session> sessions, const LobFitOptions& options);

}  // namespace deepratio::harness
