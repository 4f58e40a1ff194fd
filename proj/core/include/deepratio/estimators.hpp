#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "deepratio/ratio_net.hpp"
#include "deepratio/sample.hpp"
#include "deepratio/sim_core.hpp"

namespace deepratio::est {

struct TrainConfig {
    std::size_t batch_size = 512;
    std::size_t max_epochs = 100;
    double validation_fraction = 0.1;
    std::size_t patience = 5;
    net::AdamConfig adam;
    std::uint64_t seed = 0;
    std::size_t workers = 1;  // concurrent network trainings inside one fit

    void validate() const;
};

struct EpochRecord {
    std::size_t epoch = 0;
    double train_loss = 0.0;  // mean per event over the epoch's minibatches
    double val_loss = 0.0;    // mean per event; NaN without a validation split
};

struct TrainingReport {
    std::vector<EpochRecord> curve;
    std::size_t best_epoch = 0;
    double initial_loss = 0.0;  // mean per event on the training split, before any step
    double final_loss = 0.0;    // same, with the restored parameters
    std::size_t n_train = 0;
    std::size_t n_val = 0;
    std::uint64_t net_seed = 0;  // initialisation and shuffling seed of this network
};

/// Thrown when a loss becomes non-finite; the message carries the epoch,
/// minibatch and last finite loss.
class TrainingDiverged : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct TrainedNetwork {
    net::RatioNetwork net;
    TrainingReport report;
};

/// Minibatch Adam on the pinned-reference softmax loss with per-epoch
/// shuffling, early stopping on a held-out split and restoration of the best
/// validation parameters. Deterministic in (config, data, net_seed).
TrainedNetwork train_network(const net::NetConfig& shape, const net::LabeledBatch& data, const TrainConfig& cfg,
                             std::uint64_t net_seed);

// ---------------------------------------------------------------------------
// Training sets

/// One column (x..., y...) per event, label encode_class(type, mark).
net::LabeledBatch build_onestep_batch(const MarkedPointSample& sample);

struct TwoStepBatches {
    net::LabeledBatch type_batch;                // columns x, labels type
    std::vector<net::LabeledBatch> mark_batches;  // per type: columns of mark features, labels mark
};

TwoStepBatches build_twostep_batches(const MarkedPointSample& sample);

// ---------------------------------------------------------------------------
// Models

struct OneStepModel {
    net::RatioNetwork net;  // out_dim = n_classes - 1, class 0 pinned to logit 0
    int n_types = 4;
    int n_marks = 2;
    TrainingReport report;
};

struct TwoStepModel {
    net::RatioNetwork type_net;              // out_dim = n_types - 1
    std::vector<net::RatioNetwork> mark_nets;  // one per type, out_dim = n_marks - 1
    int n_types = 4;
    int n_marks = 2;
    TrainingReport type_report;
    std::vector<TrainingReport> mark_reports;
    std::vector<std::string> warnings;
};

struct TwoStepShapes {
    net::NetConfig type_net;
    net::NetConfig mark_net;
};

/// Shapes matching the sample's covariate layout.
net::NetConfig onestep_shape(const MarkedPointSample& sample, std::size_t n_layers, std::size_t width);
TwoStepShapes twostep_shapes(const MarkedPointSample& sample, std::size_t n_layers, std::size_t width);

/// Throws std::invalid_argument on an empty sample or a shape that does not
/// match it, TrainingDiverged on a non-finite loss.
OneStepModel train_onestep(const MarkedPointSample& sample, const net::NetConfig& shape, const TrainConfig& cfg);

/// The type network and each mark network train independently (and
/// concurrently when cfg.workers > 1). A type without events keeps a zero
/// mark network (p = 1/n_marks) and records a warning.
TwoStepModel train_twostep(const MarkedPointSample& sample, const TwoStepShapes& shapes, const TrainConfig& cfg);

// ---------------------------------------------------------------------------
// Prediction
//
// A LogitFn maps inputs (one column per point) to learned log-ratios
// relative to the pinned reference class. Fitted networks and closed-form
// ground truth both expose this view, so the same prediction and risk code
// serves either.

using LogitFn = std::function<Eigen::MatrixXd(const Eigen::MatrixXd&)>;

struct OneStepLogits {
    LogitFn joint;
    int n_types = 4;
    int n_marks = 2;
};

struct TwoStepLogits {
    LogitFn type;
    std::vector<LogitFn> marks;
    int n_types = 4;
    int n_marks = 2;
};

OneStepLogits logits_of(const OneStepModel& model);
TwoStepLogits logits_of(const TwoStepModel& model);
OneStepLogits truth_onestep_logits(const sim::GroundTruthModel& truth);
TwoStepLogits truth_twostep_logits(const sim::GroundTruthModel& truth);

/// Log joint class probabilities (n_classes x n) for covariate columns x
/// (d_x x n) and y (d_y x n; zero rows when marks use x).
Eigen::MatrixXd log_probs(const OneStepLogits& logits, const Eigen::MatrixXd& x, const Eigen::MatrixXd& y);
Eigen::MatrixXd log_probs(const TwoStepLogits& logits, const Eigen::MatrixXd& x, const Eigen::MatrixXd& y);

/// Two-step factors: log P(type | x) (n_types x n) and log P(mark | type, y) (n_marks x n).
Eigen::MatrixXd type_log_probs(const TwoStepLogits& logits, const Eigen::MatrixXd& x);
Eigen::MatrixXd mark_log_probs(const TwoStepLogits& logits, int type, const Eigen::MatrixXd& marks_in);

std::vector<double> predict_onestep(const OneStepModel& model, std::span<const double> x, std::span<const double> y);
std::vector<double> predict_twostep(const TwoStepModel& model, std::span<const double> x, std::span<const double> y);

/// Sum over events of -log p_hat(realized class): the training loss on the full sample.
double sample_nll(const OneStepModel& model, const MarkedPointSample& sample);
double sample_nll(const TwoStepModel& model, const MarkedPointSample& sample);

/// Covariates of every event as column matrices (d_x x n, d_y x n).
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> event_covariates(const MarkedPointSample& sample);

// ---------------------------------------------------------------------------
// Fitted-model bundles: per-network checkpoints, manifest.json and training
// curves (epoch,train_loss,val_loss).

void save_bundle(const OneStepModel& model, const std::filesystem::path& dir);
void save_bundle(const TwoStepModel& model, const std::filesystem::path& dir);
OneStepModel load_onestep_bundle(const std::filesystem::path& dir);
TwoStepModel load_twostep_bundle(const std::filesystem::path& dir);

}  // namespace deepratio::est
