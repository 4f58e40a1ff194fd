#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace deepratio::net {

/// Shape of a dense ratio network: an input layer (in_dim -> width),
/// `n_layers` inner layers (width -> width) and a linear output layer
/// (width -> out_dim).
///
/// Activation placement: every layer except the last inner one and the
/// output one applies LeakyReLU. `activate_last_hidden` switches to the
/// conventional variant where all hidden layers are activated.
struct NetConfig {
    std::size_t in_dim = 1;
    std::size_t out_dim = 1;
    std::size_t n_layers = 8;
    std::size_t width = 64;
    double leaky_slope = 0.01;
    bool activate_last_hidden = false;

    /// Throws std::invalid_argument on a malformed shape.
    void validate() const;
    std::size_t n_affine() const { return n_layers + 2; }
    friend bool operator==(const NetConfig&, const NetConfig&) = default;
};

/// Weights and biases of every affine layer; reused for gradients and
/// optimizer moments.
struct Parameters {
    std::vector<Eigen::MatrixXd> weights;  // layer l: rows = fan_out, cols = fan_in
    std::vector<Eigen::VectorXd> biases;

    static Parameters zeros(const NetConfig& config);
    std::size_t size() const;
    void set_zero();
    bool all_finite() const;

    /// Row-major weights followed by bias, layer by layer.
    std::vector<double> flatten() const;
    void assign(std::span<const double> flat);
};

struct RatioNetwork {
    NetConfig config;
    Parameters params;
};

/// He-normal weights (variance 2/fan_in), zero biases.
RatioNetwork init(const NetConfig& config, std::uint64_t seed);
/// All parameters zero; outputs 0 logits everywhere.
RatioNetwork zero_network(const NetConfig& config);

/// Exact parameter count of the shape.
std::size_t param_count(const NetConfig& config);

Eigen::VectorXd forward(const RatioNetwork& net, std::span<const double> input);
/// `inputs` holds one sample per column (in_dim x n); returns out_dim x n logits.
Eigen::MatrixXd forward_batch(const RatioNetwork& net, const Eigen::Ref<const Eigen::MatrixXd>& inputs);

/// Classification view of events: one column of features per event.
struct LabeledBatch {
    Eigen::MatrixXd features;  // in_dim x n
    std::vector<int> labels;

    std::size_t size() const { return labels.size(); }
};

/// Log class probabilities from learned logits. With `fixed_zero_class` a
/// constant logit 0 is prepended as class 0 (the reference class is not
/// learned), giving out_dim + 1 classes.
Eigen::MatrixXd log_softmax(const Eigen::Ref<const Eigen::MatrixXd>& logits, bool fixed_zero_class);

struct LossAndGrad {
    double loss = 0.0;  // summed over the batch
    Parameters grad;
};

/// Summed softmax cross-entropy and its gradient by reverse-mode accumulation.
/// Throws std::out_of_range when a label does not index a class.
LossAndGrad loss_and_grad(const RatioNetwork& net, const LabeledBatch& batch, bool fixed_zero_class);
/// Loss only (no backward pass).
double loss(const RatioNetwork& net, const LabeledBatch& batch, bool fixed_zero_class);

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct AdamState {
    AdamConfig config;
    std::uint64_t step = 0;
    Parameters m;
    Parameters v;

    AdamState() = default;
    AdamState(const NetConfig& shape, AdamConfig cfg);
};

/// One bias-corrected Adam update in place.
void adam_step(RatioNetwork& net, const Parameters& grads, AdamState& state);

// Checkpoints. Binary is bit-exact; JSON text is value-exact (17 significant digits).
void save_binary(const RatioNetwork& net, const std::filesystem::path& path);
RatioNetwork load_binary(const std::filesystem::path& path);
void save_json(const RatioNetwork& net, const std::filesystem::path& path);
RatioNetwork load_json(const std::filesystem::path& path);

}  // namespace deepratio::net
