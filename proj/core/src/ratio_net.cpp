#include "deepratio/ratio_net.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "deepratio/rng.hpp"

namespace deepratio::net {

namespace {

std::pair<std::size_t, std::size_t> layer_shape(const NetConfig& c, std::size_t layer) {
    if (layer == 0) return {c.width, c.in_dim};
    if (layer <= c.n_layers) return {c.width, c.width};
    return {c.out_dim, c.width};
}

bool activated(const NetConfig& c, std::size_t layer) {
    if (layer < c.n_layers) return true;
    if (layer == c.n_layers) return c.activate_last_hidden;
    return false;
}

void leaky_inplace(Eigen::MatrixXd& z, double slope) {
    z = z.cwiseMax(slope * z);  // valid for slope in (0,1)
}

struct Tape {
    std::vector<Eigen::MatrixXd> pre;   // pre-activations per layer
    std::vector<Eigen::MatrixXd> post;  // outputs per layer
};

Eigen::MatrixXd run_forward(const RatioNetwork& net, const Eigen::Ref<const Eigen::MatrixXd>& inputs, Tape* tape) {
    const auto& c = net.config;
    if (static_cast<std::size_t>(inputs.rows()) != c.in_dim)
        throw std::invalid_argument("forward: input has " + std::to_string(inputs.rows()) + " rows, expected " +
                                    std::to_string(c.in_dim));
    Eigen::MatrixXd a = inputs;
    for (std::size_t l = 0; l < c.n_affine(); ++l) {
        Eigen::MatrixXd z(net.params.weights[l].rows(), a.cols());
        z.noalias() = net.params.weights[l] * a;
        z.colwise() += net.params.biases[l];
        if (tape) tape->pre.push_back(z);
        if (activated(c, l)) leaky_inplace(z, c.leaky_slope);
        if (tape) tape->post.push_back(z);
        a = std::move(z);
    }
    return a;
}

void check_labels(const std::vector<int>& labels, std::size_t n_classes) {
    for (int lab : labels)
        if (lab < 0 || static_cast<std::size_t>(lab) >= n_classes)
            throw std::out_of_range("label " + std::to_string(lab) + " outside [0, " + std::to_string(n_classes) +
                                    ")");
}

}  // namespace

void NetConfig::validate() const {
    if (in_dim < 1 || out_dim < 1 || n_layers < 1 || width < 1)
        throw std::invalid_argument("NetConfig: dimensions must be >= 1");
    if (!(leaky_slope > 0.0 && leaky_slope < 1.0)) throw std::invalid_argument("NetConfig: leaky_slope not in (0,1)");
}

Parameters Parameters::zeros(const NetConfig& config) {
    config.validate();
    Parameters p;
    for (std::size_t l = 0; l < config.n_affine(); ++l) {
        const auto [rows, cols] = layer_shape(config, l);
        p.weights.emplace_back(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols)));
        p.biases.emplace_back(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(rows)));
    }
    return p;
}

std::size_t Parameters::size() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l < weights.size(); ++l)
        n += static_cast<std::size_t>(weights[l].size() + biases[l].size());
    return n;
}

void Parameters::set_zero() {
    for (auto& w : weights) w.setZero();
    for (auto& b : biases) b.setZero();
}

bool Parameters::all_finite() const {
    for (std::size_t l = 0; l < weights.size(); ++l)
        if (!weights[l].allFinite() || !biases[l].allFinite()) return false;
    return true;
}

std::vector<double> Parameters::flatten() const {
    std::vector<double> flat;
    flat.reserve(size());
    for (std::size_t l = 0; l < weights.size(); ++l) {
        const auto& w = weights[l];
        for (Eigen::Index r = 0; r < w.rows(); ++r)
            for (Eigen::Index c = 0; c < w.cols(); ++c) flat.push_back(w(r, c));
        for (Eigen::Index r = 0; r < biases[l].size(); ++r) flat.push_back(biases[l](r));
    }
    return flat;
}

void Parameters::assign(std::span<const double> flat) {
    if (flat.size() != size())
        throw std::invalid_argument("Parameters::assign: got " + std::to_string(flat.size()) + " values, expected " +
                                    std::to_string(size()));
    std::size_t pos = 0;
    for (std::size_t l = 0; l < weights.size(); ++l) {
        auto& w = weights[l];
        for (Eigen::Index r = 0; r < w.rows(); ++r)
            for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = flat[pos++];
        for (Eigen::Index r = 0; r < biases[l].size(); ++r) biases[l](r) = flat[pos++];
    }
}

RatioNetwork zero_network(const NetConfig& config) { return RatioNetwork{config, Parameters::zeros(config)}; }

RatioNetwork init(const NetConfig& config, std::uint64_t seed) {
    RatioNetwork net = zero_network(config);
    Rng rng(seed, stream::kNetInit);
    for (auto& w : net.params.weights) {
        const double sd = std::sqrt(2.0 / static_cast<double>(w.cols()));
        // column-major fill order is part of the deterministic contract
        for (Eigen::Index j = 0; j < w.size(); ++j) w.data()[j] = sd * rng.gaussian();
    }
    return net;
}

std::size_t param_count(const NetConfig& c) {
    c.validate();
    return (c.in_dim * c.width + c.width) + c.n_layers * (c.width * c.width + c.width) +
           (c.width * c.out_dim + c.out_dim);
}

Eigen::VectorXd forward(const RatioNetwork& net, std::span<const double> input) {
    if (input.size() != net.config.in_dim)
        throw std::invalid_argument("forward: input size " + std::to_string(input.size()) + ", expected " +
                                    std::to_string(net.config.in_dim));
    Eigen::Map<const Eigen::MatrixXd> in(input.data(), static_cast<Eigen::Index>(input.size()), 1);
    return run_forward(net, in, nullptr).col(0);
}

Eigen::MatrixXd forward_batch(const RatioNetwork& net, const Eigen::Ref<const Eigen::MatrixXd>& inputs) {
    return run_forward(net, inputs, nullptr);
}

Eigen::MatrixXd log_softmax(const Eigen::Ref<const Eigen::MatrixXd>& logits, bool fixed_zero_class) {
    const Eigen::Index offset = fixed_zero_class ? 1 : 0;
    Eigen::MatrixXd full(logits.rows() + offset, logits.cols());
    if (fixed_zero_class) full.row(0).setZero();
    full.bottomRows(logits.rows()) = logits;
    for (Eigen::Index j = 0; j < full.cols(); ++j) {
        auto col = full.col(j);
        const double mx = col.maxCoeff();
        const double lse = mx + std::log((col.array() - mx).exp().sum());
        col.array() -= lse;
    }
    return full;
}

double loss(const RatioNetwork& net, const LabeledBatch& batch, bool fixed_zero_class) {
    const std::size_t n_classes = net.config.out_dim + (fixed_zero_class ? 1 : 0);
    check_labels(batch.labels, n_classes);
    const Eigen::MatrixXd lp = log_softmax(run_forward(net, batch.features, nullptr), fixed_zero_class);
    double total = 0.0;
    for (std::size_t n = 0; n < batch.size(); ++n) total -= lp(batch.labels[n], static_cast<Eigen::Index>(n));
    return total;
}

LossAndGrad loss_and_grad(const RatioNetwork& net, const LabeledBatch& batch, bool fixed_zero_class) {
    const auto& c = net.config;
    const std::size_t n_classes = c.out_dim + (fixed_zero_class ? 1 : 0);
    check_labels(batch.labels, n_classes);
    if (static_cast<std::size_t>(batch.features.cols()) != batch.size())
        throw std::invalid_argument("loss_and_grad: feature columns and labels disagree");

    Tape tape;
    tape.pre.reserve(c.n_affine());
    tape.post.reserve(c.n_affine());
    const Eigen::MatrixXd logits = run_forward(net, batch.features, &tape);
    const Eigen::MatrixXd lp = log_softmax(logits, fixed_zero_class);

    LossAndGrad out;
    out.grad = Parameters::zeros(c);
    const Eigen::Index offset = fixed_zero_class ? 1 : 0;

    // d loss / d logits = softmax - onehot, restricted to learned rows
    Eigen::MatrixXd delta = lp.bottomRows(logits.rows()).array().exp().matrix();
    for (std::size_t n = 0; n < batch.size(); ++n) {
        const int lab = batch.labels[n];
        out.loss -= lp(lab, static_cast<Eigen::Index>(n));
        if (lab >= offset) delta(lab - offset, static_cast<Eigen::Index>(n)) -= 1.0;
    }

    for (std::size_t l = c.n_affine(); l-- > 0;) {
        if (activated(c, l)) {
            const auto& z = tape.pre[l];
            delta = (z.array() > 0.0).select(delta.array(), c.leaky_slope * delta.array()).matrix();
        }
        const Eigen::MatrixXd& input = l == 0 ? static_cast<const Eigen::MatrixXd&>(batch.features) : tape.post[l - 1];
        out.grad.weights[l].noalias() = delta * input.transpose();
        out.grad.biases[l] = delta.rowwise().sum();
        if (l > 0) {
            Eigen::MatrixXd prev(net.params.weights[l].cols(), delta.cols());
            prev.noalias() = net.params.weights[l].transpose() * delta;
            delta = std::move(prev);
        }
    }
    return out;
}

AdamState::AdamState(const NetConfig& shape, AdamConfig cfg)
    : config(cfg), m(Parameters::zeros(shape)), v(Parameters::zeros(shape)) {}

void adam_step(RatioNetwork& net, const Parameters& grads, AdamState& state) {
    if (grads.weights.size() != net.params.weights.size() || state.m.weights.size() != net.params.weights.size())
        throw std::invalid_argument("adam_step: parameter shapes do not match");
    const auto& cfg = state.config;
    ++state.step;
    const double t = static_cast<double>(state.step);
    const double bc1 = 1.0 - std::pow(cfg.beta1, t);
    const double bc2 = 1.0 - std::pow(cfg.beta2, t);
    auto update = [&](auto& param, const auto& g, auto& m, auto& v) {
        m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
        v = cfg.beta2 * v + (1.0 - cfg.beta2) * g.cwiseProduct(g);
        param.array() -= cfg.lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + cfg.eps);
    };
    for (std::size_t l = 0; l < net.params.weights.size(); ++l) {
        update(net.params.weights[l], grads.weights[l], state.m.weights[l], state.v.weights[l]);
        update(net.params.biases[l], grads.biases[l], state.m.biases[l], state.v.biases[l]);
    }
}

}  // namespace deepratio::net
