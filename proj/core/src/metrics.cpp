#include "deepratio/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <stdexcept>

namespace deepratio::metrics {

namespace {

double feature(const EventRecord& ev, std::size_t axis) {
    return axis < ev.x.size() ? ev.x[axis] : ev.y.at(axis - ev.x.size());
}

void require_finite(const Eigen::MatrixXd& lp, const char* what) {
    if (!lp.allFinite()) throw std::domain_error(std::string(what) + ": zero or non-finite predicted probability");
}

Eigen::MatrixXd exp_of(const Eigen::MatrixXd& lp) { return lp.array().exp().matrix(); }

}  // namespace

std::size_t GridSpec::cardinality() const {
    std::size_t n = axes.empty() ? 0 : 1;
    for (const auto& a : axes) n *= a.size();
    return n;
}

Eigen::MatrixXd GridSpec::points() const {
    const std::size_t n = cardinality();
    Eigen::MatrixXd pts(static_cast<Eigen::Index>(axes.size()), static_cast<Eigen::Index>(n));
    for (std::size_t p = 0; p < n; ++p) {
        std::size_t rem = p;
        for (std::size_t a = axes.size(); a-- > 0;) {
            pts(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(p)) = axes[a][rem % axes[a].size()];
            rem /= axes[a].size();
        }
    }
    return pts;
}

double quantile(std::vector<double> draws, double prob) {
    if (draws.empty()) throw std::invalid_argument("quantile of an empty set");
    if (!(prob >= 0.0 && prob <= 1.0)) throw std::invalid_argument("quantile probability outside [0,1]");
    std::sort(draws.begin(), draws.end());
    const double h = (static_cast<double>(draws.size()) - 1.0) * prob;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, draws.size() - 1);
    return draws[lo] + (h - static_cast<double>(lo)) * (draws[hi] - draws[lo]);
}

GridSpec quantile_grid(const std::vector<std::vector<double>>& draws, std::size_t G) {
    if (G < 1) throw std::invalid_argument("quantile_grid: G must be >= 1");
    GridSpec spec;
    for (std::size_t a = 0; a < draws.size(); ++a) {
        if (draws[a].size() < 100)
            throw std::invalid_argument("quantile_grid: axis " + std::to_string(a) + " has fewer than 100 draws");
        const double q01 = quantile(draws[a], 0.01);
        const double q99 = quantile(draws[a], 0.99);
        std::vector<double> axis(G + 1);
        if (q99 == q01) {
            spec.warnings.push_back("axis " + std::to_string(a) + " is degenerate (q01 == q99)");
            std::clog << "warning: " << spec.warnings.back() << '\n';
        }
        for (std::size_t g = 0; g <= G; ++g)
            axis[g] = q01 + static_cast<double>(g) * (q99 - q01) / static_cast<double>(G);
        axis[G] = q99;
        spec.axes.push_back(std::move(axis));
    }
    return spec;
}

GridSpec quantile_grid(const MarkedPointSample& sample, std::size_t G) {
    const std::size_t dim = sample.feature_dim();
    std::vector<std::vector<double>> draws(dim);
    const auto& path = sample.covariate_grid;
    if (path.rows() > 0 && path.dim == dim) {
        for (std::size_t r = 0; r < path.rows(); ++r)
            for (std::size_t a = 0; a < dim; ++a) draws[a].push_back(path.row(r)[a]);
    } else {
        for (const auto& ev : sample.events)
            for (std::size_t a = 0; a < dim; ++a) draws[a].push_back(feature(ev, a));
    }
    return quantile_grid(draws, G);
}

GridErrors grid_errors(const Eigen::MatrixXd& predicted, const Eigen::MatrixXd& truth) {
    if (predicted.rows() != truth.rows() || predicted.cols() != truth.cols())
        throw std::invalid_argument("grid_errors: table shapes differ");
    if (predicted.cols() == 0) throw std::invalid_argument("grid_errors: empty grid");
    const Eigen::ArrayXXd diff = (predicted - truth).array();
    GridErrors e;
    const double n = static_cast<double>(predicted.cols());
    for (Eigen::Index c = 0; c < diff.rows(); ++c) e.eps_l2 += std::sqrt(diff.row(c).square().sum() / n);
    e.eps_linf = diff.abs().maxCoeff();
    return e;
}

Eigen::MatrixXd predicted_on_grid(const est::OneStepLogits& logits, const GridSpec& grid, std::size_t d_x) {
    const Eigen::MatrixXd pts = grid.points();
    const auto dx = static_cast<Eigen::Index>(d_x);
    return exp_of(est::log_probs(logits, pts.topRows(dx), pts.bottomRows(pts.rows() - dx)));
}

Eigen::MatrixXd predicted_on_grid(const est::TwoStepLogits& logits, const GridSpec& grid, std::size_t d_x) {
    const Eigen::MatrixXd pts = grid.points();
    const auto dx = static_cast<Eigen::Index>(d_x);
    return exp_of(est::log_probs(logits, pts.topRows(dx), pts.bottomRows(pts.rows() - dx)));
}

Eigen::MatrixXd truth_on_grid(const sim::GroundTruthModel& truth, const GridSpec& grid) {
    const Eigen::MatrixXd pts = grid.points();
    const std::size_t dx = truth.ou_x.size();
    Eigen::MatrixXd out(truth.n_classes(), pts.cols());
    std::vector<double> col(static_cast<std::size_t>(pts.rows()));
    for (Eigen::Index j = 0; j < pts.cols(); ++j) {
        for (Eigen::Index r = 0; r < pts.rows(); ++r) col[static_cast<std::size_t>(r)] = pts(r, j);
        const std::span<const double> f(col);
        const auto p = sim::true_joint_probability(truth, f.first(dx), f.subspan(dx));
        for (std::size_t c = 0; c < p.size(); ++c) out(static_cast<Eigen::Index>(c), j) = p[c];
    }
    return out;
}

double empirical_risk(const est::OneStepLogits& model, const est::OneStepLogits& truth, const MarkedPointSample& fresh) {
    if (fresh.events.empty()) return 0.0;
    const auto [x, y] = est::event_covariates(fresh);
    const Eigen::MatrixXd lp_hat = est::log_probs(model, x, y);
    const Eigen::MatrixXd lp_true = est::log_probs(truth, x, y);
    require_finite(lp_hat, "empirical_risk");
    double sum = 0.0;
    for (std::size_t n = 0; n < fresh.events.size(); ++n) {
        const auto& ev = fresh.events[n];
        const int c = encode_class(ev.type, ev.mark, fresh.n_marks);
        const auto j = static_cast<Eigen::Index>(n);
        sum += lp_true(c, j) - lp_hat(c, j);
    }
    return sum / fresh.horizon;
}

double empirical_risk_onestep(const est::OneStepModel& model, const sim::GroundTruthModel& truth,
                              const MarkedPointSample& fresh) {
    return empirical_risk(est::logits_of(model), est::truth_onestep_logits(truth), fresh);
}

double TwoStepRisk::total() const {
    double t = type_term;
    for (double m : mark_terms) t += m;
    return t;
}

TwoStepRisk empirical_risk(const est::TwoStepLogits& model, const est::TwoStepLogits& truth,
                           const MarkedPointSample& fresh) {
    TwoStepRisk risk;
    risk.mark_terms.assign(static_cast<std::size_t>(model.n_types), 0.0);
    if (fresh.events.empty()) return risk;
    const auto b = est::build_twostep_batches(fresh);

    const Eigen::MatrixXd tl_hat = est::type_log_probs(model, b.type_batch.features);
    const Eigen::MatrixXd tl_true = est::type_log_probs(truth, b.type_batch.features);
    require_finite(tl_hat, "empirical_risk");
    double sum = 0.0;
    for (std::size_t n = 0; n < b.type_batch.size(); ++n) {
        const auto j = static_cast<Eigen::Index>(n);
        sum += tl_true(b.type_batch.labels[n], j) - tl_hat(b.type_batch.labels[n], j);
    }
    risk.type_term = sum / fresh.horizon;

    for (int i = 0; i < model.n_types; ++i) {
        const auto& mb = b.mark_batches[static_cast<std::size_t>(i)];
        if (mb.size() == 0) continue;
        const Eigen::MatrixXd ml_hat = est::mark_log_probs(model, i, mb.features);
        const Eigen::MatrixXd ml_true = est::mark_log_probs(truth, i, mb.features);
        require_finite(ml_hat, "empirical_risk");
        double s = 0.0;
        for (std::size_t n = 0; n < mb.size(); ++n) {
            const auto j = static_cast<Eigen::Index>(n);
            s += ml_true(mb.labels[n], j) - ml_hat(mb.labels[n], j);
        }
        risk.mark_terms[static_cast<std::size_t>(i)] = s / fresh.horizon;
    }
    return risk;
}

TwoStepRisk empirical_risk_twostep(const est::TwoStepModel& model, const sim::GroundTruthModel& truth,
                                   const MarkedPointSample& fresh) {
    return empirical_risk(est::logits_of(model), est::truth_twostep_logits(truth), fresh);
}

namespace {

template <class Logits>
double nll_rate(const Logits& model, const MarkedPointSample& fresh) {
    const auto [x, y] = est::event_covariates(fresh);
    const Eigen::MatrixXd lp = est::log_probs(model, x, y);
    require_finite(lp, "heldout_nll_rate");
    double sum = 0.0;
    for (std::size_t n = 0; n < fresh.events.size(); ++n) {
        const auto& ev = fresh.events[n];
        sum -= lp(encode_class(ev.type, ev.mark, fresh.n_marks), static_cast<Eigen::Index>(n));
    }
    return sum / fresh.horizon;
}

}  // namespace

double heldout_nll_rate(const est::OneStepLogits& model, const MarkedPointSample& fresh) {
    return nll_rate(model, fresh);
}

double heldout_nll_rate(const est::TwoStepLogits& model, const MarkedPointSample& fresh) {
    return nll_rate(model, fresh);
}

BinnedProbs empirical_binned_probs(const MarkedPointSample& sample, std::size_t axis, std::size_t n_bins,
                                   std::span<const Conditioning> conditioning,
                                   std::optional<std::pair<double, double>> range) {
    if (n_bins < 1) throw std::invalid_argument("empirical_binned_probs: n_bins must be >= 1");
    if (axis >= sample.feature_dim()) throw std::out_of_range("empirical_binned_probs: axis out of range");

    std::vector<const EventRecord*> selected;
    for (const auto& ev : sample.events) {
        bool keep = true;
        for (const auto& c : conditioning)
            if (std::abs(feature(ev, c.axis) - c.value) > 1e-9) keep = false;
        if (keep) selected.push_back(&ev);
    }

    double lo = 0.0;
    double hi = 1.0;
    if (range) {
        std::tie(lo, hi) = *range;
    } else if (!selected.empty()) {
        lo = hi = feature(*selected.front(), axis);
        for (const auto* ev : selected) {
            lo = std::min(lo, feature(*ev, axis));
            hi = std::max(hi, feature(*ev, axis));
        }
    }
    if (!(hi > lo)) hi = lo + 1.0;

    BinnedProbs out;
    for (std::size_t b = 0; b <= n_bins; ++b)
        out.edges.push_back(lo + (hi - lo) * static_cast<double>(b) / static_cast<double>(n_bins));
    out.counts.assign(n_bins, 0);
    std::vector<std::vector<double>> tally(n_bins, std::vector<double>(static_cast<std::size_t>(sample.n_classes()), 0.0));
    for (const auto* ev : selected) {
        const double v = feature(*ev, axis);
        if (v < lo || v > hi) continue;
        auto b = static_cast<std::size_t>((v - lo) / (hi - lo) * static_cast<double>(n_bins));
        b = std::min(b, n_bins - 1);
        ++out.counts[b];
        tally[b][static_cast<std::size_t>(encode_class(ev->type, ev->mark, sample.n_marks))] += 1.0;
    }
    for (std::size_t b = 0; b < n_bins; ++b) {
        if (out.counts[b] == 0) {
            out.freqs.emplace_back(std::nullopt);
            continue;
        }
        for (auto& v : tally[b]) v /= static_cast<double>(out.counts[b]);
        out.freqs.emplace_back(std::move(tally[b]));
    }
    return out;
}

}  // namespace deepratio::metrics
