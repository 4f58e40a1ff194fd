#include "deepratio/sim_core.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "deepratio/rng.hpp"

namespace deepratio::sim {

namespace {

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

void check_type(int type, int n_types) {
    if (type < 0 || type >= n_types) throw std::out_of_range("type index " + std::to_string(type));
}

void check_mark(int mark, int n_marks) {
    if (mark < 0 || mark >= n_marks) throw std::out_of_range("mark index " + std::to_string(mark));
}

std::vector<OUParams> paper_ou_x() { return {{0.1, 0.0, 0.1}, {0.2, 0.0, 0.2}}; }
std::vector<OUParams> paper_ou_y() { return {{0.1, 0.0, 0.1}}; }

}  // namespace

double ou_transition(double state, double dt, const OUParams& p, double gauss) {
    if (!std::isfinite(state) || !std::isfinite(dt) || !std::isfinite(gauss) || !std::isfinite(p.theta) ||
        !std::isfinite(p.xbar) || !std::isfinite(p.sigma))
        throw std::invalid_argument("ou_transition: non-finite input");
    if (dt < 0.0) throw std::invalid_argument("ou_transition: negative dt");
    if (dt == 0.0) return state;
    const double decay = std::exp(-p.theta * dt);
    // (1 - e^{-2 theta dt}) / (2 theta) -> dt as theta -> 0
    const double var_factor = p.theta * dt < 1e-12 ? dt : -std::expm1(-2.0 * p.theta * dt) / (2.0 * p.theta);
    return p.xbar + (state - p.xbar) * decay + p.sigma * std::sqrt(var_factor) * gauss;
}

double ou_stationary_variance(const OUParams& p) { return p.sigma * p.sigma / (2.0 * p.theta); }

double baseline_intensity(double t) { return 1.0 + std::cos(2.0 * std::numbers::pi * t); }

namespace paper {

double intensity(int type, std::span<const double> x) {
    check_type(type, kTypes);
    if (x.size() < 2) throw std::invalid_argument("intensity: expected 2 covariates");
    const double x0 = x[0];
    const double x1 = x[1];
    switch (type) {
        case 0: return 2.0 + std::tanh(x0) * std::exp(-x1 * x1);
        case 1: return 2.0 + std::cos(std::numbers::pi * x0) * std::tanh(x1);
        case 2: return 2.0 + std::sin(2.0 * std::numbers::pi * x0) * logistic(x1);
        default: return 3.0 - std::exp(-x0 * x0);
    }
}

double mark_probability(int type, int mark, std::span<const double> y) {
    check_type(type, kTypes);
    check_mark(mark, kMarks);
    if (y.empty()) throw std::invalid_argument("mark_probability: expected 1 covariate");
    const double y0 = y[0];
    double p0 = 0.0;
    switch (type) {
        case 0: p0 = 0.25; break;
        case 1: p0 = 0.05 + 0.9 * std::abs(std::cos(std::numbers::pi * y0)); break;
        case 2: p0 = logistic(y0); break;
        default: p0 = 0.6 * std::exp(-y0 * y0); break;
    }
    return mark == 0 ? p0 : 1.0 - p0;
}

}  // namespace paper

double true_intensity(int type, std::span<const double> x) { return paper::intensity(type, x); }

double mark_probability(int type, int mark, std::span<const double> y) {
    return paper::mark_probability(type, mark, y);
}

GroundTruthModel paper_model() {
    GroundTruthModel m;
    m.id = "paper";
    m.ou_x = paper_ou_x();
    m.ou_y = paper_ou_y();
    m.baseline = baseline_intensity;
    m.baseline_sup = 2.0;
    m.intensity = paper::intensity;
    m.intensity_sup = {3.0, 3.0, 3.0, 3.0};
    m.mark_probability = paper::mark_probability;
    return m;
}

GroundTruthModel constant_model(double c) {
    if (!(c > 0.0)) throw std::invalid_argument("constant_model: intensity must be positive");
    GroundTruthModel m;
    m.id = "constant";
    m.ou_x = paper_ou_x();
    m.ou_y = paper_ou_y();
    m.baseline = [](double) { return 1.0; };
    m.baseline_sup = 1.0;
    m.intensity = [c](int type, std::span<const double>) {
        check_type(type, 4);
        return c;
    };
    m.intensity_sup = {c, c, c, c};
    m.mark_probability = [](int type, int mark, std::span<const double>) {
        check_type(type, 4);
        check_mark(mark, 2);
        return 0.5;
    };
    return m;
}

GroundTruthModel symmetric_model() {
    GroundTruthModel m = constant_model(2.0);
    m.id = "symmetric";
    m.baseline = baseline_intensity;
    m.baseline_sup = 2.0;
    return m;
}

GroundTruthModel model_by_id(const std::string& id) {
    if (id == "paper") return paper_model();
    if (id == "symmetric") return symmetric_model();
    if (id == "constant") return constant_model(1.0);
    throw std::invalid_argument("unknown model id '" + id + "'");
}

std::vector<double> true_joint_probability(const GroundTruthModel& model, std::span<const double> x,
                                           std::span<const double> y) {
    std::vector<double> p(static_cast<std::size_t>(model.n_classes()));
    double total = 0.0;
    for (int i = 0; i < model.n_types; ++i) {
        const double lam = model.intensity(i, x);
        for (int k = 0; k < model.n_marks; ++k) {
            const double v = lam * model.mark_probability(i, k, y);
            p[static_cast<std::size_t>(encode_class(i, k, model.n_marks))] = v;
            total += v;
        }
    }
    for (auto& v : p) v /= total;
    return p;
}

std::vector<double> joint_log_ratios(const GroundTruthModel& model, std::span<const double> x,
                                     std::span<const double> y) {
    const double ref = std::log(model.intensity(0, x)) + std::log(model.mark_probability(0, 0, y));
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(model.n_classes() - 1));
    for (int c = 1; c < model.n_classes(); ++c) {
        const auto [i, k] = decode_class(c, model.n_marks);
        out.push_back(std::log(model.intensity(i, x)) + std::log(model.mark_probability(i, k, y)) - ref);
    }
    return out;
}

std::vector<double> type_log_ratios(const GroundTruthModel& model, std::span<const double> x) {
    const double ref = std::log(model.intensity(0, x));
    std::vector<double> out;
    for (int i = 1; i < model.n_types; ++i) out.push_back(std::log(model.intensity(i, x)) - ref);
    return out;
}

std::vector<double> mark_log_ratios(const GroundTruthModel& model, int type, std::span<const double> y) {
    const double ref = std::log(model.mark_probability(type, 0, y));
    std::vector<double> out;
    for (int k = 1; k < model.n_marks; ++k) out.push_back(std::log(model.mark_probability(type, k, y)) - ref);
    return out;
}

double dominating_bound(const GroundTruthModel& model) {
    double sum = 0.0;
    for (double s : model.intensity_sup) sum += s;
    return model.baseline_sup * sum;
}

MarkedPointSample simulate(const GroundTruthModel& model, double horizon, std::uint64_t seed, double grid_step) {
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw std::invalid_argument("simulate: horizon must be > 0");
    const double bound = dominating_bound(model);
    if (!(bound > 0.0)) throw std::invalid_argument("simulate: dominating bound must be positive");

    Rng rng(seed, stream::kSimulation);
    const std::size_t dx = model.ou_x.size();
    const std::size_t dy = model.ou_y.size();

    std::vector<double> x(dx);
    std::vector<double> y(dy);
    for (std::size_t j = 0; j < dx; ++j)
        x[j] = model.ou_x[j].xbar + std::sqrt(ou_stationary_variance(model.ou_x[j])) * rng.gaussian();
    for (std::size_t j = 0; j < dy; ++j)
        y[j] = model.ou_y[j].xbar + std::sqrt(ou_stationary_variance(model.ou_y[j])) * rng.gaussian();

    auto advance = [&](double dt) {
        for (std::size_t j = 0; j < dx; ++j) x[j] = ou_transition(x[j], dt, model.ou_x[j], rng.gaussian());
        for (std::size_t j = 0; j < dy; ++j) y[j] = ou_transition(y[j], dt, model.ou_y[j], rng.gaussian());
    };

    MarkedPointSample out;
    out.source = model.id;
    out.horizon = horizon;
    out.seed = seed;
    out.n_types = model.n_types;
    out.n_marks = model.n_marks;
    out.d_x = dx;
    out.d_y = dy;
    out.covariate_grid.step = grid_step;
    out.covariate_grid.dim = dx + dy;
    out.events.reserve(static_cast<std::size_t>(horizon * bound * 0.5));

    auto snapshot = [&] {
        auto& v = out.covariate_grid.values;
        v.insert(v.end(), x.begin(), x.end());
        v.insert(v.end(), y.begin(), y.end());
    };

    double now = 0.0;
    std::size_t next_grid = 0;
    const bool use_grid = grid_step > 0.0;
    if (use_grid) {
        snapshot();
        next_grid = 1;
    }

    std::vector<double> lambdas(static_cast<std::size_t>(model.n_types));
    while (true) {
        const double candidate = now + rng.exponential(bound);
        if (use_grid) {
            while (true) {
                const double tg = static_cast<double>(next_grid) * grid_step;
                if (tg > candidate || tg > horizon) break;
                advance(tg - now);
                now = tg;
                snapshot();
                ++next_grid;
            }
        }
        if (candidate > horizon) break;
        advance(candidate - now);
        now = candidate;

        double total = 0.0;
        for (int i = 0; i < model.n_types; ++i) {
            lambdas[static_cast<std::size_t>(i)] = model.intensity(i, x);
            total += lambdas[static_cast<std::size_t>(i)];
        }
        const double rate = model.baseline(now) * total;
        const double accept = rate / bound;
        if (!(accept <= 1.0 + 1e-12) || !(accept >= 0.0))
            throw std::runtime_error("simulate: thinning acceptance ratio " + std::to_string(accept) +
                                     " outside [0,1] at t=" + std::to_string(now));
        if (rng.uniform() >= accept) continue;

        double u = rng.uniform() * total;
        int type = model.n_types - 1;
        for (int i = 0; i < model.n_types; ++i) {
            u -= lambdas[static_cast<std::size_t>(i)];
            if (u < 0.0) {
                type = i;
                break;
            }
        }
        double v = rng.uniform();
        int mark = model.n_marks - 1;
        for (int k = 0; k < model.n_marks; ++k) {
            v -= model.mark_probability(type, k, y);
            if (v < 0.0) {
                mark = k;
                break;
            }
        }
        out.events.push_back(EventRecord{now, type, mark, x, y});
    }
    return out;
}

}  // namespace deepratio::sim
