#include "deepratio/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <iostream>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "deepratio/sample_io.hpp"
#include "text_util.hpp"

namespace deepratio::harness {

namespace {

using nlohmann::json;
using detail::fmt17;

json train_to_json(const est::TrainConfig& t) {
    return {{"batch_size", t.batch_size}, {"max_epochs", t.max_epochs}, {"validation_fraction", t.validation_fraction},
            {"patience", t.patience},     {"lr", t.adam.lr},            {"beta1", t.adam.beta1},
            {"beta2", t.adam.beta2},      {"eps", t.adam.eps},          {"workers", t.workers}};
}

est::TrainConfig train_from_json(const json& j, est::TrainConfig t) {
    t.batch_size = j.value("batch_size", t.batch_size);
    t.max_epochs = j.value("max_epochs", t.max_epochs);
    t.validation_fraction = j.value("validation_fraction", t.validation_fraction);
    t.patience = j.value("patience", t.patience);
    t.adam.lr = j.value("lr", t.adam.lr);
    t.adam.beta1 = j.value("beta1", t.adam.beta1);
    t.adam.beta2 = j.value("beta2", t.adam.beta2);
    t.adam.eps = j.value("eps", t.adam.eps);
    t.workers = j.value("workers", t.workers);
    return t;
}

json config_body(const ExperimentConfig& c) {
    std::vector<std::string> methods;
    for (int m : c.methods) methods.emplace_back(method_name(m));
    return {{"kind", c.kind},
            {"model", c.model},
            {"horizons", c.horizons},
            {"replications", c.replications},
            {"methods", methods},
            {"n_layers", c.n_layers},
            {"width", c.width},
            {"n_layers_list", c.n_layers_list},
            {"widths_list", c.widths_list},
            {"activate_last_hidden", c.activate_last_hidden},
            {"train", train_to_json(c.train)},
            {"grid_size", c.grid_size},
            {"base_seed", c.base_seed},
            {"workers", c.workers},
            {"write_artifacts", c.write_artifacts},
            {"max_failure_fraction", c.max_failure_fraction}};
}

std::string row_key_dir(const ErrorReport& r) {
    return std::string(method_name(r.method)) + "_T" + std::to_string(static_cast<long long>(r.horizon)) + "_s" +
           std::to_string(r.seed) + "_L" + std::to_string(r.n_layers) + "_N" + std::to_string(r.width);
}

bool row_less(const ErrorReport& a, const ErrorReport& b) {
    return std::tie(a.method, a.horizon, a.seed, a.n_layers, a.width) <
           std::tie(b.method, b.horizon, b.seed, b.n_layers, b.width);
}

net::NetConfig shaped(net::NetConfig c, const ExperimentConfig& cfg) {
    c.activate_last_hidden = cfg.activate_last_hidden;
    return c;
}

void write_config(const ExperimentConfig& c) {
    std::filesystem::create_directories(c.out_dir);
    json j = config_body(c);
    j["config_hash"] = c.hash();
    auto os = detail::open_out((c.out_dir / "config.json").string());
    os << j.dump(2) << '\n';
}

}  // namespace

const char* method_name(int method) {
    switch (method) {
        case kOneStep: return "one-step";
        case kTwoStep: return "two-step";
        default: throw std::invalid_argument("unknown method id " + std::to_string(method));
    }
}

int method_from_name(const std::string& name) {
    if (name == "one-step" || name == "1" || name == "onestep") return kOneStep;
    if (name == "two-step" || name == "2" || name == "twostep") return kTwoStep;
    throw std::invalid_argument("unknown method '" + name + "'");
}

void ExperimentConfig::validate() const {
    if (horizons.empty()) throw std::invalid_argument("config: no horizons");
    for (double h : horizons)
        if (!(h > 0.0)) throw std::invalid_argument("config: horizons must be positive");
    if (replications < 1) throw std::invalid_argument("config: replications must be >= 1");
    if (methods.empty()) throw std::invalid_argument("config: no methods");
    for (int m : methods) method_name(m);
    if (grid_size < 1) throw std::invalid_argument("config: grid_size must be >= 1");
    if (workers < 1) throw std::invalid_argument("config: workers must be >= 1");
    if (!(max_failure_fraction >= 0.0 && max_failure_fraction <= 1.0))
        throw std::invalid_argument("config: max_failure_fraction must lie in [0,1]");
    train.validate();
    sim::model_by_id(model);
}

std::string ExperimentConfig::to_json() const {
    json j = config_body(*this);
    j["out_dir"] = out_dir.string();
    return j.dump(2);
}

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
    const json j = json::parse(text);
    ExperimentConfig c;
    c.kind = j.value("kind", c.kind);
    c.model = j.value("model", c.model);
    c.horizons = j.value("horizons", c.horizons);
    c.replications = j.value("replications", c.replications);
    if (j.contains("methods")) {
        c.methods.clear();
        for (const auto& m : j.at("methods")) c.methods.push_back(method_from_name(m.is_string() ? m.get<std::string>() : std::to_string(m.get<int>())));
    }
    c.n_layers = j.value("n_layers", c.n_layers);
    c.width = j.value("width", c.width);
    c.n_layers_list = j.value("n_layers_list", c.n_layers_list);
    c.widths_list = j.value("widths_list", c.widths_list);
    c.activate_last_hidden = j.value("activate_last_hidden", c.activate_last_hidden);
    if (j.contains("train")) c.train = train_from_json(j.at("train"), c.train);
    c.grid_size = j.value("grid_size", c.grid_size);
    c.out_dir = j.value("out_dir", c.out_dir.string());
    c.base_seed = j.value("base_seed", c.base_seed);
    c.workers = j.value("workers", c.workers);
    c.write_artifacts = j.value("write_artifacts", c.write_artifacts);
    c.max_failure_fraction = j.value("max_failure_fraction", c.max_failure_fraction);
    c.validate();
    return c;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
    auto is = detail::open_in(path.string());
    const std::string text((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    return from_json(text);
}

std::string ExperimentConfig::hash() const {
    auto body = config_body(*this);
    body.erase("workers");  // results do not depend on the pool size
    const std::string text = body.dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

LinearFit ols(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("ols: need >= 2 paired points");
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (!(sxx > 0.0)) throw std::invalid_argument("ols: regressor has no spread");
    LinearFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    if (x.size() > 2) {
        double ssr = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double r = y[i] - f.intercept - f.slope * x[i];
            ssr += r * r;
        }
        f.slope_stderr = std::sqrt(ssr / (n - 2.0) / sxx);
    }
    return f;
}

std::vector<Aggregate> aggregate(const std::vector<ErrorReport>& rows) {
    std::vector<ErrorReport> sorted = rows;
    std::sort(sorted.begin(), sorted.end(), row_less);
    std::vector<Aggregate> out;
    for (const auto& r : sorted) {
        if (out.empty() || out.back().method != r.method || out.back().horizon != r.horizon ||
            out.back().n_layers != r.n_layers || out.back().width != r.width) {
            out.push_back(Aggregate{r.method, r.horizon, r.n_layers, r.width, 0, 0.0, 0.0, 0.0});
        }
        auto& a = out.back();
        ++a.n;
        a.mean_eps_l2 += r.eps_l2;
        a.mean_eps_linf += r.eps_linf;
        a.mean_risk += r.risk;
    }
    // rows are grouped but not contiguous in shape order; merge duplicates
    std::sort(out.begin(), out.end(), [](const Aggregate& a, const Aggregate& b) {
        return std::tie(a.method, a.horizon, a.n_layers, a.width) < std::tie(b.method, b.horizon, b.n_layers, b.width);
    });
    std::vector<Aggregate> merged;
    for (const auto& a : out) {
        if (!merged.empty() && merged.back().method == a.method && merged.back().horizon == a.horizon &&
            merged.back().n_layers == a.n_layers && merged.back().width == a.width) {
            auto& m = merged.back();
            m.n += a.n;
            m.mean_eps_l2 += a.mean_eps_l2;
            m.mean_eps_linf += a.mean_eps_linf;
            m.mean_risk += a.mean_risk;
        } else {
            merged.push_back(a);
        }
    }
    for (auto& a : merged) {
        const double n = static_cast<double>(a.n);
        a.mean_eps_l2 /= n;
        a.mean_eps_linf /= n;
        a.mean_risk /= n;
    }
    return merged;
}

std::vector<SlopeRecord> convergence_slopes(const std::vector<Aggregate>& aggregates) {
    std::vector<SlopeRecord> out;
    std::vector<int> methods;
    for (const auto& a : aggregates)
        if (std::find(methods.begin(), methods.end(), a.method) == methods.end()) methods.push_back(a.method);
    for (int m : methods) {
        std::vector<double> lt, l2, linf, risk;
        for (const auto& a : aggregates) {
            if (a.method != m) continue;
            lt.push_back(std::log(a.horizon));
            l2.push_back(std::log(a.mean_eps_l2));
            linf.push_back(std::log(a.mean_eps_linf));
            risk.push_back(std::log(a.mean_risk));
        }
        if (lt.size() < 2) continue;
        out.push_back({m, "eps_l2", ols(lt, l2)});
        out.push_back({m, "eps_linf", ols(lt, linf)});
        // a non-positive mean risk has no logarithm
        if (std::all_of(risk.begin(), risk.end(), [](double v) { return std::isfinite(v); }))
            out.push_back({m, "risk", ols(lt, risk)});
        else
            out.push_back({m, "risk", LinearFit{std::nan(""), std::nan(""), std::nan("")}});
    }
    return out;
}

ErrorReport run_task(const ExperimentConfig& config, const FitTask& task) {
    const auto start = std::chrono::steady_clock::now();
    const auto truth = sim::model_by_id(config.model);
    const auto sample = sim::simulate(truth, task.horizon, task.seed);
    const auto fresh = sim::simulate(truth, task.horizon, task.seed + kEvaluationSeedOffset, 0.0);
    const auto grid = metrics::quantile_grid(sample, config.grid_size);
    const Eigen::MatrixXd p_true = metrics::truth_on_grid(truth, grid);

    est::TrainConfig train = config.train;
    train.seed = task.seed;

    ErrorReport r;
    r.method = task.method;
    r.horizon = task.horizon;
    r.seed = task.seed;
    r.n_layers = task.n_layers;
    r.width = task.width;

    metrics::GridErrors errs;
    if (task.method == kOneStep) {
        const auto shape = shaped(est::onestep_shape(sample, task.n_layers, task.width), config);
        const auto model = est::train_onestep(sample, shape, train);
        const auto logits = est::logits_of(model);
        errs = metrics::grid_errors(metrics::predicted_on_grid(logits, grid, sample.d_x), p_true);
        r.risk = metrics::empirical_risk(logits, est::truth_onestep_logits(truth), fresh);
        if (config.write_artifacts) est::save_bundle(model, config.out_dir / "fits" / row_key_dir(r));
    } else {
        auto shapes = est::twostep_shapes(sample, task.n_layers, task.width);
        shapes.type_net = shaped(shapes.type_net, config);
        shapes.mark_net = shaped(shapes.mark_net, config);
        const auto model = est::train_twostep(sample, shapes, train);
        const auto logits = est::logits_of(model);
        errs = metrics::grid_errors(metrics::predicted_on_grid(logits, grid, sample.d_x), p_true);
        r.risk = metrics::empirical_risk(logits, est::truth_twostep_logits(truth), fresh).total();
        if (config.write_artifacts) est::save_bundle(model, config.out_dir / "fits" / row_key_dir(r));
    }
    r.eps_l2 = errs.eps_l2;
    r.eps_linf = errs.eps_linf;
    r.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
}

StudyResult run_tasks(const ExperimentConfig& config, const std::vector<FitTask>& tasks) {
    std::vector<std::optional<ErrorReport>> slots(tasks.size());
    std::vector<std::string> errors(tasks.size());
    std::atomic<std::size_t> next{0};
    std::mutex log_mutex;

    auto worker = [&] {
        while (true) {
            const std::size_t t = next.fetch_add(1);
            if (t >= tasks.size()) return;
            try {
                slots[t] = run_task(config, tasks[t]);
                std::lock_guard lock(log_mutex);
                std::clog << "[" << method_name(tasks[t].method) << " T=" << tasks[t].horizon << " seed=" << tasks[t].seed
                          << " L=" << tasks[t].n_layers << " N=" << tasks[t].width << "] eps_l2=" << slots[t]->eps_l2
                          << " eps_linf=" << slots[t]->eps_linf << " risk=" << slots[t]->risk << " ("
                          << slots[t]->wall_s << " s)\n";
            } catch (const std::exception& e) {
                errors[t] = e.what();
            }
        }
    };
    const std::size_t n_threads = std::max<std::size_t>(1, std::min(config.workers, tasks.size()));
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < n_threads; ++w) pool.emplace_back(worker);
    }

    StudyResult result;
    result.tasks = tasks.size();
    for (std::size_t t = 0; t < tasks.size(); ++t) {
        if (slots[t]) {
            result.rows.push_back(*slots[t]);
        } else {
            result.failures.push_back(std::string(method_name(tasks[t].method)) + " T=" +
                                      std::to_string(tasks[t].horizon) + " seed=" + std::to_string(tasks[t].seed) +
                                      ": " + errors[t]);
            std::clog << "task failed: " << result.failures.back() << '\n';
        }
    }
    std::sort(result.rows.begin(), result.rows.end(), row_less);
    if (static_cast<double>(result.failures.size()) > config.max_failure_fraction * static_cast<double>(tasks.size()))
        throw std::runtime_error(std::to_string(result.failures.size()) + " of " + std::to_string(tasks.size()) +
                                 " fits failed; first: " + result.failures.front());
    result.aggregates = aggregate(result.rows);
    return result;
}

StudyResult run_convergence_study(const ExperimentConfig& config) {
    config.validate();
    if (config.horizons.size() < 3) throw std::invalid_argument("convergence study needs at least 3 horizons");
    std::vector<FitTask> tasks;
    // longest horizons first keeps the pool busy until the end
    std::vector<double> horizons = config.horizons;
    std::sort(horizons.rbegin(), horizons.rend());
    for (double T : horizons)
        for (std::size_t r = 0; r < config.replications; ++r)
            for (int m : config.methods) tasks.push_back({m, T, config.base_seed + r, config.n_layers, config.width});

    auto result = run_tasks(config, tasks);
    result.slopes = convergence_slopes(result.aggregates);

    write_config(config);
    write_results_csv(result.rows, config.out_dir / "results.csv");
    write_aggregate_csv(result.aggregates, config.out_dir / "aggregate.csv");
    write_slopes_json(result.slopes, config.hash(), config.out_dir / "slopes.json");
    return result;
}

StudyResult run_robustness_grid(const ExperimentConfig& config) {
    config.validate();
    if (config.n_layers_list.empty() || config.widths_list.empty())
        throw std::invalid_argument("robustness grid needs nonempty shape lists");
    const double T = config.horizons.front();
    std::vector<FitTask> tasks;
    for (std::size_t nl : config.n_layers_list)
        for (std::size_t nn : config.widths_list)
            for (std::size_t r = 0; r < config.replications; ++r)
                for (int m : config.methods) tasks.push_back({m, T, config.base_seed + r, nl, nn});

    auto result = run_tasks(config, tasks);
    write_config(config);
    write_results_csv(result.rows, config.out_dir / "results.csv");
    write_aggregate_csv(result.aggregates, config.out_dir / "aggregate.csv");
    write_heatmaps(result.aggregates, config.out_dir);
    return result;
}

void write_results_csv(const std::vector<ErrorReport>& rows, const std::filesystem::path& path) {
    auto os = detail::open_out(path.string());
    os << "method,T,seed,nL,nN,eps_l2,eps_linf,risk,wall_s\n";
    for (const auto& r : rows)
        os << r.method << ',' << fmt17(r.horizon) << ',' << r.seed << ',' << r.n_layers << ',' << r.width << ','
           << fmt17(r.eps_l2) << ',' << fmt17(r.eps_linf) << ',' << fmt17(r.risk) << ',' << fmt17(r.wall_s) << '\n';
}

void write_aggregate_csv(const std::vector<Aggregate>& aggregates, const std::filesystem::path& path) {
    auto os = detail::open_out(path.string());
    os << "method,T,nL,nN,n,mean_eps_l2,mean_eps_linf,mean_risk\n";
    for (const auto& a : aggregates)
        os << a.method << ',' << fmt17(a.horizon) << ',' << a.n_layers << ',' << a.width << ',' << a.n << ','
           << fmt17(a.mean_eps_l2) << ',' << fmt17(a.mean_eps_linf) << ',' << fmt17(a.mean_risk) << '\n';
}

void write_slopes_json(const std::vector<SlopeRecord>& slopes, const std::string& config_hash,
                       const std::filesystem::path& path) {
    json arr = json::array();
    for (const auto& s : slopes) {
        auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
        arr.push_back({{"method", s.method},
                       {"measure", s.measure},
                       {"slope", num(s.fit.slope)},
                       {"stderr", num(s.fit.slope_stderr)},
                       {"intercept", num(s.fit.intercept)}});
    }
    auto os = detail::open_out(path.string());
    os << json{{"config_hash", config_hash}, {"regression", "log(mean measure) ~ log(T)"}, {"slopes", arr}}.dump(2)
       << '\n';
}

std::vector<std::filesystem::path> write_heatmaps(const std::vector<Aggregate>& aggregates,
                                                  const std::filesystem::path& dir) {
    std::vector<std::filesystem::path> written;
    std::vector<int> methods;
    std::vector<std::size_t> layers, widths;
    for (const auto& a : aggregates) {
        if (std::find(methods.begin(), methods.end(), a.method) == methods.end()) methods.push_back(a.method);
        if (std::find(layers.begin(), layers.end(), a.n_layers) == layers.end()) layers.push_back(a.n_layers);
        if (std::find(widths.begin(), widths.end(), a.width) == widths.end()) widths.push_back(a.width);
    }
    std::sort(methods.begin(), methods.end());
    std::sort(layers.begin(), layers.end());
    std::sort(widths.begin(), widths.end());
    const std::pair<const char*, double Aggregate::*> measures[] = {
        {"eps_l2", &Aggregate::mean_eps_l2}, {"eps_linf", &Aggregate::mean_eps_linf}, {"risk", &Aggregate::mean_risk}};
    for (const auto& [name, field] : measures) {
        for (int m : methods) {
            const auto path = dir / ("heatmap_" + std::string(name) + "_m" + std::to_string(m) + ".csv");
            auto os = detail::open_out(path.string());
            os << "nL";
            for (auto w : widths) os << ',' << w;
            os << '\n';
            for (auto l : layers) {
                os << l;
                for (auto w : widths) {
                    os << ',';
                    for (const auto& a : aggregates)
                        if (a.method == m && a.n_layers == l && a.width == w) os << fmt17(a.*field);
                }
                os << '\n';
            }
            written.push_back(path);
        }
    }
    return written;
}

// ---------------------------------------------------------------------------
// Single fit with figure tables

namespace {

std::string class_tag(int cls, int n_marks) {
    const auto [i, k] = decode_class(cls, n_marks);
    return std::to_string(i) + std::to_string(k);
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
    std::vector<double> v(n);
    for (std::size_t j = 0; j < n; ++j) v[j] = lo + (hi - lo) * static_cast<double>(j) / static_cast<double>(n - 1);
    return v;
}

std::vector<double> path_axis(const MarkedPointSample& s, std::size_t axis) {
    std::vector<double> v;
    const auto& g = s.covariate_grid;
    if (g.rows() > 0) {
        for (std::size_t r = 0; r < g.rows(); ++r) v.push_back(g.row(r)[axis]);
    } else {
        for (const auto& ev : s.events) v.push_back(axis < ev.x.size() ? ev.x[axis] : ev.y[axis - ev.x.size()]);
    }
    return v;
}

}  // namespace

SingleFitResult run_single_fit(const ExperimentConfig& config) {
    config.validate();
    const auto truth = sim::model_by_id(config.model);
    if (truth.ou_x.size() != 2 || truth.ou_y.size() != 1)
        throw std::invalid_argument("run_single_fit: panel tables need d_x = 2 and d_y = 1");
    const double T = config.horizons.front();
    const std::uint64_t seed = config.base_seed;
    const auto sample = sim::simulate(truth, T, seed);
    const auto fresh = sim::simulate(truth, T, seed + kEvaluationSeedOffset, 0.0);
    const auto grid = metrics::quantile_grid(sample, config.grid_size);
    const Eigen::MatrixXd p_true_grid = metrics::truth_on_grid(truth, grid);

    est::TrainConfig train = config.train;
    train.seed = seed;
    SingleFitResult out;
    out.onestep = est::train_onestep(sample, shaped(est::onestep_shape(sample, config.n_layers, config.width), config), train);
    auto shapes = est::twostep_shapes(sample, config.n_layers, config.width);
    shapes.type_net = shaped(shapes.type_net, config);
    shapes.mark_net = shaped(shapes.mark_net, config);
    out.twostep = est::train_twostep(sample, shapes, train);

    const auto l1 = est::logits_of(out.onestep);
    const auto l2 = est::logits_of(out.twostep);
    const auto t1 = est::truth_onestep_logits(truth);
    const auto t2 = est::truth_twostep_logits(truth);

    for (int m : {kOneStep, kTwoStep}) {
        ErrorReport r{m, T, seed, config.n_layers, config.width, 0, 0, 0, 0};
        const auto errs = m == kOneStep ? metrics::grid_errors(metrics::predicted_on_grid(l1, grid, 2), p_true_grid)
                                        : metrics::grid_errors(metrics::predicted_on_grid(l2, grid, 2), p_true_grid);
        r.eps_l2 = errs.eps_l2;
        r.eps_linf = errs.eps_linf;
        r.risk = m == kOneStep ? metrics::empirical_risk(l1, t1, fresh) : metrics::empirical_risk(l2, t2, fresh).total();
        out.reports.push_back(r);
    }

    const auto& dir = config.out_dir;
    std::filesystem::create_directories(dir);
    write_config(config);
    est::save_bundle(out.onestep, dir / "onestep");
    est::save_bundle(out.twostep, dir / "twostep");
    write_results_csv(out.reports, dir / "results.csv");
    out.written.push_back(dir / "results.csv");

    const auto x0_path = path_axis(sample, 0);
    const auto x1_path = path_axis(sample, 1);
    const auto y_path = path_axis(sample, 2);
    const auto x0s = linspace(metrics::quantile(x0_path, 0.01), metrics::quantile(x0_path, 0.99), kCurvePoints);
    const auto ys = linspace(metrics::quantile(y_path, 0.01), metrics::quantile(y_path, 0.99), kCurvePoints);
    const int nc = truth.n_classes();

    // panel points: (alpha, beta, x0) with x1 = q_X1(alpha), y = q_Y(beta)
    const std::size_t n_panel_pts = 16 * kCurvePoints;
    Eigen::MatrixXd px(2, static_cast<Eigen::Index>(n_panel_pts));
    Eigen::MatrixXd py(1, static_cast<Eigen::Index>(n_panel_pts));
    std::vector<std::pair<double, double>> panel_ab;
    {
        Eigen::Index col = 0;
        for (double a : kPanelQuantiles) {
            const double qx1 = metrics::quantile(x1_path, a);
            for (double b : kPanelQuantiles) {
                const double qy = metrics::quantile(y_path, b);
                for (double x0 : x0s) {
                    px(0, col) = x0;
                    px(1, col) = qx1;
                    py(0, col) = qy;
                    panel_ab.emplace_back(a, b);
                    ++col;
                }
            }
        }
    }

    {
        Eigen::MatrixXd in(3, px.cols());
        in.topRows(2) = px;
        in.bottomRows(1) = py;
        const Eigen::MatrixXd lhat = l1.joint(in);
        const Eigen::MatrixXd ltrue = t1.joint(in);
        const auto path = dir / "functions_onestep.csv";
        auto os = detail::open_out(path.string());
        os << "alpha,beta,x0,x1,y";
        for (int c = 1; c < nc; ++c) os << ",lhat_" << class_tag(c, 2);
        for (int c = 1; c < nc; ++c) os << ",ltrue_" << class_tag(c, 2);
        os << '\n';
        for (Eigen::Index j = 0; j < in.cols(); ++j) {
            os << fmt17(panel_ab[static_cast<std::size_t>(j)].first) << ',' << fmt17(panel_ab[static_cast<std::size_t>(j)].second)
               << ',' << fmt17(in(0, j)) << ',' << fmt17(in(1, j)) << ',' << fmt17(in(2, j));
            for (Eigen::Index c = 0; c < lhat.rows(); ++c) os << ',' << fmt17(lhat(c, j));
            for (Eigen::Index c = 0; c < ltrue.rows(); ++c) os << ',' << fmt17(ltrue(c, j));
            os << '\n';
        }
        out.written.push_back(path);
    }

    auto write_probs = [&](const std::string& name, const Eigen::MatrixXd& phat) {
        const auto path = dir / name;
        auto os = detail::open_out(path.string());
        os << "alpha,beta,x0,x1,y";
        for (int c = 0; c < nc; ++c) os << ",phat_" << class_tag(c, 2);
        for (int c = 0; c < nc; ++c) os << ",ptrue_" << class_tag(c, 2);
        os << '\n';
        for (Eigen::Index j = 0; j < px.cols(); ++j) {
            const double xv[2] = {px(0, j), px(1, j)};
            const double yv[1] = {py(0, j)};
            const auto ptrue = sim::true_joint_probability(truth, xv, yv);
            os << fmt17(panel_ab[static_cast<std::size_t>(j)].first) << ',' << fmt17(panel_ab[static_cast<std::size_t>(j)].second)
               << ',' << fmt17(xv[0]) << ',' << fmt17(xv[1]) << ',' << fmt17(yv[0]);
            for (Eigen::Index c = 0; c < phat.rows(); ++c) os << ',' << fmt17(phat(c, j));
            for (double v : ptrue) os << ',' << fmt17(v);
            os << '\n';
        }
        out.written.push_back(path);
    };
    write_probs("probabilities_onestep.csv", est::log_probs(l1, px, py).array().exp().matrix());
    write_probs("probabilities_twostep.csv", est::log_probs(l2, px, py).array().exp().matrix());

    {
        // type ratios: panels over alpha only
        Eigen::MatrixXd tx(2, static_cast<Eigen::Index>(4 * kCurvePoints));
        std::vector<double> alphas;
        Eigen::Index col = 0;
        for (double a : kPanelQuantiles) {
            const double qx1 = metrics::quantile(x1_path, a);
            for (double x0 : x0s) {
                tx(0, col) = x0;
                tx(1, col) = qx1;
                alphas.push_back(a);
                ++col;
            }
        }
        const Eigen::MatrixXd lhat = l2.type(tx);
        const Eigen::MatrixXd ltrue = t2.type(tx);
        const auto path = dir / "functions_twostep_type.csv";
        auto os = detail::open_out(path.string());
        os << "alpha,x0,x1";
        for (int i = 1; i < truth.n_types; ++i) os << ",lhat_" << i;
        for (int i = 1; i < truth.n_types; ++i) os << ",ltrue_" << i;
        os << '\n';
        for (Eigen::Index j = 0; j < tx.cols(); ++j) {
            os << fmt17(alphas[static_cast<std::size_t>(j)]) << ',' << fmt17(tx(0, j)) << ',' << fmt17(tx(1, j));
            for (Eigen::Index c = 0; c < lhat.rows(); ++c) os << ',' << fmt17(lhat(c, j));
            for (Eigen::Index c = 0; c < ltrue.rows(); ++c) os << ',' << fmt17(ltrue(c, j));
            os << '\n';
        }
        out.written.push_back(path);
    }
    {
        Eigen::MatrixXd ym(1, static_cast<Eigen::Index>(kCurvePoints));
        for (std::size_t j = 0; j < kCurvePoints; ++j) ym(0, static_cast<Eigen::Index>(j)) = ys[j];
        std::vector<Eigen::MatrixXd> lhat, ltrue;
        for (int i = 0; i < truth.n_types; ++i) {
            lhat.push_back(l2.marks[static_cast<std::size_t>(i)](ym));
            ltrue.push_back(t2.marks[static_cast<std::size_t>(i)](ym));
        }
        const auto path = dir / "functions_twostep_mark.csv";
        auto os = detail::open_out(path.string());
        os << "y";
        for (int i = 0; i < truth.n_types; ++i) os << ",lhat_" << i << "1";
        for (int i = 0; i < truth.n_types; ++i) os << ",ltrue_" << i << "1";
        os << '\n';
        for (Eigen::Index j = 0; j < ym.cols(); ++j) {
            os << fmt17(ym(0, j));
            for (const auto& m : lhat) os << ',' << fmt17(m(0, j));
            for (const auto& m : ltrue) os << ',' << fmt17(m(0, j));
            os << '\n';
        }
        out.written.push_back(path);
    }
    return out;
}

// ---------------------------------------------------------------------------
// LOB

namespace {

template <class Logits>
std::vector<std::array<double, 7>> curves_impl(const Logits& logits) {
    constexpr double signs[2] = {-1.0, 1.0};
    constexpr double spreads[3] = {1.0, 2.0, 3.0};
    const auto x0s = linspace(-1.0, 1.0, kCurvePoints);
    Eigen::MatrixXd x(3, static_cast<Eigen::Index>(6 * kCurvePoints));
    Eigen::Index col = 0;
    for (double s : signs)
        for (double sp : spreads)
            for (double x0 : x0s) {
                x(0, col) = x0;
                x(1, col) = s;
                x(2, col) = sp;
                ++col;
            }
    const Eigen::MatrixXd p = est::log_probs(logits, x, Eigen::MatrixXd(0, x.cols())).array().exp().matrix();
    std::vector<std::array<double, 7>> rows;
    for (Eigen::Index j = 0; j < x.cols(); ++j)
        rows.push_back({x(1, j), x(2, j), x(0, j), p(0, j), p(1, j), p(2, j), p(3, j)});
    return rows;
}

}  // namespace

std::vector<std::array<double, 7>> lob_curves(const est::OneStepLogits& logits) { return curves_impl(logits); }
std::vector<std::array<double, 7>> lob_curves(const est::TwoStepLogits& logits) { return curves_impl(logits); }

LobFitResult run_lob_fit(const LobFitOptions& options) {
    if (options.inputs.empty()) throw std::invalid_argument("lob-fit: no input files");
    std::vector<lob::Session> sessions;
    for (const auto& path : options.inputs) {
        lob::Session s;
        s.events = lob::read_lob_csv(path);
        if (s.events.empty()) continue;
        s.covariates = lob::compute_covariates(s.events, options.tick_size);
        sessions.push_back(std::move(s));
    }
    return run_lob_fit(std::move(sessions), options);
}

LobFitResult run_lob_fit(std::vector<lob::Session> sessions, const LobFitOptions& options) {
    LobFitResult result;
    for (auto& s : sessions) {
        if (s.covariates.records.empty() && !s.events.empty())
            s.covariates = lob::compute_covariates(s.events, options.tick_size);
        result.rejected += s.covariates.rejected;
    }
    result.sample = lob::to_marked_sample(sessions, lob::SeededPolicy::drop);
    if (result.sample.events.empty()) throw std::invalid_argument("lob-fit: no usable events");

    const auto& dir = options.out_dir;
    std::filesystem::create_directories(dir);
    auto curves_os = detail::open_out((dir / "lob_curves.csv").string());
    curves_os << "method,x1,x2,x0,p00,p01,p10,p11\n";
    auto emit = [&](int method, const std::vector<std::array<double, 7>>& rows) {
        for (const auto& r : rows) {
            curves_os << method;
            for (double v : r) curves_os << ',' << fmt17(v);
            curves_os << '\n';
        }
    };

    json summary{{"n_events", result.sample.events.size()}, {"rejected", result.rejected},
                 {"horizon_s", result.sample.horizon}, {"sessions", sessions.size()}};
    for (int m : options.methods) {
        if (m == kOneStep) {
            auto model = est::train_onestep(result.sample, est::onestep_shape(result.sample, options.n_layers, options.width),
                                            options.train);
            emit(m, lob_curves(est::logits_of(model)));
            est::save_bundle(model, dir / "onestep");
            summary["nll_one_step"] = est::sample_nll(model, result.sample);
            result.onestep.push_back(std::move(model));
        } else {
            auto model = est::train_twostep(result.sample,
                                            est::twostep_shapes(result.sample, options.n_layers, options.width), options.train);
            emit(m, lob_curves(est::logits_of(model)));
            est::save_bundle(model, dir / "twostep");
            summary["nll_two_step"] = est::sample_nll(model, result.sample);
            result.twostep.push_back(std::move(model));
        }
    }

    auto emp_os = detail::open_out((dir / "lob_empirical.csv").string());
    emp_os << "x1,x2,bin,bin_lo,bin_hi,x0,count,p00,p01,p10,p11\n";
    for (double s : {-1.0, 1.0}) {
        for (double sp : {1.0, 2.0, 3.0}) {
            const metrics::Conditioning cond[2] = {{1, s}, {2, sp}};
            const auto binned = metrics::empirical_binned_probs(result.sample, 0, options.empirical_bins, cond,
                                                                std::pair{-1.0, 1.0});
            for (std::size_t b = 0; b < binned.counts.size(); ++b) {
                emp_os << fmt17(s) << ',' << fmt17(sp) << ',' << b << ',' << fmt17(binned.edges[b]) << ','
                       << fmt17(binned.edges[b + 1]) << ',' << fmt17(binned.center(b)) << ',' << binned.counts[b];
                for (int c = 0; c < 4; ++c) {
                    emp_os << ',';
                    if (binned.freqs[b]) emp_os << fmt17((*binned.freqs[b])[static_cast<std::size_t>(c)]);
                }
                emp_os << '\n';
            }
        }
    }
    auto sum_os = detail::open_out((dir / "summary.json").string());
    sum_os << summary.dump(2) << '\n';
    return result;
}

}  // namespace deepratio::harness
