#include "deepratio/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <iostream>
#include <limits>
#include <numeric>
#include <optional>

#include <json.hpp>

#include "deepratio/rng.hpp"
#include "text_util.hpp"

namespace deepratio::est {

namespace {

constexpr std::uint64_t kOneStepNet = 100;
constexpr std::uint64_t kTypeNet = 101;
constexpr std::uint64_t kMarkNetBase = 102;
constexpr Eigen::Index kEvalChunk = 8192;

net::LabeledBatch gather(const net::LabeledBatch& data, std::span<const std::size_t> idx) {
    net::LabeledBatch out;
    out.features.resize(data.features.rows(), static_cast<Eigen::Index>(idx.size()));
    out.labels.resize(idx.size());
    for (std::size_t j = 0; j < idx.size(); ++j) {
        out.features.col(static_cast<Eigen::Index>(j)) = data.features.col(static_cast<Eigen::Index>(idx[j]));
        out.labels[j] = data.labels[idx[j]];
    }
    return out;
}

// Summed loss, evaluated in column chunks to bound memory.
double chunked_loss(const net::RatioNetwork& net, const net::LabeledBatch& data) {
    double total = 0.0;
    const Eigen::Index n = data.features.cols();
    for (Eigen::Index start = 0; start < n; start += kEvalChunk) {
        const Eigen::Index len = std::min(kEvalChunk, n - start);
        net::LabeledBatch part;
        part.features = data.features.middleCols(start, len);
        part.labels.assign(data.labels.begin() + start, data.labels.begin() + start + len);
        total += net::loss(net, part, true);
    }
    return total;
}

void scale(net::Parameters& p, double s) {
    for (auto& w : p.weights) w *= s;
    for (auto& b : p.biases) b *= s;
}

LogitFn net_logits(const net::RatioNetwork& net) {
    return [&net](const Eigen::MatrixXd& in) {
        Eigen::MatrixXd out(static_cast<Eigen::Index>(net.config.out_dim), in.cols());
        for (Eigen::Index start = 0; start < in.cols(); start += kEvalChunk) {
            const Eigen::Index len = std::min(kEvalChunk, in.cols() - start);
            out.middleCols(start, len) = net::forward_batch(net, in.middleCols(start, len));
        }
        return out;
    };
}

template <class F>
LogitFn columnwise(std::size_t out_dim, F f) {
    return [out_dim, f](const Eigen::MatrixXd& in) {
        Eigen::MatrixXd out(static_cast<Eigen::Index>(out_dim), in.cols());
        std::vector<double> col(static_cast<std::size_t>(in.rows()));
        for (Eigen::Index j = 0; j < in.cols(); ++j) {
            for (Eigen::Index r = 0; r < in.rows(); ++r) col[static_cast<std::size_t>(r)] = in(r, j);
            const std::vector<double> v = f(std::span<const double>(col));
            for (std::size_t r = 0; r < out_dim; ++r) out(static_cast<Eigen::Index>(r), j) = v[r];
        }
        return out;
    };
}

void check_nonempty(const MarkedPointSample& sample) {
    if (sample.events.empty()) throw std::invalid_argument("sample has no events");
}

}  // namespace

void TrainConfig::validate() const {
    if (batch_size < 1) throw std::invalid_argument("TrainConfig: batch_size must be >= 1");
    if (max_epochs < 1) throw std::invalid_argument("TrainConfig: max_epochs must be >= 1");
    if (!(validation_fraction >= 0.0 && validation_fraction <= 0.5))
        throw std::invalid_argument("TrainConfig: validation_fraction must lie in [0, 0.5]");
}

TrainedNetwork train_network(const net::NetConfig& shape, const net::LabeledBatch& data, const TrainConfig& cfg,
                             std::uint64_t net_seed) {
    cfg.validate();
    shape.validate();
    if (static_cast<std::size_t>(data.features.rows()) != shape.in_dim)
        throw std::invalid_argument("train_network: feature rows do not match in_dim");
    const std::size_t n = data.size();
    if (n == 0) throw std::invalid_argument("train_network: empty training set");

    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    Rng split_rng(net_seed, stream::kValidationSplit);
    std::shuffle(perm.begin(), perm.end(), split_rng.engine());
    std::size_t n_val = static_cast<std::size_t>(std::floor(cfg.validation_fraction * static_cast<double>(n)));
    if (n_val >= n) n_val = 0;
    const std::size_t n_train = n - n_val;
    const auto train_set = gather(data, std::span(perm).first(n_train));
    const auto val_set = gather(data, std::span(perm).subspan(n_train));

    TrainedNetwork out{net::init(shape, net_seed), {}};
    auto& net = out.net;
    auto& report = out.report;
    report.n_train = n_train;
    report.n_val = n_val;
    report.net_seed = net_seed;
    report.initial_loss = chunked_loss(net, train_set) / static_cast<double>(n_train);

    net::AdamState adam(shape, cfg.adam);
    Rng shuffle_rng(net_seed, stream::kShuffle);
    std::vector<std::size_t> order(n_train);
    std::iota(order.begin(), order.end(), std::size_t{0});

    net::Parameters best = net.params;
    double best_val = std::numeric_limits<double>::infinity();
    std::size_t since_best = 0;
    double last_finite = report.initial_loss;

    for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), shuffle_rng.engine());
        double epoch_loss = 0.0;
        for (std::size_t start = 0, b = 0; start < n_train; start += cfg.batch_size, ++b) {
            const std::size_t len = std::min(cfg.batch_size, n_train - start);
            const auto mb = gather(train_set, std::span(order).subspan(start, len));
            auto lg = net::loss_and_grad(net, mb, true);
            if (!std::isfinite(lg.loss))
                throw TrainingDiverged("training diverged at epoch " + std::to_string(epoch) + ", minibatch " +
                                       std::to_string(b) + " (last finite mean loss " + std::to_string(last_finite) +
                                       ", net " + std::to_string(shape.in_dim) + "->" +
                                       std::to_string(shape.out_dim) + ")");
            last_finite = lg.loss / static_cast<double>(len);
            epoch_loss += lg.loss;
            scale(lg.grad, 1.0 / static_cast<double>(len));
            net::adam_step(net, lg.grad, adam);
        }
        if (!net.params.all_finite())
            throw TrainingDiverged("non-finite parameters after epoch " + std::to_string(epoch));

        EpochRecord rec{epoch, epoch_loss / static_cast<double>(n_train), std::nan("")};
        if (n_val > 0) {
            rec.val_loss = chunked_loss(net, val_set) / static_cast<double>(n_val);
            if (!std::isfinite(rec.val_loss))
                throw TrainingDiverged("non-finite validation loss at epoch " + std::to_string(epoch));
        }
        report.curve.push_back(rec);

        if (n_val == 0) {
            best = net.params;
            report.best_epoch = epoch;
            continue;
        }
        if (rec.val_loss < best_val) {
            best_val = rec.val_loss;
            best = net.params;
            report.best_epoch = epoch;
            since_best = 0;
        } else if (++since_best >= cfg.patience) {
            break;
        }
    }
    net.params = std::move(best);
    report.final_loss = chunked_loss(net, train_set) / static_cast<double>(n_train);
    return out;
}

net::LabeledBatch build_onestep_batch(const MarkedPointSample& sample) {
    check_nonempty(sample);
    net::LabeledBatch b;
    const auto d = static_cast<Eigen::Index>(sample.feature_dim());
    b.features.resize(d, static_cast<Eigen::Index>(sample.events.size()));
    b.labels.reserve(sample.events.size());
    for (std::size_t n = 0; n < sample.events.size(); ++n) {
        const auto& ev = sample.events[n];
        const auto col = static_cast<Eigen::Index>(n);
        Eigen::Index r = 0;
        for (double v : ev.x) b.features(r++, col) = v;
        for (double v : ev.y) b.features(r++, col) = v;
        b.labels.push_back(encode_class(ev.type, ev.mark, sample.n_marks));
    }
    return b;
}

TwoStepBatches build_twostep_batches(const MarkedPointSample& sample) {
    check_nonempty(sample);
    TwoStepBatches out;
    const auto n = static_cast<Eigen::Index>(sample.events.size());
    out.type_batch.features.resize(static_cast<Eigen::Index>(sample.d_x), n);
    out.type_batch.labels.reserve(sample.events.size());

    std::vector<std::size_t> per_type(static_cast<std::size_t>(sample.n_types), 0);
    for (const auto& ev : sample.events) ++per_type[static_cast<std::size_t>(ev.type)];
    const auto dm = static_cast<Eigen::Index>(sample.mark_feature_dim());
    out.mark_batches.resize(static_cast<std::size_t>(sample.n_types));
    for (std::size_t i = 0; i < per_type.size(); ++i) {
        out.mark_batches[i].features.resize(dm, static_cast<Eigen::Index>(per_type[i]));
        out.mark_batches[i].labels.reserve(per_type[i]);
    }

    for (Eigen::Index c = 0; c < n; ++c) {
        const auto& ev = sample.events[static_cast<std::size_t>(c)];
        for (std::size_t r = 0; r < ev.x.size(); ++r) out.type_batch.features(static_cast<Eigen::Index>(r), c) = ev.x[r];
        out.type_batch.labels.push_back(ev.type);
        auto& mb = out.mark_batches[static_cast<std::size_t>(ev.type)];
        const auto mc = static_cast<Eigen::Index>(mb.labels.size());
        const auto mf = mark_features(ev);
        for (std::size_t r = 0; r < mf.size(); ++r) mb.features(static_cast<Eigen::Index>(r), mc) = mf[r];
        mb.labels.push_back(ev.mark);
    }
    return out;
}

net::NetConfig onestep_shape(const MarkedPointSample& sample, std::size_t n_layers, std::size_t width) {
    net::NetConfig c;
    c.in_dim = sample.feature_dim();
    c.out_dim = static_cast<std::size_t>(sample.n_classes() - 1);
    c.n_layers = n_layers;
    c.width = width;
    return c;
}

TwoStepShapes twostep_shapes(const MarkedPointSample& sample, std::size_t n_layers, std::size_t width) {
    TwoStepShapes s;
    s.type_net.in_dim = sample.d_x;
    s.type_net.out_dim = static_cast<std::size_t>(sample.n_types - 1);
    s.type_net.n_layers = n_layers;
    s.type_net.width = width;
    s.mark_net = s.type_net;
    s.mark_net.in_dim = sample.mark_feature_dim();
    s.mark_net.out_dim = static_cast<std::size_t>(sample.n_marks - 1);
    return s;
}

OneStepModel train_onestep(const MarkedPointSample& sample, const net::NetConfig& shape, const TrainConfig& cfg) {
    if (shape.in_dim != sample.feature_dim() || shape.out_dim != static_cast<std::size_t>(sample.n_classes() - 1))
        throw std::invalid_argument("train_onestep: network shape does not match the sample");
    const auto batch = build_onestep_batch(sample);
    auto trained = train_network(shape, batch, cfg, derive_seed(cfg.seed, kOneStepNet));
    return OneStepModel{std::move(trained.net), sample.n_types, sample.n_marks, std::move(trained.report)};
}

TwoStepModel train_twostep(const MarkedPointSample& sample, const TwoStepShapes& shapes, const TrainConfig& cfg) {
    if (shapes.type_net.in_dim != sample.d_x || shapes.type_net.out_dim != static_cast<std::size_t>(sample.n_types - 1))
        throw std::invalid_argument("train_twostep: type network shape does not match the sample");
    if (shapes.mark_net.in_dim != sample.mark_feature_dim() ||
        shapes.mark_net.out_dim != static_cast<std::size_t>(sample.n_marks - 1))
        throw std::invalid_argument("train_twostep: mark network shape does not match the sample");
    cfg.validate();
    const auto batches = build_twostep_batches(sample);

    TwoStepModel model;
    model.n_types = sample.n_types;
    model.n_marks = sample.n_marks;

    // job 0 is the type network, job 1 + i the mark network of type i
    const std::size_t n_jobs = 1 + batches.mark_batches.size();
    std::vector<std::optional<TrainedNetwork>> results(n_jobs);
    auto run = [&](std::size_t job) {
        if (job == 0) {
            results[0] = train_network(shapes.type_net, batches.type_batch, cfg, derive_seed(cfg.seed, kTypeNet));
            return;
        }
        const auto& mb = batches.mark_batches[job - 1];
        if (mb.size() == 0) return;
        results[job] = train_network(shapes.mark_net, mb, cfg, derive_seed(cfg.seed, kMarkNetBase + job - 1));
    };

    const std::size_t workers = std::max<std::size_t>(1, std::min(cfg.workers, n_jobs));
    if (workers == 1) {
        for (std::size_t j = 0; j < n_jobs; ++j) run(j);
    } else {
        std::vector<std::future<void>> pending;
        std::size_t next = 0;
        while (next < n_jobs || !pending.empty()) {
            while (next < n_jobs && pending.size() < workers) pending.push_back(std::async(std::launch::async, run, next++));
            pending.front().get();
            pending.erase(pending.begin());
        }
    }

    model.type_net = std::move(results[0]->net);
    model.type_report = std::move(results[0]->report);
    for (std::size_t i = 0; i < batches.mark_batches.size(); ++i) {
        auto& r = results[i + 1];
        if (r) {
            model.mark_nets.push_back(std::move(r->net));
            model.mark_reports.push_back(std::move(r->report));
        } else {
            model.mark_nets.push_back(net::zero_network(shapes.mark_net));
            model.mark_reports.emplace_back();
            model.warnings.push_back("type " + std::to_string(i) +
                                     " has no events; its mark network predicts uniform marks");
            std::clog << "warning: " << model.warnings.back() << '\n';
        }
    }
    return model;
}

OneStepLogits logits_of(const OneStepModel& model) { return {net_logits(model.net), model.n_types, model.n_marks}; }

TwoStepLogits logits_of(const TwoStepModel& model) {
    TwoStepLogits out{net_logits(model.type_net), {}, model.n_types, model.n_marks};
    for (const auto& m : model.mark_nets) out.marks.push_back(net_logits(m));
    return out;
}

OneStepLogits truth_onestep_logits(const sim::GroundTruthModel& truth) {
    const std::size_t dx = truth.ou_x.size();
    return {columnwise(static_cast<std::size_t>(truth.n_classes() - 1),
                       [truth, dx](std::span<const double> f) {
                           return sim::joint_log_ratios(truth, f.first(dx), f.subspan(dx));
                       }),
            truth.n_types, truth.n_marks};
}

TwoStepLogits truth_twostep_logits(const sim::GroundTruthModel& truth) {
    TwoStepLogits out;
    out.n_types = truth.n_types;
    out.n_marks = truth.n_marks;
    out.type = columnwise(static_cast<std::size_t>(truth.n_types - 1),
                          [truth](std::span<const double> x) { return sim::type_log_ratios(truth, x); });
    for (int i = 0; i < truth.n_types; ++i)
        out.marks.push_back(columnwise(static_cast<std::size_t>(truth.n_marks - 1),
                                       [truth, i](std::span<const double> y) {
                                           return sim::mark_log_ratios(truth, i, y);
                                       }));
    return out;
}

Eigen::MatrixXd log_probs(const OneStepLogits& logits, const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
    Eigen::MatrixXd in(x.rows() + y.rows(), x.cols());
    in.topRows(x.rows()) = x;
    in.bottomRows(y.rows()) = y;
    return net::log_softmax(logits.joint(in), true);
}

Eigen::MatrixXd type_log_probs(const TwoStepLogits& logits, const Eigen::MatrixXd& x) {
    return net::log_softmax(logits.type(x), true);
}

Eigen::MatrixXd mark_log_probs(const TwoStepLogits& logits, int type, const Eigen::MatrixXd& marks_in) {
    return net::log_softmax(logits.marks.at(static_cast<std::size_t>(type))(marks_in), true);
}

Eigen::MatrixXd log_probs(const TwoStepLogits& logits, const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
    const Eigen::MatrixXd& mark_in = y.rows() > 0 ? y : x;
    const Eigen::MatrixXd type_lp = type_log_probs(logits, x);
    Eigen::MatrixXd out(logits.n_types * logits.n_marks, x.cols());
    for (int i = 0; i < logits.n_types; ++i) {
        const Eigen::MatrixXd mark_lp = mark_log_probs(logits, i, mark_in);
        for (int k = 0; k < logits.n_marks; ++k)
            out.row(encode_class(i, k, logits.n_marks)) = type_lp.row(i) + mark_lp.row(k);
    }
    return out;
}

namespace {

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> as_columns(std::span<const double> x, std::span<const double> y) {
    Eigen::MatrixXd xm(static_cast<Eigen::Index>(x.size()), 1);
    Eigen::MatrixXd ym(static_cast<Eigen::Index>(y.size()), 1);
    for (std::size_t r = 0; r < x.size(); ++r) xm(static_cast<Eigen::Index>(r), 0) = x[r];
    for (std::size_t r = 0; r < y.size(); ++r) ym(static_cast<Eigen::Index>(r), 0) = y[r];
    return {xm, ym};
}

std::vector<double> exp_column(const Eigen::MatrixXd& lp) {
    std::vector<double> p(static_cast<std::size_t>(lp.rows()));
    for (Eigen::Index r = 0; r < lp.rows(); ++r) p[static_cast<std::size_t>(r)] = std::exp(lp(r, 0));
    return p;
}

}  // namespace

std::vector<double> predict_onestep(const OneStepModel& model, std::span<const double> x, std::span<const double> y) {
    const auto [xm, ym] = as_columns(x, y);
    return exp_column(log_probs(logits_of(model), xm, ym));
}

std::vector<double> predict_twostep(const TwoStepModel& model, std::span<const double> x, std::span<const double> y) {
    const auto [xm, ym] = as_columns(x, y);
    return exp_column(log_probs(logits_of(model), xm, ym));
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> event_covariates(const MarkedPointSample& sample) {
    const auto n = static_cast<Eigen::Index>(sample.events.size());
    Eigen::MatrixXd x(static_cast<Eigen::Index>(sample.d_x), n);
    Eigen::MatrixXd y(static_cast<Eigen::Index>(sample.d_y), n);
    for (Eigen::Index c = 0; c < n; ++c) {
        const auto& ev = sample.events[static_cast<std::size_t>(c)];
        for (std::size_t r = 0; r < ev.x.size(); ++r) x(static_cast<Eigen::Index>(r), c) = ev.x[r];
        for (std::size_t r = 0; r < ev.y.size(); ++r) y(static_cast<Eigen::Index>(r), c) = ev.y[r];
    }
    return {x, y};
}

double sample_nll(const OneStepModel& model, const MarkedPointSample& sample) {
    return chunked_loss(model.net, build_onestep_batch(sample));
}

double sample_nll(const TwoStepModel& model, const MarkedPointSample& sample) {
    const auto b = build_twostep_batches(sample);
    double total = chunked_loss(model.type_net, b.type_batch);
    for (std::size_t i = 0; i < b.mark_batches.size(); ++i)
        if (b.mark_batches[i].size() > 0) total += chunked_loss(model.mark_nets[i], b.mark_batches[i]);
    return total;
}

// ---------------------------------------------------------------------------
// Bundles

namespace {

nlohmann::json report_json(const TrainingReport& r) {
    return {{"best_epoch", r.best_epoch}, {"initial_loss", r.initial_loss}, {"final_loss", r.final_loss},
            {"n_train", r.n_train},       {"n_val", r.n_val},               {"epochs_run", r.curve.size()},
            {"net_seed", r.net_seed}};
}

nlohmann::json shape_json(const net::NetConfig& c) {
    return {{"in_dim", c.in_dim}, {"out_dim", c.out_dim}, {"n_layers", c.n_layers}, {"width", c.width},
            {"leaky_slope", c.leaky_slope}, {"activate_last_hidden", c.activate_last_hidden},
            {"param_count", net::param_count(c)}};
}

void write_curve(const TrainingReport& r, const std::filesystem::path& path) {
    auto os = detail::open_out(path.string());
    os << "epoch,train_loss,val_loss\n";
    for (const auto& e : r.curve)
        os << e.epoch << ',' << detail::fmt17(e.train_loss) << ',' << detail::fmt17(e.val_loss) << '\n';
}

TrainingReport read_report(const nlohmann::json& j, const std::filesystem::path& curve_path) {
    TrainingReport r;
    r.best_epoch = j.at("best_epoch").get<std::size_t>();
    r.initial_loss = j.at("initial_loss").get<double>();
    r.final_loss = j.at("final_loss").get<double>();
    r.n_train = j.at("n_train").get<std::size_t>();
    r.n_val = j.at("n_val").get<std::size_t>();
    r.net_seed = j.value("net_seed", std::uint64_t{0});
    auto is = detail::open_in(curve_path.string());
    std::string line;
    std::getline(is, line);
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto cells = detail::split_csv_line(line);
        if (cells.size() != 3) throw std::runtime_error("malformed curve row in " + curve_path.string());
        r.curve.push_back({std::stoul(cells[0]), detail::parse_double(cells[1]), detail::parse_double(cells[2])});
    }
    return r;
}

void add_network(nlohmann::json& manifest, const std::filesystem::path& dir, const std::string& role,
                 const net::RatioNetwork& net, const TrainingReport& report) {
    net::save_binary(net, dir / (role + ".bin"));
    write_curve(report, dir / ("curve_" + role + ".csv"));
    manifest["networks"].push_back({{"role", role},
                                    {"checkpoint", role + ".bin"},
                                    {"curve", "curve_" + role + ".csv"},
                                    {"shape", shape_json(net.config)},
                                    {"report", report_json(report)}});
}

nlohmann::json read_manifest(const std::filesystem::path& dir, const std::string& expected_method) {
    auto is = detail::open_in((dir / "manifest.json").string());
    auto j = nlohmann::json::parse(is);
    if (j.at("method").get<std::string>() != expected_method)
        throw std::runtime_error("bundle " + dir.string() + " holds method " + j.at("method").get<std::string>());
    return j;
}

}  // namespace

void save_bundle(const OneStepModel& model, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    nlohmann::json m{{"method", "one-step"}, {"n_types", model.n_types}, {"n_marks", model.n_marks},
                     {"networks", nlohmann::json::array()}};
    add_network(m, dir, "joint", model.net, model.report);
    auto os = detail::open_out((dir / "manifest.json").string());
    os << m.dump(2) << '\n';
}

void save_bundle(const TwoStepModel& model, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    nlohmann::json m{{"method", "two-step"},
                     {"n_types", model.n_types},
                     {"n_marks", model.n_marks},
                     {"warnings", model.warnings},
                     {"networks", nlohmann::json::array()}};
    add_network(m, dir, "type", model.type_net, model.type_report);
    for (std::size_t i = 0; i < model.mark_nets.size(); ++i)
        add_network(m, dir, "mark" + std::to_string(i), model.mark_nets[i], model.mark_reports[i]);
    auto os = detail::open_out((dir / "manifest.json").string());
    os << m.dump(2) << '\n';
}

OneStepModel load_onestep_bundle(const std::filesystem::path& dir) {
    const auto m = read_manifest(dir, "one-step");
    const auto& entry = m.at("networks").at(0);
    OneStepModel model;
    model.n_types = m.at("n_types").get<int>();
    model.n_marks = m.at("n_marks").get<int>();
    model.net = net::load_binary(dir / entry.at("checkpoint").get<std::string>());
    model.report = read_report(entry.at("report"), dir / entry.at("curve").get<std::string>());
    return model;
}

TwoStepModel load_twostep_bundle(const std::filesystem::path& dir) {
    const auto m = read_manifest(dir, "two-step");
    TwoStepModel model;
    model.n_types = m.at("n_types").get<int>();
    model.n_marks = m.at("n_marks").get<int>();
    model.warnings = m.value("warnings", std::vector<std::string>{});
    for (const auto& entry : m.at("networks")) {
        auto net = net::load_binary(dir / entry.at("checkpoint").get<std::string>());
        auto report = read_report(entry.at("report"), dir / entry.at("curve").get<std::string>());
        if (entry.at("role").get<std::string>() == "type") {
            model.type_net = std::move(net);
            model.type_report = std::move(report);
        } else {
            model.mark_nets.push_back(std::move(net));
            model.mark_reports.push_back(std::move(report));
        }
    }
    return model;
}

}  // namespace deepratio::est
