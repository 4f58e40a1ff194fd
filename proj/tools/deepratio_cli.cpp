#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "deepratio/estimators.hpp"
#include "deepratio/harness.hpp"
#include "deepratio/lob_ingest.hpp"
#include "deepratio/metrics.hpp"
#include "deepratio/sample_io.hpp"
#include "deepratio/sim_core.hpp"
#include "deepratio/theory_bounds.hpp"

namespace fs = std::filesystem;
using namespace deepratio;
using nlohmann::json;

namespace {

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<std::size_t> workers;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--config", c.config, "JSON experiment config")->check(CLI::ExistingFile);
    cmd->add_option("--seed", c.seed, "base seed");
    cmd->add_option("--out", c.out, "output directory");
    cmd->add_option("--workers", c.workers, "worker threads")->check(CLI::PositiveNumber);
}

harness::ExperimentConfig resolve(const Common& c, const std::string& kind) {
    harness::ExperimentConfig cfg = c.config.empty() ? harness::ExperimentConfig{} : harness::ExperimentConfig::load(c.config);
    if (c.config.empty()) cfg.kind = kind;
    if (c.seed) cfg.base_seed = *c.seed;
    if (c.out) cfg.out_dir = *c.out;
    if (c.workers) cfg.workers = *c.workers;
    cfg.validate();
    return cfg;
}

void print_summary(const harness::StudyResult& r) {
    std::cout << "tasks " << r.tasks << ", failed " << r.failures.size() << '\n';
    for (const auto& a : r.aggregates)
        std::cout << harness::method_name(a.method) << " T=" << a.horizon << " L=" << a.n_layers << " N=" << a.width
                  << " n=" << a.n << " eps_l2=" << a.mean_eps_l2 << " eps_linf=" << a.mean_eps_linf
                  << " risk=" << a.mean_risk << '\n';
    for (const auto& s : r.slopes)
        std::cout << "slope " << harness::method_name(s.method) << ' ' << s.measure << " = " << s.fit.slope << " +- "
                  << s.fit.slope_stderr << '\n';
}

std::vector<int> parse_methods(const std::vector<std::string>& names) {
    std::vector<int> out;
    for (const auto& n : names) out.push_back(harness::method_from_name(n));
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Deep ratio estimation of marked point process intensities"};
    app.require_subcommand(1);

    // simulate
    Common sim_c;
    std::string sim_model = "paper";
    double sim_T = 1000.0;
    double sim_step = 0.1;
    auto* sim_cmd = app.add_subcommand("simulate", "simulate a marked point process sample");
    add_common(sim_cmd, sim_c);
    sim_cmd->add_option("--model", sim_model, "paper | constant | symmetric");
    sim_cmd->add_option("--horizon,-T", sim_T, "time horizon")->check(CLI::PositiveNumber);
    sim_cmd->add_option("--grid-step", sim_step, "covariate snapshot step (0 disables)");

    // fit
    Common fit_c;
    std::string fit_sample;
    std::vector<std::string> fit_methods{"one-step", "two-step"};
    std::optional<std::size_t> fit_layers, fit_width;
    std::optional<double> fit_T;
    auto* fit_cmd = app.add_subcommand("fit", "fit one or both estimators");
    add_common(fit_cmd, fit_c);
    fit_cmd->add_option("--sample", fit_sample, "stem of a saved sample; without it a sample is simulated and figure tables are written");
    fit_cmd->add_option("--method", fit_methods, "one-step | two-step");
    fit_cmd->add_option("--layers", fit_layers, "inner layers n^L");
    fit_cmd->add_option("--width", fit_width, "layer width n^N");
    fit_cmd->add_option("--horizon,-T", fit_T, "horizon of the simulated sample");

    // evaluate
    Common ev_c;
    std::string ev_fit;
    std::string ev_method = "two-step";
    std::string ev_model = "paper";
    double ev_T = 1000.0;
    std::string ev_sample;
    auto* ev_cmd = app.add_subcommand("evaluate", "evaluate a saved fit against the ground truth");
    add_common(ev_cmd, ev_c);
    ev_cmd->add_option("--fit", ev_fit, "fit bundle directory")->required();
    ev_cmd->add_option("--method", ev_method, "one-step | two-step");
    ev_cmd->add_option("--model", ev_model, "ground-truth model");
    ev_cmd->add_option("--horizon,-T", ev_T, "horizon of the fresh sample");
    ev_cmd->add_option("--sample", ev_sample, "stem of the training sample (defines the quantile grid)");

    // convergence / robustness
    Common conv_c, rob_c;
    auto* conv_cmd = app.add_subcommand("convergence", "error against horizon study");
    add_common(conv_cmd, conv_c);
    auto* rob_cmd = app.add_subcommand("robustness", "error against network shape grid");
    add_common(rob_cmd, rob_c);

    // bounds
    double b_T = 1e4;
    std::vector<double> b_betas{1.0}, b_ts{2.0}, b_widths{1.0, 1.0, 1.0};
    std::size_t b_depth = 1;
    double b_s = 1.0, b_delta = 1.0;
    double b_p = 1.0, b_q = 1.0, b_C = 1.0, b_B = 1.0;
    std::optional<double> b_k;
    double b_x0 = 0.5, b_x1 = 2.0;
    auto* bounds_cmd = app.add_subcommand("bounds", "print the theoretical quantities as JSON");
    bounds_cmd->add_option("--horizon,-T", b_T);
    bounds_cmd->add_option("--betas", b_betas, "layer smoothness, comma separated")->delimiter(',');
    bounds_cmd->add_option("--ts", b_ts, "effective dimensions, comma separated")->delimiter(',');
    bounds_cmd->add_option("--depth", b_depth);
    bounds_cmd->add_option("--widths", b_widths, "layer widths p_0..p_{L+1}, comma separated")->delimiter(',');
    bounds_cmd->add_option("--sparsity", b_s);
    bounds_cmd->add_option("--delta", b_delta);
    bounds_cmd->add_option("--p", b_p);
    bounds_cmd->add_option("--q", b_q);
    bounds_cmd->add_option("--C", b_C);
    bounds_cmd->add_option("--B", b_B);
    bounds_cmd->add_option("--k", b_k, "defaults to ceil((q+1)/p)");
    bounds_cmd->add_option("--x0", b_x0);
    bounds_cmd->add_option("--x1", b_x1);

    // lob-fit
    harness::LobFitOptions lob_opt;
    std::vector<std::string> lob_inputs;
    std::vector<std::string> lob_methods{"two-step"};
    std::optional<std::string> lob_out;
    std::optional<std::uint64_t> lob_seed;
    auto* lob_cmd = app.add_subcommand("lob-fit", "fit limit-order-book market orders");
    lob_cmd->add_option("--input", lob_inputs, "session CSV files")->required()->check(CLI::ExistingFile);
    lob_cmd->add_option("--method", lob_methods, "one-step | two-step");
    lob_cmd->add_option("--out", lob_out, "output directory");
    lob_cmd->add_option("--seed", lob_seed, "training seed");
    lob_cmd->add_option("--tick", lob_opt.tick_size, "tick size in price units")->check(CLI::PositiveNumber);
    lob_cmd->add_option("--layers", lob_opt.n_layers);
    lob_cmd->add_option("--width", lob_opt.width);
    lob_cmd->add_option("--workers", lob_opt.train.workers);

    // lob-synth
    double syn_T = 3600.0;
    std::uint64_t syn_seed = 1;
    std::string syn_out = "synthetic_lob.csv";
    auto* syn_cmd = app.add_subcommand("lob-synth", "write a synthetic market-order stream with a known law");
    syn_cmd->add_option("--horizon,-T", syn_T, "seconds")->check(CLI::PositiveNumber);
    syn_cmd->add_option("--seed", syn_seed);
    syn_cmd->add_option("--out", syn_out, "CSV path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*sim_cmd) {
            const auto model = sim::model_by_id(sim_model);
            const std::uint64_t seed = sim_c.seed.value_or(1);
            const auto sample = sim::simulate(model, sim_T, seed, sim_step);
            const fs::path stem = fs::path(sim_c.out.value_or("sample")) / "sample";
            fs::create_directories(stem.parent_path());
            io::save_sample(sample, stem);
            std::cout << "wrote " << sample.events.size() << " events to " << stem.string() << ".csv\n";
        } else if (*fit_cmd) {
            auto cfg = resolve(fit_c, "single");
            if (fit_layers) cfg.n_layers = *fit_layers;
            if (fit_width) cfg.width = *fit_width;
            if (fit_T) cfg.horizons = {*fit_T};
            if (fit_sample.empty()) {
                const auto r = harness::run_single_fit(cfg);
                for (const auto& e : r.reports)
                    std::cout << harness::method_name(e.method) << " eps_l2=" << e.eps_l2 << " eps_linf=" << e.eps_linf
                              << " risk=" << e.risk << '\n';
                std::cout << "tables in " << cfg.out_dir.string() << '\n';
            } else {
                const auto sample = io::load_sample(fit_sample);
                auto train = cfg.train;
                train.seed = cfg.base_seed;
                for (int m : parse_methods(fit_methods)) {
                    if (m == harness::kOneStep) {
                        const auto model = est::train_onestep(sample, est::onestep_shape(sample, cfg.n_layers, cfg.width), train);
                        est::save_bundle(model, cfg.out_dir / "onestep");
                        std::cout << "one-step nll " << est::sample_nll(model, sample) << '\n';
                    } else {
                        const auto model = est::train_twostep(sample, est::twostep_shapes(sample, cfg.n_layers, cfg.width), train);
                        est::save_bundle(model, cfg.out_dir / "twostep");
                        std::cout << "two-step nll " << est::sample_nll(model, sample) << '\n';
                    }
                }
            }
        } else if (*ev_cmd) {
            const auto truth = sim::model_by_id(ev_model);
            const std::uint64_t seed = ev_c.seed.value_or(1);
            const auto train_sample = ev_sample.empty() ? sim::simulate(truth, ev_T, seed) : io::load_sample(ev_sample);
            const auto fresh = sim::simulate(truth, train_sample.horizon, seed + harness::kEvaluationSeedOffset, 0.0);
            const auto grid = metrics::quantile_grid(train_sample, 20);
            const auto p_true = metrics::truth_on_grid(truth, grid);
            json out{{"fit", ev_fit}, {"method", ev_method}, {"horizon", train_sample.horizon}};
            if (harness::method_from_name(ev_method) == harness::kOneStep) {
                const auto model = est::load_onestep_bundle(ev_fit);
                const auto lg = est::logits_of(model);
                const auto e = metrics::grid_errors(metrics::predicted_on_grid(lg, grid, truth.ou_x.size()), p_true);
                out["eps_l2"] = e.eps_l2;
                out["eps_linf"] = e.eps_linf;
                out["risk"] = metrics::empirical_risk(lg, est::truth_onestep_logits(truth), fresh);
            } else {
                const auto model = est::load_twostep_bundle(ev_fit);
                const auto lg = est::logits_of(model);
                const auto e = metrics::grid_errors(metrics::predicted_on_grid(lg, grid, truth.ou_x.size()), p_true);
                out["eps_l2"] = e.eps_l2;
                out["eps_linf"] = e.eps_linf;
                out["risk"] = metrics::empirical_risk(lg, est::truth_twostep_logits(truth), fresh).total();
            }
            std::cout << out.dump(2) << '\n';
            if (ev_c.out) {
                fs::create_directories(*ev_c.out);
                std::ofstream(fs::path(*ev_c.out) / "evaluation.json") << out.dump(2) << '\n';
            }
        } else if (*conv_cmd) {
            print_summary(harness::run_convergence_study(resolve(conv_c, "convergence")));
        } else if (*rob_cmd) {
            auto cfg = resolve(rob_c, "robustness");
            if (rob_c.config.empty()) cfg.horizons = {8000};
            print_summary(harness::run_robustness_grid(cfg));
        } else if (*bounds_cmd) {
            const double k = b_k.value_or(std::ceil((b_q + 1.0) / b_p));
            const auto [c0, c1] = theory::compatibility_constants(b_x0, b_x1);
            const json out{
                {"effective_smoothness", theory::effective_smoothness(b_betas)},
                {"rate_phi", theory::rate_phi(b_T, {b_betas, b_ts})},
                {"covering_bound", theory::covering_bound({b_depth, b_widths, b_s, b_delta})},
                {"tail_integral_bound", theory::tail_integral_bound(b_p, b_q, b_C, b_B, k)},
                {"compatibility_constants", {c0, c1}},
                {"inputs",
                 {{"T", b_T}, {"betas", b_betas}, {"ts", b_ts}, {"depth", b_depth}, {"widths", b_widths},
                  {"sparsity", b_s}, {"delta", b_delta}, {"p", b_p}, {"q", b_q}, {"C", b_C}, {"B", b_B}, {"k", k},
                  {"x0", b_x0}, {"x1", b_x1}}}};
            std::cout << out.dump(2) << '\n';
        } else if (*lob_cmd) {
            for (const auto& p : lob_inputs) lob_opt.inputs.emplace_back(p);
            lob_opt.methods = parse_methods(lob_methods);
            if (lob_out) lob_opt.out_dir = *lob_out;
            lob_opt.train.seed = lob_seed.value_or(1);
            const auto r = harness::run_lob_fit(lob_opt);
            std::cout << r.sample.events.size() << " events used, " << r.rejected << " rejected; output in "
                      << lob_opt.out_dir.string() << '\n';
        } else if (*syn_cmd) {
            const auto events = lob::synthesize_lob_stream(syn_T, syn_seed);
            lob::write_lob_csv(events, syn_out);
            std::cout << "wrote " << events.size() << " events to " << syn_out << '\n';
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
