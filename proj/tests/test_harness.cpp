#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "deepratio/harness.hpp"

using namespace deepratio;
using namespace deepratio::harness;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    auto dir = fs::temp_directory_path() / ("deepratio_harness_" + name);
    fs::remove_all(dir);
    return dir;
}

ExperimentConfig tiny(const fs::path& out) {
    ExperimentConfig c;
    c.horizons = {50, 100, 200};
    c.replications = 2;
    c.n_layers = 2;
    c.width = 8;
    c.n_layers_list = {1, 2};
    c.widths_list = {4, 8};
    c.train.max_epochs = 3;
    c.grid_size = 4;
    c.out_dir = out;
    return c;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& path) {
    std::ifstream in(path);
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (!line.empty() && line.back() == ',') cells.emplace_back();
        rows.push_back(std::move(cells));
    }
    return rows;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path);
    return {std::istreambuf_iterator<char>(in), {}};
}

// results.csv without the wall-clock column
std::string results_without_timing(const fs::path& path) {
    std::string out;
    for (auto row : read_csv(path)) {
        row.pop_back();
        for (const auto& c : row) out += c + ",";
        out += "\n";
    }
    return out;
}

}  // namespace

TEST(Ols, RecoversExactPowerLaw) {
    std::vector<double> x, y;
    for (double T : {1000.0, 2000.0, 4000.0, 8000.0, 16000.0}) {
        x.push_back(std::log(T));
        y.push_back(std::log(3.0 * std::pow(T, -1.0 / 3.0)));
    }
    const auto fit = ols(x, y);
    EXPECT_NEAR(fit.slope, -1.0 / 3.0, 1e-12);
    EXPECT_NEAR(fit.intercept, std::log(3.0), 1e-10);
    EXPECT_NEAR(fit.slope_stderr, 0.0, 1e-10);
    EXPECT_THROW(ols({1.0}, {1.0}), std::invalid_argument);
    EXPECT_THROW(ols({1.0, 1.0}, {1.0, 2.0}), std::invalid_argument);
}

TEST(Ols, StandardErrorOfNoisyLine) {
    const std::vector<double> x{0, 1, 2, 3};
    const std::vector<double> y{0, 1, 1, 2};
    const auto fit = ols(x, y);
    EXPECT_NEAR(fit.slope, 0.6, 1e-12);
    EXPECT_NEAR(fit.intercept, 0.1, 1e-12);
    // residuals -0.1, 0.3, -0.3, 0.1: s^2 = 0.2 / 2, Sxx = 5
    EXPECT_NEAR(fit.slope_stderr, std::sqrt(0.1 / 5.0), 1e-12);
}

TEST(Aggregate, MeansPerCell) {
    std::vector<ErrorReport> rows;
    for (std::uint64_t s = 1; s <= 4; ++s) {
        rows.push_back({kTwoStep, 100.0, s, 2, 8, 0.1 * s, 0.2 * s, 0.01 * s, 1.0});
        rows.push_back({kOneStep, 100.0, s, 2, 8, 1.0 * s, 2.0 * s, 0.1 * s, 1.0});
        rows.push_back({kOneStep, 50.0, s, 2, 8, 3.0, 4.0, 5.0, 1.0});
    }
    const auto agg = aggregate(rows);
    ASSERT_EQ(agg.size(), 3u);
    EXPECT_EQ(agg[0].method, kOneStep);
    EXPECT_EQ(agg[0].horizon, 50.0);
    EXPECT_EQ(agg[0].n, 4u);
    EXPECT_NEAR(agg[0].mean_eps_l2, 3.0, 1e-12);
    EXPECT_NEAR(agg[1].mean_eps_l2, 2.5, 1e-12);
    EXPECT_NEAR(agg[1].mean_eps_linf, 5.0, 1e-12);
    EXPECT_NEAR(agg[1].mean_risk, 0.25, 1e-12);
    EXPECT_EQ(agg[2].method, kTwoStep);
    EXPECT_NEAR(agg[2].mean_eps_l2, 0.25, 1e-12);
}

TEST(Aggregate, SlopesPerMethodAndMeasure) {
    std::vector<Aggregate> agg;
    for (double T : {100.0, 200.0, 400.0}) {
        agg.push_back({kOneStep, T, 8, 64, 5, 2.0 * std::pow(T, -0.5), std::pow(T, -0.25), std::pow(T, -1.0)});
        agg.push_back({kTwoStep, T, 8, 64, 5, std::pow(T, -0.3), std::pow(T, -0.3), T > 150 ? -1.0 : 1.0});
    }
    const auto slopes = convergence_slopes(agg);
    ASSERT_EQ(slopes.size(), 6u);
    EXPECT_EQ(slopes[0].measure, "eps_l2");
    EXPECT_NEAR(slopes[0].fit.slope, -0.5, 1e-12);
    EXPECT_NEAR(slopes[1].fit.slope, -0.25, 1e-12);
    EXPECT_NEAR(slopes[2].fit.slope, -1.0, 1e-12);
    EXPECT_EQ(slopes[3].method, kTwoStep);
    EXPECT_NEAR(slopes[3].fit.slope, -0.3, 1e-12);
    EXPECT_TRUE(std::isnan(slopes[5].fit.slope));  // a non-positive mean has no logarithm
}

TEST(Config, JsonRoundTripAndHash) {
    ExperimentConfig c = tiny("a");
    c.methods = {kTwoStep};
    c.train.adam.lr = 3e-4;
    c.workers = 3;
    const auto back = ExperimentConfig::from_json(c.to_json());
    EXPECT_EQ(back.to_json(), c.to_json());
    EXPECT_EQ(back.hash(), c.hash());
    EXPECT_EQ(c.hash().size(), 16u);

    ExperimentConfig moved = c;
    moved.out_dir = "elsewhere";
    EXPECT_EQ(moved.hash(), c.hash());
    moved.workers = 1;
    EXPECT_EQ(moved.hash(), c.hash());
    ExperimentConfig other = c;
    other.base_seed = 2;
    EXPECT_NE(other.hash(), c.hash());

    const auto named = ExperimentConfig::from_json(R"({"methods": ["one-step", "two-step"], "horizons": [10, 20, 30]})");
    EXPECT_EQ(named.methods, (std::vector<int>{kOneStep, kTwoStep}));
    EXPECT_EQ(named.horizons, (std::vector<double>{10, 20, 30}));
    EXPECT_THROW(ExperimentConfig::from_json(R"({"methods": ["three-step"]})"), std::invalid_argument);
}

TEST(Config, ValidationAndMethodNames) {
    EXPECT_STREQ(method_name(kOneStep), "one-step");
    EXPECT_STREQ(method_name(kTwoStep), "two-step");
    EXPECT_EQ(method_from_name("2"), kTwoStep);
    EXPECT_THROW(method_from_name("x"), std::invalid_argument);
    auto c = tiny("v");
    c.replications = 0;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = tiny("v");
    c.horizons = {100, 200};
    EXPECT_THROW(run_convergence_study(c), std::invalid_argument);
}

TEST(Study, ConvergenceIsReproducibleAcrossWorkerCounts) {
    const auto dir_a = scratch("conv_a");
    const auto dir_b = scratch("conv_b");
    auto a = tiny(dir_a);
    auto b = tiny(dir_b);
    b.workers = 3;
    const auto ra = run_convergence_study(a);
    const auto rb = run_convergence_study(b);
    EXPECT_EQ(ra.tasks, 12u);
    ASSERT_EQ(ra.rows.size(), 12u);
    EXPECT_TRUE(ra.failures.empty());
    EXPECT_EQ(ra.aggregates.size(), 6u);
    EXPECT_EQ(ra.slopes.size(), 6u);

    EXPECT_EQ(results_without_timing(dir_a / "results.csv"), results_without_timing(dir_b / "results.csv"));
    EXPECT_EQ(slurp(dir_a / "aggregate.csv"), slurp(dir_b / "aggregate.csv"));
    EXPECT_EQ(slurp(dir_a / "slopes.json"), slurp(dir_b / "slopes.json"));

    const auto rows = read_csv(dir_a / "results.csv");
    EXPECT_EQ(rows[0], (std::vector<std::string>{"method", "T", "seed", "nL", "nN", "eps_l2", "eps_linf", "risk", "wall_s"}));
    EXPECT_EQ(rows.size(), 13u);
    const auto agg = read_csv(dir_a / "aggregate.csv");
    EXPECT_EQ(agg[0], (std::vector<std::string>{"method", "T", "nL", "nN", "n", "mean_eps_l2", "mean_eps_linf", "mean_risk"}));
    const auto cfg = nlohmann::json::parse(slurp(dir_a / "config.json"));
    EXPECT_EQ(cfg.at("config_hash"), a.hash());
    const auto slopes = nlohmann::json::parse(slurp(dir_a / "slopes.json"));
    EXPECT_EQ(slopes.at("config_hash"), a.hash());

    for (const auto& r : ra.rows) {
        EXPECT_GT(r.eps_l2, 0.0);
        EXPECT_LE(r.eps_l2, 8.0 * r.eps_linf);
        EXPECT_TRUE(std::isfinite(r.risk));
    }
}

TEST(Study, PairedSamplesShareSeedsAcrossMethods) {
    auto c = tiny(scratch("paired"));
    const auto one = run_task(c, {kOneStep, 60.0, 9, 1, 4});
    const auto again = run_task(c, {kOneStep, 60.0, 9, 1, 4});
    EXPECT_EQ(one.eps_l2, again.eps_l2);
    EXPECT_EQ(one.risk, again.risk);
    const auto other = run_task(c, {kOneStep, 60.0, 10, 1, 4});
    EXPECT_NE(one.eps_l2, other.eps_l2);
}

TEST(Study, RobustnessGridAndHeatmaps) {
    const auto dir = scratch("robust");
    auto c = tiny(dir);
    c.replications = 1;
    const auto r = run_robustness_grid(c);
    EXPECT_EQ(r.tasks, 8u);  // 2 depths x 2 widths x 2 methods
    EXPECT_EQ(r.aggregates.size(), 8u);
    for (const auto& row : r.rows) EXPECT_EQ(row.horizon, 50.0);
    for (const char* measure : {"eps_l2", "eps_linf", "risk"})
        for (int m : {1, 2}) {
            const auto path = dir / ("heatmap_" + std::string(measure) + "_m" + std::to_string(m) + ".csv");
            ASSERT_TRUE(fs::exists(path)) << path;
            const auto rows = read_csv(path);
            ASSERT_EQ(rows.size(), 3u);
            EXPECT_EQ(rows[0], (std::vector<std::string>{"nL", "4", "8"}));
            EXPECT_EQ(rows[1][0], "1");
            EXPECT_EQ(rows[2][0], "2");
            EXPECT_EQ(rows[1].size(), 3u);
        }
}

TEST(Study, FailurePolicy) {
    auto c = tiny(scratch("fail"));
    // a one-second path has too few snapshots for the evaluation grid
    const std::vector<FitTask> tasks{{kOneStep, 1.0, 1, 1, 4}, {kOneStep, 50.0, 1, 1, 4}, {kTwoStep, 50.0, 1, 1, 4},
                                     {kTwoStep, 50.0, 2, 1, 4}, {kOneStep, 50.0, 2, 1, 4}};
    c.max_failure_fraction = 0.2;
    const auto r = run_tasks(c, tasks);
    EXPECT_EQ(r.failures.size(), 1u);
    EXPECT_EQ(r.rows.size(), 4u);
    c.max_failure_fraction = 0.1;
    EXPECT_THROW(run_tasks(c, tasks), std::runtime_error);
}

TEST(SingleFit, TablesHaveTheRightShapeAndTruth) {
    const auto dir = scratch("single");
    auto c = tiny(dir);
    c.kind = "single";
    c.horizons = {100};
    const auto r = run_single_fit(c);
    EXPECT_EQ(r.reports.size(), 2u);
    EXPECT_TRUE(fs::exists(dir / "onestep" / "manifest.json"));
    EXPECT_TRUE(fs::exists(dir / "twostep" / "manifest.json"));

    const auto truth = sim::paper_model();
    const auto fn = read_csv(dir / "functions_onestep.csv");
    ASSERT_EQ(fn.size(), 1u + 16 * kCurvePoints);
    ASSERT_EQ(fn[0].size(), 5u + 14u);
    EXPECT_EQ(fn[0][5], "lhat_01");
    EXPECT_EQ(fn[0][12], "ltrue_01");
    for (std::size_t row = 1; row < fn.size(); row += 37) {
        const double x[2] = {std::stod(fn[row][2]), std::stod(fn[row][3])};
        const double y[1] = {std::stod(fn[row][4])};
        const auto p = sim::true_joint_probability(truth, x, y);
        for (int cls = 1; cls < 8; ++cls)
            EXPECT_NEAR(std::stod(fn[row][11 + cls]), std::log(p[cls] / p[0]), 1e-12);
    }

    for (const char* name : {"probabilities_onestep.csv", "probabilities_twostep.csv"}) {
        const auto pr = read_csv(dir / name);
        ASSERT_EQ(pr.size(), 1u + 16 * kCurvePoints);
        ASSERT_EQ(pr[0].size(), 5u + 16u);
        for (std::size_t row = 1; row < pr.size(); row += 53) {
            double s_hat = 0.0, s_true = 0.0;
            for (int cls = 0; cls < 8; ++cls) {
                s_hat += std::stod(pr[row][5 + cls]);
                s_true += std::stod(pr[row][13 + cls]);
            }
            EXPECT_NEAR(s_hat, 1.0, 1e-12);
            EXPECT_NEAR(s_true, 1.0, 1e-12);
        }
    }

    const auto type = read_csv(dir / "functions_twostep_type.csv");
    ASSERT_EQ(type.size(), 1u + 4 * kCurvePoints);
    EXPECT_EQ(type[0], (std::vector<std::string>{"alpha", "x0", "x1", "lhat_1", "lhat_2", "lhat_3", "ltrue_1", "ltrue_2", "ltrue_3"}));
    for (std::size_t row = 1; row < type.size(); row += 29) {
        const double x[2] = {std::stod(type[row][1]), std::stod(type[row][2])};
        for (int i = 1; i < 4; ++i)
            EXPECT_NEAR(std::stod(type[row][5 + i]), std::log(truth.intensity(i, x) / truth.intensity(0, x)), 1e-12);
    }
    const auto mark = read_csv(dir / "functions_twostep_mark.csv");
    ASSERT_EQ(mark.size(), 1u + kCurvePoints);
    for (std::size_t row = 1; row < mark.size(); row += 10) {
        const double y[1] = {std::stod(mark[row][0])};
        for (int i = 0; i < 4; ++i)
            EXPECT_NEAR(std::stod(mark[row][5 + i]),
                        std::log(truth.mark_probability(i, 1, y) / truth.mark_probability(i, 0, y)), 1e-12);
    }
}

TEST(LobFit, WritesCurvesAndEmpiricalTables) {
    const auto dir = scratch("lob");
    std::vector<lob::Session> sessions(2);
    sessions[0].events = lob::synthesize_lob_stream(150.0, 1);
    sessions[1].events = lob::synthesize_lob_stream(100.0, 2);
    LobFitOptions o;
    o.out_dir = dir;
    o.n_layers = 2;
    o.width = 8;
    o.train.max_epochs = 3;
    const auto r = run_lob_fit(sessions, o);
    EXPECT_EQ(r.sample.n_types, 2);
    EXPECT_EQ(r.sample.events.size(), sessions[0].events.size() + sessions[1].events.size() - 2);
    EXPECT_EQ(r.onestep.size(), 1u);
    EXPECT_EQ(r.twostep.size(), 1u);

    const auto curves = read_csv(dir / "lob_curves.csv");
    EXPECT_EQ(curves[0], (std::vector<std::string>{"method", "x1", "x2", "x0", "p00", "p01", "p10", "p11"}));
    EXPECT_EQ(curves.size(), 1u + 2 * 6 * kCurvePoints);
    for (std::size_t row = 1; row < curves.size(); row += 17) {
        double s = 0.0;
        for (int c = 4; c < 8; ++c) s += std::stod(curves[row][c]);
        EXPECT_NEAR(s, 1.0, 1e-12);
    }
    const auto emp = read_csv(dir / "lob_empirical.csv");
    EXPECT_EQ(emp.size(), 1u + 6 * 20);
    std::size_t counted = 0;
    for (std::size_t row = 1; row < emp.size(); ++row) counted += std::stoul(emp[row][6]);
    EXPECT_EQ(counted, r.sample.events.size());
    const auto summary = nlohmann::json::parse(slurp(dir / "summary.json"));
    EXPECT_EQ(summary.at("n_events"), r.sample.events.size());
    EXPECT_EQ(summary.at("sessions"), 2);

    // the CSV entry point reads the same sessions
    for (std::size_t s = 0; s < 2; ++s) lob::write_lob_csv(sessions[s].events, dir / ("s" + std::to_string(s) + ".csv"));
    LobFitOptions from_files = o;
    from_files.inputs = {dir / "s0.csv", dir / "s1.csv"};
    from_files.out_dir = dir / "files";
    from_files.methods = {kTwoStep};
    const auto rf = run_lob_fit(from_files);
    EXPECT_EQ(rf.sample.events.size(), r.sample.events.size());
    EXPECT_TRUE(rf.onestep.empty());
}
