#include <benchmark/benchmark.h>

#include <random>

#include "deepratio/estimators.hpp"
#include "deepratio/lob_ingest.hpp"
#include "deepratio/ratio_net.hpp"
#include "deepratio/sim_core.hpp"

using namespace deepratio;

namespace {

net::LabeledBatch batch_of(std::size_t in_dim, std::size_t n, int classes) {
    std::mt19937_64 eng(1);
    std::normal_distribution<double> z;
    std::uniform_int_distribution<int> lab(0, classes - 1);
    net::LabeledBatch b;
    b.features.resize(static_cast<Eigen::Index>(in_dim), static_cast<Eigen::Index>(n));
    for (Eigen::Index j = 0; j < b.features.size(); ++j) b.features.data()[j] = z(eng);
    for (std::size_t i = 0; i < n; ++i) b.labels.push_back(lab(eng));
    return b;
}

net::NetConfig joint_shape(std::size_t layers, std::size_t width) {
    net::NetConfig c;
    c.in_dim = 3;
    c.out_dim = 7;
    c.n_layers = layers;
    c.width = width;
    return c;
}

}  // namespace

static void BM_Forward(benchmark::State& state) {
    const auto net = net::init(joint_shape(8, static_cast<std::size_t>(state.range(0))), 1);
    const auto b = batch_of(3, 512, 8);
    for (auto _ : state) benchmark::DoNotOptimize(net::forward_batch(net, b.features));
    state.SetItemsProcessed(state.iterations() * 512);
}
BENCHMARK(BM_Forward)->Arg(16)->Arg(64);

static void BM_LossAndGrad(benchmark::State& state) {
    const auto net = net::init(joint_shape(8, static_cast<std::size_t>(state.range(0))), 1);
    const auto b = batch_of(3, 512, 8);
    for (auto _ : state) benchmark::DoNotOptimize(net::loss_and_grad(net, b, true));
    state.SetItemsProcessed(state.iterations() * 512);
}
BENCHMARK(BM_LossAndGrad)->Arg(16)->Arg(64);

static void BM_Simulate(benchmark::State& state) {
    const auto model = sim::paper_model();
    const double T = static_cast<double>(state.range(0));
    std::uint64_t seed = 1;
    for (auto _ : state) benchmark::DoNotOptimize(sim::simulate(model, T, seed++));
}
BENCHMARK(BM_Simulate)->Arg(1000)->Unit(benchmark::kMillisecond);

static void BM_TrainEpoch(benchmark::State& state) {
    const auto s = sim::simulate(sim::paper_model(), 1000.0, 3);
    const auto shape = est::onestep_shape(s, 8, 64);
    est::TrainConfig cfg;
    cfg.max_epochs = 1;
    for (auto _ : state) benchmark::DoNotOptimize(est::train_onestep(s, shape, cfg));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(s.events.size()));
}
BENCHMARK(BM_TrainEpoch)->Unit(benchmark::kMillisecond);

static void BM_LobCovariates(benchmark::State& state) {
    const auto events = lob::synthesize_lob_stream(1000.0, 1);
    for (auto _ : state) benchmark::DoNotOptimize(lob::compute_covariates(events));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(events.size()));
}
BENCHMARK(BM_LobCovariates);
BENCHMARK_MAIN();
