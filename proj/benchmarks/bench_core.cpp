#include <benchmark/benchmark.h>

#include <Eigen/Dense>
#include <vector>

#include "pseudoshrink/bell.hpp"
#include "pseudoshrink/data_gen.hpp"
#include "pseudoshrink/deterministic.hpp"
#include "pseudoshrink/gmv_shrinkage.hpp"
#include "pseudoshrink/plugin.hpp"
#include "pseudoshrink/precision_shrinkage.hpp"

using namespace pseudoshrink;

namespace {

ObservationMatrix make_data(Eigen::Index p, Eigen::Index n) {
    SpectralModel model(paper_spectrum(p), sample_haar_basis(p, 42));
    return generate_observations(model, n, Dist::Normal, Eigen::VectorXd::Zero(p), 7);
}

void BM_BellPartial(benchmark::State& state) {
    const int m = static_cast<int>(state.range(0));
    const int k = m / 2 + 1;
    std::vector<double> x(static_cast<std::size_t>(m - k + 1), 1.5);
    for (auto _ : state) {
        benchmark::DoNotOptimize(bell_partial(m, k, x));
    }
}
BENCHMARK(BM_BellPartial)->Arg(4)->Arg(8)->Arg(12);

void BM_SolveV(benchmark::State& state) {
    SpectralModel model(paper_spectrum(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(solve_v(0.5, 2.0, model));
    }
}
BENCHMARK(BM_SolveV)->Arg(10)->Arg(1000);

void BM_LimitMomentMpr(benchmark::State& state) {
    SpectralModel model(paper_spectrum(200));
    const auto theta = WeightMatrix::scaled_identity(200, 1.0 / 200.0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(limit_moment(Family::MPR, 2, 0.7, theta, 2.0, model).value);
    }
}
BENCHMARK(BM_LimitMomentMpr);

void BM_PluginContextFromData(benchmark::State& state) {
    const auto p = state.range(0);
    const auto y = make_data(p, p / 2);
    for (auto _ : state) {
        benchmark::DoNotOptimize(PluginContext::from_data(y).rank());
    }
}
BENCHMARK(BM_PluginContextFromData)->Arg(200)->Arg(400);

void BM_MpShrinkagePlan(benchmark::State& state) {
    const auto y = make_data(200, 100);
    const auto ctx = PluginContext::from_data(y);
    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(200, 200);
    for (auto _ : state) {
        benchmark::DoNotOptimize(bona_fide_precision(ctx, PrecisionMethod::MP, eye).alpha);
    }
}
BENCHMARK(BM_MpShrinkagePlan);

void BM_RidgeTStarSearch(benchmark::State& state) {
    const auto y = make_data(200, 100);
    const auto ctx = PluginContext::from_data(y);
    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(200, 200);
    for (auto _ : state) {
        benchmark::DoNotOptimize(bona_fide_precision(ctx, PrecisionMethod::Ridge, eye).t_star);
    }
}
BENCHMARK(BM_RidgeTStarSearch);

void BM_GmvBonaFide(benchmark::State& state) {
    const auto y = make_data(400, 100);
    const auto ctx = PluginContext::from_data(y);
    const Eigen::VectorXd b = Eigen::VectorXd::Constant(400, 1.0 / 400.0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(bona_fide_alpha_mp(ctx, b).alpha);
    }
}
BENCHMARK(BM_GmvBonaFide);

}  // namespace

BENCHMARK_MAIN();
