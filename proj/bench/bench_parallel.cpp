#include "kct/compare.hpp"
#include "kct/optimizers.hpp"
#include "kct/spectral.hpp"
#include "kct/rng.hpp"

#include <Eigen/Eigenvalues>
#include <benchmark/benchmark.h>

using namespace kct;

namespace {

Execution exec_of(const benchmark::State& state) {
  return state.range(0) == 0 ? Execution::serial : Execution::parallel;
}

void label(benchmark::State& state) { state.SetLabel(state.range(0) == 0 ? "serial" : "parallel"); }

// Noisy linear data in 40 dimensions, reduced at rank 40.
const ReducedSnapshots& reduced_fixture() {
  static const ReducedSnapshots red = [] {
    Rng rng(1);
    const Eigen::Index n = 40;
    Matrix a(n, n);
    for (Eigen::Index i = 0; i < a.size(); ++i) a(i) = rng.gaussian();
    a *= 0.95 / a.operatorNorm();
    std::vector<Matrix> trajs;
    for (int k = 0; k < 10; ++k) {
      Matrix x(n, 200);
      Vector s(n);
      for (Eigen::Index i = 0; i < n; ++i) s(i) = rng.gaussian();
      for (Eigen::Index t = 0; t < 200; ++t) {
        x.col(t) = s;
        s = a * s;
        for (Eigen::Index i = 0; i < n; ++i) s(i) += 1e-3 * rng.gaussian();
      }
      trajs.push_back(x);
    }
    DecompositionConfig cfg;
    cfg.rank = 40;
    return reduce_snapshots(delay_embed(TrajectoryEnsemble(trajs), 0), cfg);
  }();
  return red;
}

void BM_RefineRitzPairs(benchmark::State& state) {
  const ReducedSnapshots& red = reduced_fixture();
  Eigen::EigenSolver<Matrix> eig(red.rayleigh_quotient, false);
  std::vector<Complex> lambdas(eig.eigenvalues().data(), eig.eigenvalues().data() + eig.eigenvalues().size());
  for (auto _ : state) benchmark::DoNotOptimize(refine_ritz_pairs(red, lambdas, exec_of(state)));
  label(state);
}

void BM_ShuffleControl(benchmark::State& state) {
  Rng rng(2);
  EigenvalueSet a, b;
  for (int i = 0; i < 30; ++i) {
    a.values.emplace_back(rng.gaussian(), rng.gaussian());
    b.values.emplace_back(rng.gaussian(), rng.gaussian());
  }
  for (auto _ : state) benchmark::DoNotOptimize(shuffle_control(a, b, 100, 0, exec_of(state)));
  label(state);
}

void BM_WindowDistanceMatrix(benchmark::State& state) {
  Rng rng(3);
  std::vector<SpectralDecomposition> specs(32);
  for (auto& s : specs) {
    for (int i = 0; i < 20; ++i) s.eigenvalues.emplace_back(rng.gaussian(), rng.gaussian());
  }
  for (auto _ : state) benchmark::DoNotOptimize(window_distance_matrix(specs, exec_of(state)));
  label(state);
}

void BM_OptimizerRun(benchmark::State& state) {
  OptimizerConfig cfg = paper_config(Algorithm::omd, ObjectiveKind::sum_tan, 0.01, 2000);
  for (auto _ : state) benchmark::DoNotOptimize(run(cfg, exec_of(state)));
  label(state);
}

}  // namespace

BENCHMARK(BM_RefineRitzPairs)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_ShuffleControl)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_WindowDistanceMatrix)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_OptimizerRun)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
