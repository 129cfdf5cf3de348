#include "ssimm/llise_embed.hpp"
#include "ssimm/llise_reconstruct.hpp"
#include "ssimm/ssim.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace ssimm;

namespace {

Eigen::MatrixXd gaussian(Eigen::Index rows, Eigen::Index cols, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = 0.2 * nd(rng);
  return m;
}

void BM_SsimDistance(benchmark::State& state) {
  const auto q = state.range(0);
  Eigen::VectorXd a = gaussian(q, 1, 1), b = gaussian(q, 1, 2);
  a.array() -= a.mean();
  b.array() -= b.mean();
  const auto consts = SsimConstants::for_block(static_cast<std::size_t>(q));
  for (auto _ : state) benchmark::DoNotOptimize(ssim_distance(a, b, consts));
}
BENCHMARK(BM_SsimDistance)->Arg(16)->Arg(64)->Arg(256);

void BM_SolveWeights(benchmark::State& state) {
  const auto k = state.range(0);
  const Eigen::VectorXd x = gaussian(64, 1, 3);
  const Eigen::MatrixXd X = gaussian(64, k, 4);
  const double c = SsimConstants::for_block(64).c;
  for (auto _ : state) benchmark::DoNotOptimize(solve_weights(x, X, c, AdmmConfig::reconstruction()));
}
BENCHMARK(BM_SolveWeights)->Arg(5)->Arg(10)->Unit(benchmark::kMicrosecond);

void BM_ProjectConstraints(benchmark::State& state) {
  const Eigen::MatrixXd A = gaussian(state.range(0), 4, 5);
  for (auto _ : state) benchmark::DoNotOptimize(project_constraints(A));
}
BENCHMARK(BM_ProjectConstraints)->Arg(121)->Arg(1000)->Unit(benchmark::kMicrosecond);

void BM_SolveEmbedding(benchmark::State& state) {
  const Eigen::Index n = state.range(0), k = 10;
  std::mt19937_64 rng(6);
  std::vector<SparseWeightRow> rows;
  for (Eigen::Index j = 0; j < n; ++j) {
    SparseWeightRow row;
    row.owner = j;
    for (Eigen::Index r = 1; r <= k; ++r) row.indices.push_back((j + r) % n);
    row.weights = gaussian(k, 1, static_cast<unsigned>(j)).col(0).normalized();
    rows.push_back(std::move(row));
  }
  AdmmConfig cfg = AdmmConfig::embedding();
  cfg.max_iter = 200;
  for (auto _ : state) benchmark::DoNotOptimize(solve_embedding(rows, n, 4, SsimConstants::for_block(4).c, cfg));
}
BENCHMARK(BM_SolveEmbedding)->Arg(121)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
