#include <benchmark/benchmark.h>

#include <random>

#include "semiprox/ccg.hpp"
#include "semiprox/domains.hpp"
#include "semiprox/linalg.hpp"

using namespace semiprox;

namespace {

DenseMatrix random_matrix(std::size_t m, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  DenseMatrix a(m, n);
  for (double& x : a.a) x = g(rng);
  return a;
}

ObservedMatrix random_mask(std::size_t m, std::size_t n, double fraction,
                           std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0, 1);
  std::vector<ObservedMatrix::Triple> t;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (unif(rng) < fraction) t.push_back({i, j, unif(rng)});
  return ObservedMatrix(m, n, std::move(t));
}

void BM_TopSingularPair(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  DenseMatrix a = random_matrix(n, n, 7);
  std::uint64_t seed = 0;
  for (auto _ : state) {
    auto r = top_singular_pair(a, 1e-9, 1000, ++seed);
    benchmark::DoNotOptimize(r.pair.sigma);
  }
}
BENCHMARK(BM_TopSingularPair)->Arg(32)->Arg(64)->Arg(128);

void BM_ApplyMaskScatter(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  ObservedMatrix obs = random_mask(n, n, 0.3, 13);
  DenseMatrix x = random_matrix(n, n, 17);
  Vec out(obs.count());
  Vec back(n * n);
  for (auto _ : state) {
    apply_mask(x, obs, out);
    std::fill(back.begin(), back.end(), 0.0);
    scatter_add(out, obs, 1.0, back);
    benchmark::DoNotOptimize(back.data());
  }
}
BENCHMARK(BM_ApplyMaskScatter)->Arg(64)->Arg(256);

void BM_ProxL1Epigraph(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(19);
  Vec a = gaussian_vector(n, rng);
  for (auto _ : state) {
    auto r = prox_l1_epigraph(a, 0.1);
    benchmark::DoNotOptimize(r.v);
  }
}
BENCHMARK(BM_ProxL1Epigraph)->Arg(1024)->Arg(16384);

void BM_CcgIteration(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  DenseMatrix c = random_matrix(n, n, 29);
  LmoBlock block{NuclearEpigraphBlock{n, n, 1.0}};
  SmoothSemiLinearObjective obj = make_quadratic_objective(c.a, 1.0, 0.05);
  CcgPoint start;
  start.u.assign(n * n, 0.0);
  for (auto _ : state) {
    auto cert = ccg_solve(obj, block, 0.0, 8, start, 31);
    benchmark::DoNotOptimize(cert.delta);
  }
}
BENCHMARK(BM_CcgIteration)->Arg(32)->Arg(64);

}  // namespace

BENCHMARK_MAIN();
