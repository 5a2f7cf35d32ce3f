#include <benchmark/benchmark.h>

#include "edr/data_io.hpp"
#include "edr/dr_kernel.hpp"
#include "edr/dr_linear.hpp"
#include "edr/graph.hpp"
#include "edr/pipeline.hpp"
#include "edr/spectral.hpp"
#include "edr/tensor.hpp"

using namespace edr;

namespace {

Tensor noise(const Shape& s, std::uint64_t seed) {
  Rng rng(seed);
  Tensor t(s);
  for (double& v : t.data()) v = rng.normal();
  return t;
}

DataSet labelled(std::size_t side, std::size_t n, std::uint64_t seed) {
  Tensor x = noise(Shape{side, side, n}, seed);
  std::vector<int> labels(n);
  for (std::size_t j = 0; j < n; ++j) {
    labels[j] = static_cast<int>(j % 10);
    x[(labels[j] * 7) % (side * side) + side * side * j] += 4.0;  // one hot pixel per class
  }
  return DataSet(std::move(x), std::move(labels));
}

void BM_EinsteinProduct(benchmark::State& state) {
  const auto e = static_cast<std::size_t>(state.range(0));
  Tensor a = noise(Shape{e, e, e, e}, 1);
  Tensor b = noise(Shape{e, e, e}, 2);
  for (auto _ : state) benchmark::DoNotOptimize(einstein_product(a, b, 2));
}
BENCHMARK(BM_EinsteinProduct)->Arg(8)->Arg(16)->Arg(28);

void BM_ModeProduct(benchmark::State& state) {
  const auto e = static_cast<std::size_t>(state.range(0));
  Tensor x = noise(Shape{e, e, 100}, 3);
  Matrix u = noise(Shape{e, e}, 4).matrix(1);
  for (auto _ : state) benchmark::DoNotOptimize(m_mode_product(x, u, 2));
}
BENCHMARK(BM_ModeProduct)->Arg(16)->Arg(28);

void BM_SymEig(benchmark::State& state) {
  const auto n = static_cast<Eigen::Index>(state.range(0));
  Matrix a = noise(Shape{static_cast<std::size_t>(n), static_cast<std::size_t>(n)}, 5).matrix(1);
  Matrix s = a + a.transpose();
  for (auto _ : state) benchmark::DoNotOptimize(sym_eig(s));
}
BENCHMARK(BM_SymEig)->Arg(100)->Arg(300)->Arg(600)->Unit(benchmark::kMillisecond);

void BM_GaussianGraph(benchmark::State& state) {
  Tensor x = noise(Shape{28, 28, static_cast<std::size_t>(state.range(0))}, 6);
  for (auto _ : state) benchmark::DoNotOptimize(gaussian_weights(pairwise_sq_dists(x)));
}
BENCHMARK(BM_GaussianGraph)->Arg(200)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_LleWeights(benchmark::State& state) {
  Tensor x = noise(Shape{28, 28, static_cast<std::size_t>(state.range(0))}, 7);
  for (auto _ : state) benchmark::DoNotOptimize(lle_weights(x, 7));
}
BENCHMARK(BM_LleWeights)->Arg(200)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_Fit(benchmark::State& state, const char* id) {
  DataSet ds = labelled(28, static_cast<std::size_t>(state.range(0)), 8);
  MethodConfig m = parse_method_id(id);
  m.graph.supervised = true;
  for (auto _ : state) benchmark::DoNotOptimize(fit_method(m, ds, 25));
}
BENCHMARK_CAPTURE(BM_Fit, pca, "pca-e")->Arg(200)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Fit, olpp, "olpp-e")->Arg(200)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Fit, onpp, "onpp-e")->Arg(200)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Fit, olpp_mw, "olpp-mw")->Arg(200)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Fit, lle, "lle-e")->Arg(200)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_KernelPca(benchmark::State& state) {
  Tensor x = noise(Shape{28, 28, static_cast<std::size_t>(state.range(0))}, 9);
  for (auto _ : state) benchmark::DoNotOptimize(fit_kpca(gram(x, {KernelKind::gaussian}), 25));
}
BENCHMARK(BM_KernelPca)->Arg(200)->Arg(600)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
