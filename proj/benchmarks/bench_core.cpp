#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "qst/estimator.hpp"
#include "qst/pauli.hpp"
#include "qst/state.hpp"

namespace {

using namespace qst;

std::vector<PauliString> paulis(int n, Rng& rng) {
  std::vector<PauliString> out;
  for (int i = 0; i < 64; ++i) out.push_back(sample_uniform_pauli(n, rng));
  return out;
}

// Args: n, r.
void BM_ApplyPauli(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const int r = static_cast<int>(state.range(1));
  Rng rng(7);
  CMatrix m = complex_gaussian(std::size_t{1} << n, static_cast<std::size_t>(r), 1.0, rng);
  const auto ws = paulis(n, rng);
  std::size_t k = 0;
  for (auto _ : state) {
    apply_pauli_inplace(ws[k++ % ws.size()], m);
    benchmark::DoNotOptimize(m.data());
  }
  state.SetItemsProcessed(state.iterations() * m.size());
}
BENCHMARK(BM_ApplyPauli)->ArgsProduct({benchmark::CreateDenseRange(8, 14, 1), {1, 2, 4}});

// Args: n, r, B.
void BM_SgdStep(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const int r = static_cast<int>(state.range(1));
  const int b = static_cast<int>(state.range(2));
  Rng rng(11);
  const std::size_t d = std::size_t{1} << n;
  CMatrix u = complex_gaussian(d, static_cast<std::size_t>(r), 1.0 / std::sqrt(double(d)), rng);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  Batch batch;
  for (int i = 0; i < b; ++i) batch.push_back({sample_uniform_pauli(n, rng), uni(rng), std::nullopt, 0.0});
  CMatrix grad, scratch;
  for (auto _ : state) {
    benchmark::DoNotOptimize(loss_and_gradient(u, batch, grad, scratch));
    u.noalias() -= 1e-9 * grad;
  }
  state.SetItemsProcessed(state.iterations() * b);
}
BENCHMARK(BM_SgdStep)->ArgsProduct({{8, 10, 12, 14}, {1, 2, 4}, {1, 8, 64}});

}  // namespace

BENCHMARK_MAIN();
