#include "greedynet/linalg.hpp"
#include "greedynet/pursuit.hpp"
#include "greedynet/random.hpp"
#include "greedynet/synthetic.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace greedynet;

struct Problem {
  Dictionary dict;
  Matrix signals;
};

Problem make_problem(Index n, Index m, Index count, Index k) {
  const Matrix d = make_dct_dictionary(n, m);
  const LabeledDataset data = gen_dataset(d, {k}, count, 0.04, 1);
  return {Dictionary(d), data.noisy};
}

// Signal-by-signal OMP against the shared-Gram batch variant on the same data.
void BM_OmpPerSignal(benchmark::State& state) {
  const Index s = state.range(0);
  const Problem p = make_problem(100, 400, 256, 10);
  const PursuitConfig cfg{s, 0.0, StopMode::ExactCardinality};
  for (auto _ : state) {
    for (Index j = 0; j < p.signals.cols(); ++j) {
      benchmark::DoNotOptimize(omp(p.dict, p.signals.col(j), cfg));
    }
  }
  state.SetItemsProcessed(state.iterations() * p.signals.cols());
}
BENCHMARK(BM_OmpPerSignal)->Arg(5)->Arg(15)->Arg(30)->Unit(benchmark::kMillisecond);

void BM_BatchOmp(benchmark::State& state) {
  const Index s = state.range(0);
  const Problem p = make_problem(100, 400, 256, 10);
  const PursuitConfig cfg{s, 0.0, StopMode::ExactCardinality};
  for (auto _ : state) {
    benchmark::DoNotOptimize(batch_omp(p.dict, p.signals, cfg));
  }
  state.SetItemsProcessed(state.iterations() * p.signals.cols());
}
BENCHMARK(BM_BatchOmp)->Arg(5)->Arg(15)->Arg(30)->Unit(benchmark::kMillisecond);

// Growing a Cholesky factor one column at a time versus refactoring each step.
void BM_CholeskyAppend(benchmark::State& state) {
  const Index k = state.range(0);
  Rng rng(2);
  Matrix a(2 * k, k);
  for (Index i = 0; i < a.size(); ++i) a.data()[i] = standard_normal(rng);
  const Matrix gram = a.transpose() * a;
  for (auto _ : state) {
    CholFactor f(k);
    for (Index j = 0; j < k; ++j) {
      f.append(gram.col(j).head(j), gram(j, j));
    }
    benchmark::DoNotOptimize(f);
  }
}
BENCHMARK(BM_CholeskyAppend)->RangeMultiplier(2)->Range(8, 128);

void BM_CholeskyRefactor(benchmark::State& state) {
  const Index k = state.range(0);
  Rng rng(2);
  Matrix a(2 * k, k);
  for (Index i = 0; i < a.size(); ++i) a.data()[i] = standard_normal(rng);
  const Matrix gram = a.transpose() * a;
  for (auto _ : state) {
    for (Index j = 1; j <= k; ++j) {
      benchmark::DoNotOptimize(cholesky(gram.topLeftCorner(j, j)));
    }
  }
}
BENCHMARK(BM_CholeskyRefactor)->RangeMultiplier(2)->Range(8, 128);

} // namespace
