// Serial-vs-OpenMP comparison for the three data-parallel kernels. Run with
// --benchmark_filter=pairwise (etc.) to narrow.

#include <benchmark/benchmark.h>

#include "diar/kernels.hpp"
#include "diar/rng.hpp"

using namespace diar;

namespace {

Matrix random_matrix(long rows, long cols, std::uint64_t seed) {
  rng::Xoshiro256ss gen(seed);
  Matrix m(rows, cols);
  for (long r = 0; r < rows; ++r)
    for (long c = 0; c < cols; ++c) m(r, c) = gen.next_normal();
  return m;
}

GpldaModel toy_model(long dim) {
  GpldaModel model;
  model.sigma_w = Matrix::Identity(dim, dim) * 0.5;
  model.sigma_b = Matrix::Identity(dim, dim) * 2.0;
  model.mu = Vector::Zero(dim);
  prepare_gplda_scoring(model);
  return model;
}

const long kFeatureDim = 8;

void bench_sliding_pool_serial(benchmark::State& state) {
  StatPoolExtractor extractor;
  const Matrix voiced = random_matrix(state.range(0), kFeatureDim, 1);
  for (auto _ : state) {
    Matrix out = kernels::sliding_pool_serial(extractor, voiced, 50, 1);
    benchmark::DoNotOptimize(out.data());
  }
}

void bench_sliding_pool_parallel(benchmark::State& state) {
  StatPoolExtractor extractor;
  const Matrix voiced = random_matrix(state.range(0), kFeatureDim, 1);
  for (auto _ : state) {
    Matrix out = kernels::sliding_pool_parallel(extractor, voiced, 50, 1);
    benchmark::DoNotOptimize(out.data());
  }
}

void bench_pairwise_serial(benchmark::State& state) {
  const GpldaModel model = toy_model(2 * kFeatureDim);
  const Scorer scorer{ScorerKind::kGplda, &model};
  const Matrix rows = random_matrix(state.range(0), 2 * kFeatureDim, 2);
  for (auto _ : state) {
    Matrix out = kernels::pairwise_distances_serial(scorer, rows);
    benchmark::DoNotOptimize(out.data());
  }
}

void bench_pairwise_parallel(benchmark::State& state) {
  const GpldaModel model = toy_model(2 * kFeatureDim);
  const Scorer scorer{ScorerKind::kGplda, &model};
  const Matrix rows = random_matrix(state.range(0), 2 * kFeatureDim, 2);
  for (auto _ : state) {
    Matrix out = kernels::pairwise_distances_parallel(scorer, rows);
    benchmark::DoNotOptimize(out.data());
  }
}

void bench_contour_serial(benchmark::State& state) {
  StatPoolExtractor extractor;
  const GpldaModel model = toy_model(2 * kFeatureDim);
  const Scorer scorer{ScorerKind::kGplda, &model};
  ProjectionSet projections;
  const Matrix voiced = random_matrix(state.range(0), kFeatureDim, 3);
  for (auto _ : state) {
    auto out = kernels::divergence_values_serial(extractor, projections, scorer,
                                                 voiced, 50);
    benchmark::DoNotOptimize(out.data());
  }
}

void bench_contour_parallel(benchmark::State& state) {
  StatPoolExtractor extractor;
  const GpldaModel model = toy_model(2 * kFeatureDim);
  const Scorer scorer{ScorerKind::kGplda, &model};
  ProjectionSet projections;
  const Matrix voiced = random_matrix(state.range(0), kFeatureDim, 3);
  for (auto _ : state) {
    auto out = kernels::divergence_values_parallel(extractor, projections, scorer,
                                                   voiced, 50);
    benchmark::DoNotOptimize(out.data());
  }
}

}  // namespace

BENCHMARK(bench_sliding_pool_serial)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);
BENCHMARK(bench_sliding_pool_parallel)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);
BENCHMARK(bench_pairwise_serial)->Arg(400)->Arg(1200)->Unit(benchmark::kMillisecond);
BENCHMARK(bench_pairwise_parallel)->Arg(400)->Arg(1200)->Unit(benchmark::kMillisecond);
BENCHMARK(bench_contour_serial)->Arg(1000)->Arg(3000)->Unit(benchmark::kMillisecond);
BENCHMARK(bench_contour_parallel)->Arg(1000)->Arg(3000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
