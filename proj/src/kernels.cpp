#include "diar/kernels.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace diar::kernels {

namespace {
int g_threads = 0;  // 0 = library default
}

void set_threads(int n) { g_threads = n < 0 ? 0 : n; }

int threads() {
#ifdef _OPENMP
  return g_threads > 0 ? g_threads : omp_get_max_threads();
#else
  return 1;
#endif
}

Matrix sliding_pool_serial(const Extractor& extractor, const Matrix& voiced,
                           long window_len, long shift) {
  const long count = (voiced.rows() - window_len) / shift + 1;
  Matrix out(count, extractor.output_dim(voiced.cols()));
  for (long i = 0; i < count; ++i)
    out.row(i) = extractor.extract(voiced.middleRows(i * shift, window_len)).transpose();
  return out;
}

Matrix sliding_pool_parallel(const Extractor& extractor, const Matrix& voiced,
                             long window_len, long shift) {
  const long count = (voiced.rows() - window_len) / shift + 1;
  Matrix out(count, extractor.output_dim(voiced.cols()));
#pragma omp parallel for schedule(static) num_threads(threads())
  for (long i = 0; i < count; ++i)
    out.row(i) = extractor.extract(voiced.middleRows(i * shift, window_len)).transpose();
  return out;
}

Matrix pairwise_distances_serial(const Scorer& scorer, const Matrix& rows) {
  const long n = rows.rows();
  Matrix dist = Matrix::Zero(n, n);
  for (long i = 0; i < n; ++i)
    for (long j = i + 1; j < n; ++j) {
      const double d = scorer.distance(rows.row(i).transpose(), rows.row(j).transpose());
      dist(i, j) = d;
      dist(j, i) = d;
    }
  return dist;
}

Matrix pairwise_distances_parallel(const Scorer& scorer, const Matrix& rows) {
  const long n = rows.rows();
  Matrix dist = Matrix::Zero(n, n);
#pragma omp parallel for schedule(dynamic, 8) num_threads(threads())
  for (long i = 0; i < n; ++i)
    for (long j = i + 1; j < n; ++j) {
      const double d = scorer.distance(rows.row(i).transpose(), rows.row(j).transpose());
      dist(i, j) = d;
      dist(j, i) = d;
    }
  return dist;
}

namespace {

inline double divergence_at(const Extractor& extractor,
                            const ProjectionSet& projections,
                            const Scorer& scorer, const Matrix& voiced,
                            long window_len, long pos) {
  const Vector left =
      projections.apply(extractor.extract(voiced.middleRows(pos - window_len, window_len)));
  const Vector right =
      projections.apply(extractor.extract(voiced.middleRows(pos, window_len)));
  return scorer.distance(left, right);
}

}  // namespace

std::vector<double> divergence_values_serial(const Extractor& extractor,
                                             const ProjectionSet& projections,
                                             const Scorer& scorer,
                                             const Matrix& voiced, long window_len) {
  const long l = voiced.rows();
  const long count = l - 2 * window_len + 1;
  std::vector<double> values(count);
  for (long k = 0; k < count; ++k)
    values[k] = divergence_at(extractor, projections, scorer, voiced, window_len,
                              window_len + k);
  return values;
}

std::vector<double> divergence_values_parallel(const Extractor& extractor,
                                               const ProjectionSet& projections,
                                               const Scorer& scorer,
                                               const Matrix& voiced,
                                               long window_len) {
  const long l = voiced.rows();
  const long count = l - 2 * window_len + 1;
  std::vector<double> values(count);
#pragma omp parallel for schedule(static) num_threads(threads())
  for (long k = 0; k < count; ++k)
    values[k] = divergence_at(extractor, projections, scorer, voiced, window_len,
                              window_len + k);
  return values;
}

}  // namespace diar::kernels
