#ifndef DIAR_KERNELS_HPP
#define DIAR_KERNELS_HPP

#include <vector>

#include "diar/backend.hpp"
#include "diar/common.hpp"
#include "diar/embedding.hpp"

// Data-parallel inner loops of the pipelines. Each kernel has a serial
// reference implementation (the spec of the computation, kept for tests and
// benchmarks) and an OpenMP variant. Every output element is written to its
// own slot, so results are bit-identical for any thread count.

namespace diar::kernels {

/// Global worker cap for the *_parallel kernels. 0 = OpenMP default.
void set_threads(int n);
int threads();

// ---- sliding-window pooling ------------------------------------------------

Matrix sliding_pool_serial(const Extractor& extractor, const Matrix& voiced,
                           long window_len, long shift);
Matrix sliding_pool_parallel(const Extractor& extractor, const Matrix& voiced,
                             long window_len, long shift);

// ---- symmetric pairwise distance matrix -------------------------------------

Matrix pairwise_distances_serial(const Scorer& scorer, const Matrix& rows);
Matrix pairwise_distances_parallel(const Scorer& scorer, const Matrix& rows);

// ---- divergence contour ------------------------------------------------------

/// For each valid position i in [N, l'-N]: distance between the projected
/// embeddings of the left window [i-N, i-1] and right window [i, i+N-1].
std::vector<double> divergence_values_serial(const Extractor& extractor,
                                             const ProjectionSet& projections,
                                             const Scorer& scorer,
                                             const Matrix& voiced, long window_len);
std::vector<double> divergence_values_parallel(const Extractor& extractor,
                                               const ProjectionSet& projections,
                                               const Scorer& scorer,
                                               const Matrix& voiced,
                                               long window_len);

}  // namespace diar::kernels

#endif  // DIAR_KERNELS_HPP
