#include <vector>

#include "diar/kernels.hpp"
#include "diar/rng.hpp"
#include "doctest.h"

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

}  // namespace

TEST_CASE("sliding pool: parallel output is bit-identical to serial") {
  StatPoolExtractor pool;
  Matrix voiced = random_matrix(257, 6, 1);
  for (long shift : {1L, 3L}) {
    Matrix serial = kernels::sliding_pool_serial(pool, voiced, 40, shift);
    Matrix parallel = kernels::sliding_pool_parallel(pool, voiced, 40, shift);
    REQUIRE(serial.rows() == parallel.rows());
    CHECK((serial - parallel).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("pairwise distances: parallel output is bit-identical to serial") {
  GpldaModel model = toy_model(5);
  Scorer gplda{ScorerKind::kGplda, &model};
  Scorer cosine{ScorerKind::kCosine, nullptr};
  Matrix rows = random_matrix(61, 5, 2);

  for (const Scorer& scorer : {gplda, cosine}) {
    Matrix serial = kernels::pairwise_distances_serial(scorer, rows);
    Matrix parallel = kernels::pairwise_distances_parallel(scorer, rows);
    CHECK((serial - parallel).cwiseAbs().maxCoeff() == 0.0);
    CHECK((serial - serial.transpose()).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("divergence values: parallel output is bit-identical to serial") {
  StatPoolExtractor pool;
  GpldaModel model = toy_model(12);  // 2 * feature dim
  Scorer scorer{ScorerKind::kGplda, &model};
  ProjectionSet identity;  // lnorm only
  Matrix voiced = random_matrix(130, 6, 3);

  auto serial =
      kernels::divergence_values_serial(pool, identity, scorer, voiced, 20);
  auto parallel =
      kernels::divergence_values_parallel(pool, identity, scorer, voiced, 20);
  REQUIRE(serial.size() == parallel.size());
  CHECK(serial.size() == 130 - 40 + 1);
  for (std::size_t i = 0; i < serial.size(); ++i) CHECK(serial[i] == parallel[i]);
}

TEST_CASE("thread cap does not change results") {
  StatPoolExtractor pool;
  Matrix voiced = random_matrix(100, 4, 4);
  Matrix base = kernels::sliding_pool_parallel(pool, voiced, 10, 1);
  for (int t : {1, 2, 3}) {
    kernels::set_threads(t);
    Matrix m = kernels::sliding_pool_parallel(pool, voiced, 10, 1);
    CHECK((m - base).cwiseAbs().maxCoeff() == 0.0);
  }
  kernels::set_threads(0);
}
