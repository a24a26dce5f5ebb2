#include <algorithm>
#include <filesystem>
#include <vector>

#include "diar/embedding.hpp"
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

std::vector<double> even_starts(long n, double step = 0.01) {
  std::vector<double> starts(n);
  for (long i = 0; i < n; ++i) starts[i] = i * step;
  return starts;
}

}  // namespace

TEST_CASE("mean_pool hand values") {
  Matrix w(2, 2);
  w << 1, 2, 3, 4;
  Vector m = mean_pool(w);
  CHECK(m[0] == doctest::Approx(2.0));
  CHECK(m[1] == doctest::Approx(3.0));

  Matrix single(1, 3);
  single << 5, 6, 7;
  CHECK((mean_pool(single) - single.row(0).transpose()).norm() == 0.0);

  Matrix constant(4, 2);
  constant.rowwise() = Eigen::RowVector2d(1.5, -2.0);
  CHECK((mean_pool(constant) - Eigen::Vector2d(1.5, -2.0)).norm() == 0.0);
}

TEST_CASE("stat_pool hand values and invariants") {
  Matrix w(2, 2);
  w << 1, 2, 3, 4;
  Vector s = stat_pool(w);
  REQUIRE(s.size() == 4);
  CHECK(s[0] == doctest::Approx(2.0));
  CHECK(s[1] == doctest::Approx(3.0));
  CHECK(s[2] == doctest::Approx(1.0));  // population std
  CHECK(s[3] == doctest::Approx(1.0));

  Matrix constant(5, 3);
  constant.rowwise() = Eigen::RowVector3d(2, -1, 0.5);
  Vector cs = stat_pool(constant);
  CHECK(cs.tail(3).cwiseAbs().maxCoeff() == doctest::Approx(0.0));

  // first d components equal mean_pool exactly; deviations nonnegative;
  // row permutation leaves pooling unchanged
  rng::Xoshiro256ss gen(3);
  for (int trial = 0; trial < 20; ++trial) {
    Matrix window = random_matrix(6, 4, 100 + trial);
    Vector pooled = stat_pool(window);
    CHECK((pooled.head(4) - mean_pool(window)).cwiseAbs().maxCoeff() == 0.0);
    CHECK(pooled.tail(4).minCoeff() >= 0.0);

    std::vector<long> perm{0, 1, 2, 3, 4, 5};
    for (std::size_t i = perm.size(); i > 1; --i)
      std::swap(perm[i - 1], perm[gen.next_below(i)]);
    Matrix shuffled(6, 4);
    for (long r = 0; r < 6; ++r) shuffled.row(r) = window.row(perm[r]);
    CHECK((stat_pool(shuffled) - pooled).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((mean_pool(shuffled) - mean_pool(window)).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("sliding_extract counts, starts and errors") {
  StatPoolExtractor pool;

  Matrix voiced = random_matrix(300, 4, 1);
  EmbeddingSequence seq = sliding_extract(pool, voiced, even_starts(300), 200, 1);
  CHECK(seq.size() == 101);
  CHECK(seq.dim() == 8);
  CHECK(seq.starts[0] == doctest::Approx(0.0));
  CHECK(seq.starts[100] == doctest::Approx(1.0));

  // shift 20 with N = 200 over 400 voiced frames
  Matrix longer = random_matrix(400, 4, 2);
  EmbeddingSequence strided = sliding_extract(pool, longer, even_starts(400), 200, 20);
  CHECK(strided.size() == 11);
  for (long i = 0; i < 11; ++i)
    CHECK(strided.starts[i] == doctest::Approx(i * 20 * 0.01));

  CHECK_THROWS_AS(sliding_extract(pool, random_matrix(10, 4, 3), even_starts(10), 11, 1),
                  DataError);
}

TEST_CASE("sliding_extract count law over random geometries") {
  MeanPoolExtractor pool;
  rng::Xoshiro256ss gen(17);
  for (int trial = 0; trial < 40; ++trial) {
    const long l = 2 + static_cast<long>(gen.next_below(120));
    const long n = 1 + static_cast<long>(gen.next_below(l));
    const long shift = 1 + static_cast<long>(gen.next_below(8));
    Matrix voiced = random_matrix(l, 3, 1000 + trial);
    EmbeddingSequence seq = sliding_extract(pool, voiced, even_starts(l), n, shift);
    CHECK(seq.size() == (l - n) / shift + 1);
  }
}

TEST_CASE("test-linear extractor is deterministic per seed") {
  Matrix window = random_matrix(10, 4, 9);
  TestLinearExtractor a(4, 6, 42), b(4, 6, 42), c(4, 6, 43);
  CHECK((a.extract(window) - b.extract(window)).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.extract(window) - c.extract(window)).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("external embeddings round trip and validation") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "diar_embed_test";
  fs::create_directories(dir);
  const std::string path = (dir / "emb.dkm").string();

  EmbeddingSequence seq;
  seq.embeddings = random_matrix(5, 8, 77).cast<float>().cast<double>();
  seq.starts = even_starts(5, 0.25);
  write_embeddings(path, seq);

  EmbeddingSequence loaded = load_external_embeddings(path, 8);
  CHECK((loaded.embeddings - seq.embeddings).cwiseAbs().maxCoeff() == 0.0);
  for (int i = 0; i < 5; ++i) CHECK(loaded.starts[i] == seq.starts[i]);

  CHECK_THROWS_AS(load_external_embeddings(path, 256), FormatError);

  // non-monotone timestamps rejected
  seq.starts[3] = seq.starts[2];
  write_embeddings(path, seq);
  CHECK_THROWS_AS(load_external_embeddings(path, 8), FormatError);

  // empty payload rejected
  EmbeddingSequence empty;
  empty.embeddings = Matrix::Zero(0, 8);
  empty.starts = {};
  write_embeddings(path, empty);
  CHECK_THROWS_AS(load_external_embeddings(path, 8), FormatError);

  fs::remove_all(dir);
}
