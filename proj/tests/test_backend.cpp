#include <cmath>
#include <vector>

#include "diar/backend.hpp"
#include "diar/rng.hpp"
#include "doctest.h"

using namespace diar;

namespace {

// class-conditional Gaussian samples, identity covariance, means +-sep/2 e0
void two_gaussians(double separation, int per_class, std::uint64_t seed, long dim,
                   Matrix* X, std::vector<int>* labels) {
  rng::Xoshiro256ss gen(seed);
  X->resize(2 * per_class, dim);
  labels->resize(2 * per_class);
  for (int i = 0; i < 2 * per_class; ++i) {
    const int cls = i % 2;
    (*labels)[i] = cls;
    for (long c = 0; c < dim; ++c) (*X)(i, c) = gen.next_normal();
    (*X)(i, 0) += (cls == 0 ? 0.5 : -0.5) * separation;
  }
}

GpldaModel scalar_model(double sigma_w, double sigma_b) {
  GpldaModel model;
  model.sigma_w = Matrix::Constant(1, 1, sigma_w);
  model.sigma_b = Matrix::Constant(1, 1, sigma_b);
  model.mu = Vector::Zero(1);
  prepare_gplda_scoring(model);
  return model;
}

Vector scalar(double v) { return Vector::Constant(1, v); }

}  // namespace

TEST_CASE("length_normalize") {
  Vector v(2);
  v << 3, 4;
  Vector u = length_normalize(v);
  CHECK(u[0] == doctest::Approx(0.6));
  CHECK(u[1] == doctest::Approx(0.8));
  CHECK((length_normalize(u) - u).norm() < 1e-15);          // idempotent
  CHECK((length_normalize(2.5 * v) - u).norm() < 1e-15);    // scale invariant
  CHECK_THROWS_AS(length_normalize(Vector::Zero(3)), DataError);
}

TEST_CASE("train_whitener identity and diagonal cases") {
  // C = diag(4, 9) -> whitener = diag(0.5, 1/3)
  rng::Xoshiro256ss gen(9);
  Matrix X(4000, 2);
  for (long i = 0; i < X.rows(); ++i) {
    X(i, 0) = 2.0 * gen.next_normal();
    X(i, 1) = 3.0 * gen.next_normal() + 5.0;
  }
  Vector mean;
  Matrix whitener;
  train_whitener(X, &mean, &whitener);
  CHECK(mean[1] == doctest::Approx(5.0).epsilon(0.1));

  // defining property: whitened training covariance = I within 1e-6
  Matrix centered = X.rowwise() - mean.transpose();
  Matrix whitened = centered * whitener.transpose();
  Matrix cov = whitened.transpose() * whitened / X.rows();
  CHECK((cov - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-6);

  // exact diagonal case through a constructed covariance
  Matrix exact(4, 2);
  exact << 2, 0, -2, 0, 0, 3, 0, -3;  // covariance diag(2, 4.5)
  train_whitener(exact, &mean, &whitener);
  CHECK(whitener(0, 0) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-5));
  CHECK(whitener(1, 1) == doctest::Approx(1.0 / std::sqrt(4.5)).epsilon(1e-5));
  CHECK(std::abs(whitener(0, 1)) < 1e-9);
}

TEST_CASE("train_wccn scalar and defining property") {
  // 1-D, within variance 4 -> wccn = 0.5
  Matrix X(4, 1);
  X << 2, -2, 12, 8;  // class 0 mean 0 var 4; class 1 mean 10 var 4
  std::vector<int> labels{0, 0, 1, 1};
  Matrix wccn = train_wccn(X, labels);
  CHECK(wccn(0, 0) == doctest::Approx(0.5).epsilon(1e-6));

  // transformed per-class average covariance is I within 1e-6
  rng::Xoshiro256ss gen(31);
  Matrix Y(6000, 3);
  std::vector<int> ylabels(6000);
  Matrix shape(3, 3);
  shape << 2, 0.5, 0, 0, 1, 0.3, 0, 0, 0.7;
  for (long i = 0; i < Y.rows(); ++i) {
    ylabels[i] = static_cast<int>(i % 3);
    Vector z(3);
    for (int c = 0; c < 3; ++c) z[c] = gen.next_normal();
    Y.row(i) = (shape * z).transpose();
    Y(i, 0) += 4.0 * ylabels[i];
  }
  Matrix w = train_wccn(Y, ylabels);
  Matrix transformed = Y * w.transpose();
  Matrix avg_cov = Matrix::Zero(3, 3);
  for (int cls = 0; cls < 3; ++cls) {
    Matrix rows(2000, 3);
    long r = 0;
    for (long i = 0; i < Y.rows(); ++i)
      if (ylabels[i] == cls) rows.row(r++) = transformed.row(i);
    Matrix centered = rows.rowwise() - rows.colwise().mean();
    avg_cov += centered.transpose() * centered / rows.rows();
  }
  avg_cov /= 3.0;
  CHECK((avg_cov - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 0.15);

  SUBCASE("identity within-class covariance keeps wccn near I") {
    rng::Xoshiro256ss g2(77);
    Matrix Z(8000, 2);
    std::vector<int> zl(8000);
    for (long i = 0; i < Z.rows(); ++i) {
      zl[i] = static_cast<int>(i % 2);
      Z(i, 0) = g2.next_normal() + 3.0 * zl[i];
      Z(i, 1) = g2.next_normal();
    }
    Matrix wz = train_wccn(Z, zl);
    CHECK((wz - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 0.05);
  }
}

TEST_CASE("train_lda symmetric two-class axis and errors") {
  // exact-moment construction: means +-e0, within spread on axis 1 only
  Matrix exact(4, 2);
  exact << 1, 0.5, 1, -0.5, -1, 0.5, -1, -0.5;
  std::vector<int> exact_labels{0, 0, 1, 1};
  bool warn = false;
  Matrix axis = train_lda(exact, exact_labels, 1, &warn);
  CHECK(!warn);
  Vector exact_dir = axis.row(0).transpose().normalized();
  CHECK(std::abs(std::abs(exact_dir[0]) - 1.0) < 1e-6);
  CHECK(std::abs(exact_dir[1]) < 1e-6);

  Matrix X;
  std::vector<int> labels;
  two_gaussians(2.0, 3000, 13, 2, &X, &labels);
  Matrix lda = train_lda(X, labels, 1, &warn);
  CHECK(!warn);
  Vector dir = lda.row(0).transpose().normalized();
  CHECK(std::abs(std::abs(dir[0]) - 1.0) < 5e-2);  // +-e0 direction, sample noise
  CHECK(std::abs(dir[1]) < 5e-2);

  // requesting beyond the between-class rank warns but fills rows
  Matrix full = train_lda(X, labels, 2, &warn);
  CHECK(warn);
  CHECK(full.rows() == 2);

  CHECK_THROWS_AS(train_lda(X, labels, 3, nullptr), ConfigError);
  std::vector<int> one_class(labels.size(), 0);
  CHECK_THROWS_AS(train_lda(X, one_class, 1, nullptr), DataError);
}

TEST_CASE("train_gplda 1-D worked moments") {
  // class means -1 and +1, equal sizes, within variance 0.25 each
  Matrix X(8, 1);
  X << -1.5, -0.5, -1.5, -0.5, 0.5, 1.5, 0.5, 1.5;
  std::vector<int> labels{0, 0, 0, 0, 1, 1, 1, 1};
  GpldaModel model = train_gplda(X, labels);
  CHECK(model.mu[0] == doctest::Approx(0.0));
  CHECK(model.sigma_b(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(model.sigma_w(0, 0) == doctest::Approx(0.25).epsilon(1e-12));

  std::vector<int> single(8, 0);
  CHECK_THROWS_AS(train_gplda(X, single), DataError);
}

TEST_CASE("train_gplda degenerate zero-spread classes") {
  Matrix X(4, 2);
  X << 1, 2, 1, 2, 1, 2, 1, 2;  // identical everywhere
  std::vector<int> labels{0, 0, 1, 1};
  GpldaModel model = train_gplda(X, labels);
  CHECK(model.sigma_b.cwiseAbs().maxCoeff() == doctest::Approx(0.0));
  CHECK(model.sigma_w.cwiseAbs().maxCoeff() == doctest::Approx(0.0));
  // scoring degenerates to zero distances
  Vector x = X.row(0).transpose(), y = X.row(2).transpose();
  CHECK(std::abs(gplda_distance(model, x, y)) < 1e-9);
}

TEST_CASE("train_gplda separated classes have dominant between-class spread") {
  Matrix X;
  std::vector<int> labels;
  two_gaussians(8.0, 2000, 41, 3, &X, &labels);
  GpldaModel model = train_gplda(X, labels);
  Eigen::SelfAdjointEigenSolver<Matrix> eb(model.sigma_b), ew(model.sigma_w);
  CHECK(eb.eigenvalues().maxCoeff() > 5.0 * ew.eigenvalues().maxCoeff());

  // sample-moment oracle: sigma_b should be close to (sep/2)^2 on axis 0
  CHECK(model.sigma_b(0, 0) == doctest::Approx(16.0).epsilon(0.1));
  CHECK(model.sigma_w(0, 0) == doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("gplda_distance 1-D worked example") {
  GpldaModel model = scalar_model(1.0, 1.0);
  CHECK(gplda_distance(model, scalar(1.0), scalar(1.0)) ==
        doctest::Approx(-1.0 / 3.0).epsilon(1e-12));
  CHECK(gplda_distance(model, scalar(1.0), scalar(-1.0)) ==
        doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("gplda_distance symmetry and zero between-class collapse") {
  rng::Xoshiro256ss gen(51);
  Matrix X;
  std::vector<int> labels;
  two_gaussians(3.0, 500, 52, 4, &X, &labels);
  GpldaModel model = train_gplda(X, labels);

  for (int trial = 0; trial < 1000; ++trial) {
    Vector x(4), y(4);
    for (int c = 0; c < 4; ++c) {
      x[c] = gen.next_normal();
      y[c] = gen.next_normal();
    }
    CHECK(std::abs(gplda_distance(model, x, y) - gplda_distance(model, y, x)) <
          1e-9);
  }

  GpldaModel flat = scalar_model(1.7, 0.0);
  for (int trial = 0; trial < 100; ++trial) {
    const Vector x = scalar(gen.next_normal() * 3.0);
    const Vector y = scalar(gen.next_normal() * 3.0);
    CHECK(std::abs(gplda_distance(flat, x, y)) < 1e-9);
  }
}

TEST_CASE("separation widens the between-vs-within distance gap") {
  double previous_gap = -1e9;
  for (double sep : {1.0, 2.0, 4.0}) {
    double gap_acc = 0.0;
    for (std::uint64_t seed : {101, 102, 103}) {
      Matrix X;
      std::vector<int> labels;
      two_gaussians(sep, 400, seed, 3, &X, &labels);
      GpldaModel model = train_gplda(X, labels);

      rng::Xoshiro256ss gen(seed * 7);
      double within = 0.0, between = 0.0;
      const int pairs = 300;
      for (int p = 0; p < pairs; ++p) {
        const long i = gen.next_below(X.rows());
        long j = gen.next_below(X.rows());
        while (labels[j] != labels[i]) j = gen.next_below(X.rows());
        long k = gen.next_below(X.rows());
        while (labels[k] == labels[i]) k = gen.next_below(X.rows());
        within += gplda_distance(model, X.row(i).transpose(), X.row(j).transpose());
        between += gplda_distance(model, X.row(i).transpose(), X.row(k).transpose());
      }
      gap_acc += (between - within) / pairs;
    }
    const double gap = gap_acc / 3.0;
    CHECK(gap > 0.0);
    CHECK(gap > previous_gap);
    previous_gap = gap;
  }
}

TEST_CASE("cosine similarity hand values") {
  Vector a(2), b(2), c(2);
  a << 1, 0;
  b << 0, 1;
  c << 1, 1;
  CHECK(cosine_similarity(a, b) == doctest::Approx(0.0));
  CHECK(cosine_similarity(a, a) == doctest::Approx(1.0));
  CHECK(cosine_similarity(c, a) == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK_THROWS_AS(cosine_similarity(a, Vector::Zero(2)), DataError);
}

TEST_CASE("score_trials orientation and separable case") {
  TrialSet trials;
  Vector e0(2), e1(2);
  e0 << 1, 0;
  e1 << 0, 1;
  trials.target_pairs = {{e0, e0}, {e1, e1}};
  trials.nontarget_pairs = {{e0, e1}, {e1, e0}};

  Scorer cosine{ScorerKind::kCosine, nullptr};
  TrialScores scores = score_trials(cosine, trials);
  REQUIRE(scores.target.size() == 2);
  REQUIRE(scores.nontarget.size() == 2);
  CHECK(scores.target[0] == doctest::Approx(1.0));
  CHECK(scores.nontarget[0] == doctest::Approx(0.0));

  // gplda similarity is the negated distance: same-class pairs score higher
  GpldaModel model = scalar_model(0.25, 1.0);
  Scorer gplda{ScorerKind::kGplda, &model};
  CHECK(gplda.similarity(scalar(1.0), scalar(1.0)) >
        gplda.similarity(scalar(1.0), scalar(-1.0)));

  TrialSet empty;
  CHECK_THROWS_AS(score_trials(cosine, empty), DataError);
}

TEST_CASE("projection chain composition order and output dim") {
  ProjectionSet proj;
  proj.mean = Vector::Constant(3, 1.0);
  Matrix lda(2, 3);
  lda << 1, 0, 0, 0, 1, 0;
  proj.lda = lda;
  proj.whitener = (Matrix(2, 2) << 2, 0, 0, 4).finished();
  proj.apply_length_norm = true;

  Vector x(3);
  x << 2, 1.5, 9;  // -> centered (1, .5, 8) -> lda (1, .5) -> whiten (2, 2)
  Vector y = proj.apply(x);
  CHECK(proj.output_dim(3) == 2);
  CHECK(y[0] == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK(y[1] == doctest::Approx(1.0 / std::sqrt(2.0)));

  proj.apply_length_norm = false;
  Vector raw = proj.apply(x);
  CHECK(raw[0] == doctest::Approx(2.0));
  CHECK(raw[1] == doctest::Approx(2.0));
}
