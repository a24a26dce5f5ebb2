#include "diar/backend.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace diar {

namespace {

constexpr double kEpsScale = 1e-6;

struct ClassStats {
  std::vector<std::vector<long>> members;  // row indices per class
  std::vector<Vector> means;
  Vector global_mean;
};

ClassStats collect_classes(const Matrix& X, const std::vector<int>& labels) {
  if (X.rows() == 0) throw DataError("no training vectors");
  if (static_cast<long>(labels.size()) != X.rows())
    throw DataError("labels/rows mismatch");

  std::map<int, std::vector<long>> by_label;
  for (long i = 0; i < X.rows(); ++i) by_label[labels[i]].push_back(i);

  ClassStats stats;
  for (auto& [label, rows] : by_label) stats.members.push_back(std::move(rows));
  stats.means.reserve(stats.members.size());
  for (const auto& rows : stats.members) {
    Vector mean = Vector::Zero(X.cols());
    for (long r : rows) mean += X.row(r).transpose();
    stats.means.push_back(mean / rows.size());
  }
  stats.global_mean = X.colwise().mean();
  return stats;
}

Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

Matrix psd_project(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetrize(m));
  Vector values = eig.eigenvalues().cwiseMax(0.0);
  return eig.eigenvectors() * values.asDiagonal() * eig.eigenvectors().transpose();
}

Matrix regularized(const Matrix& cov) {
  Matrix out = symmetrize(cov);
  out.diagonal().array() += covariance_epsilon(out);
  return out;
}

// Inversion regularizes lazily: a well-conditioned matrix is inverted as-is
// (the scoring identities must hold to near machine precision), +eps I is the
// fallback for singular input, and failure after that is an error.
Matrix invert_spd(const Matrix& m, const char* what) {
  const Matrix sym = symmetrize(m);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
  const double max_ev = eig.eigenvalues().maxCoeff();
  const double min_ev = eig.eigenvalues().minCoeff();
  if (eig.info() == Eigen::Success && min_ev > 1e-12 * std::max(max_ev, 1e-300))
    return eig.eigenvectors() * eig.eigenvalues().cwiseInverse().asDiagonal() *
           eig.eigenvectors().transpose();

  Eigen::LDLT<Matrix> ldlt(regularized(sym));
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
    throw DataError(std::string(what) + ": covariance not invertible after regularization");
  return ldlt.solve(Matrix::Identity(m.rows(), m.cols()));
}

}  // namespace

double covariance_epsilon(const Matrix& cov) {
  return kEpsScale * cov.trace() / cov.rows();
}

Vector ProjectionSet::apply(const Vector& x) const {
  Vector y = x;
  if (mean.size() > 0) y -= mean;
  if (lda) y = (*lda) * y;
  if (wccn) y = (*wccn) * y;
  if (whitener) y = (*whitener) * y;
  if (apply_length_norm) y = length_normalize(y);
  return y;
}

Matrix ProjectionSet::apply_rows(const Matrix& rows) const {
  Matrix out(rows.rows(), output_dim(rows.cols()));
  for (long i = 0; i < rows.rows(); ++i)
    out.row(i) = apply(rows.row(i).transpose()).transpose();
  return out;
}

long ProjectionSet::output_dim(long input_dim) const {
  long d = input_dim;
  if (lda) d = lda->rows();
  if (wccn) d = wccn->rows();
  if (whitener) d = whitener->rows();
  return d;
}

Matrix train_lda(const Matrix& X, const std::vector<int>& labels, long out_dim,
                 bool* rank_warning) {
  const ClassStats stats = collect_classes(X, labels);
  const long n_classes = static_cast<long>(stats.members.size());
  const long dim = X.cols();
  if (n_classes < 2) throw DataError("train_lda: need at least 2 classes");
  if (out_dim < 1 || out_dim > dim)
    throw ConfigError("train_lda: out_dim must be in [1, D]");

  Matrix s_w = Matrix::Zero(dim, dim);
  Matrix s_b = Matrix::Zero(dim, dim);
  for (std::size_t c = 0; c < stats.members.size(); ++c) {
    for (long r : stats.members[c]) {
      const Vector d = X.row(r).transpose() - stats.means[c];
      s_w += d * d.transpose();
    }
    const Vector m = stats.means[c] - stats.global_mean;
    s_b += static_cast<double>(stats.members[c].size()) * m * m.transpose();
  }
  s_w /= X.rows();
  s_b /= X.rows();

  s_w = regularized(s_w);
  Eigen::LDLT<Matrix> check(s_w);
  if (check.info() != Eigen::Success || !check.isPositive())
    throw DataError("train_lda: singular within-class scatter");

  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> eig(symmetrize(s_b), s_w);
  if (eig.info() != Eigen::Success)
    throw DataError("train_lda: generalized eigendecomposition failed");

  // eigenvalues ascend; take the top out_dim as rows
  Matrix lda(out_dim, dim);
  for (long k = 0; k < out_dim; ++k)
    lda.row(k) = eig.eigenvectors().col(dim - 1 - k).transpose();

  if (rank_warning) *rank_warning = out_dim > n_classes - 1;
  return lda;
}

Matrix train_wccn(const Matrix& X, const std::vector<int>& labels) {
  const ClassStats stats = collect_classes(X, labels);
  if (stats.members.size() < 2) throw DataError("train_wccn: need at least 2 classes");
  const long dim = X.cols();

  Matrix avg_cov = Matrix::Zero(dim, dim);
  for (std::size_t c = 0; c < stats.members.size(); ++c) {
    const auto& rows = stats.members[c];
    if (rows.size() < 2)
      throw DataError("train_wccn: every class needs at least 2 samples");
    Matrix cov = Matrix::Zero(dim, dim);
    for (long r : rows) {
      const Vector d = X.row(r).transpose() - stats.means[c];
      cov += d * d.transpose();
    }
    avg_cov += cov / rows.size();
  }
  avg_cov /= stats.members.size();

  const Matrix inv = invert_spd(avg_cov, "train_wccn");
  Eigen::LLT<Matrix> llt(symmetrize(inv));
  if (llt.info() != Eigen::Success)
    throw DataError("train_wccn: Cholesky of the inverse covariance failed");
  // stored in applied form: y = L^T x makes the within-class covariance I
  return Matrix(llt.matrixL()).transpose();
}

void train_whitener(const Matrix& X, Vector* mean, Matrix* whitener) {
  if (X.rows() < 2) throw DataError("train_whitener: need at least 2 samples");
  *mean = X.colwise().mean();
  const Matrix centered = X.rowwise() - mean->transpose();
  Matrix cov = symmetrize(centered.transpose() * centered / X.rows());

  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
  if (eig.info() != Eigen::Success)
    throw DataError("train_whitener: eigendecomposition failed");
  if (eig.eigenvalues().minCoeff() <= 1e-12 * std::max(eig.eigenvalues().maxCoeff(), 0.0)) {
    eig.compute(regularized(cov));
    if (eig.info() != Eigen::Success || eig.eigenvalues().minCoeff() <= 0.0)
      throw DataError("train_whitener: degenerate covariance");
  }
  *whitener = eig.eigenvectors() *
              eig.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
              eig.eigenvectors().transpose();
}

Vector length_normalize(const Vector& x) {
  const double norm = x.norm();
  if (norm <= 0.0) throw DataError("length_normalize: zero vector");
  return x / norm;
}

GpldaModel train_gplda(const Matrix& X, const std::vector<int>& labels) {
  const ClassStats stats = collect_classes(X, labels);
  if (stats.members.size() < 2)
    throw DataError("train_gplda: need at least 2 classes");
  const long dim = X.cols();
  const double n_total = static_cast<double>(X.rows());

  Matrix sigma_w = Matrix::Zero(dim, dim);
  Matrix sigma_b = Matrix::Zero(dim, dim);
  for (std::size_t c = 0; c < stats.members.size(); ++c) {
    if (stats.members[c].size() < 2)
      throw DataError("train_gplda: every class needs at least 2 samples");
    for (long r : stats.members[c]) {
      const Vector d = X.row(r).transpose() - stats.means[c];
      sigma_w += d * d.transpose();
    }
    const Vector m = stats.means[c] - stats.global_mean;
    sigma_b += static_cast<double>(stats.members[c].size()) * m * m.transpose();
  }

  GpldaModel model;
  model.mu = stats.global_mean;
  model.sigma_w = psd_project(sigma_w / n_total);
  model.sigma_b = psd_project(sigma_b / n_total);
  prepare_gplda_scoring(model);
  return model;
}

void prepare_gplda_scoring(GpldaModel& model) {
  // d(x,y) = [x y]^T M^{-1} [x y] - x^T T^{-1} x - y^T T^{-1} y with
  // M = [[T, B], [B, T]], T = sigma_w + sigma_b, B = sigma_b. The persymmetric
  // block structure gives M^{-1} = [[P, Q], [Q, P]] with
  // P = (T - B T^{-1} B)^{-1} and Q = -T^{-1} B P, so the score reduces to
  // x^T (P - T^{-1}) x + y^T (P - T^{-1}) y + 2 x^T Q y.
  const Matrix t = model.sigma_w + model.sigma_b;
  const Matrix t_inv = invert_spd(t, "gplda");
  const Matrix schur = t - model.sigma_b * t_inv * model.sigma_b;
  const Matrix p = invert_spd(schur, "gplda");
  const Matrix q = -t_inv * model.sigma_b * p;
  model.lambda = symmetrize(p - t_inv);
  model.gamma = symmetrize(q);
}

double gplda_distance(const GpldaModel& model, const Vector& x, const Vector& y) {
  if (model.lambda.rows() != x.size() || x.size() != y.size())
    throw DataError("gplda_distance: dimension mismatch");
  return x.dot(model.lambda * x) + y.dot(model.lambda * y) +
         2.0 * x.dot(model.gamma * y);
}

double cosine_similarity(const Vector& x, const Vector& y) {
  const double nx = x.norm(), ny = y.norm();
  if (nx <= 0.0 || ny <= 0.0) throw DataError("cosine_similarity: zero vector");
  return x.dot(y) / (nx * ny);
}

ScorerKind scorer_kind_from_string(const std::string& name) {
  if (name == "gplda") return ScorerKind::kGplda;
  if (name == "cosine") return ScorerKind::kCosine;
  throw ConfigError("unknown scorer: " + name);
}

std::string to_string(ScorerKind kind) {
  return kind == ScorerKind::kGplda ? "gplda" : "cosine";
}

double Scorer::distance(const Vector& x, const Vector& y) const {
  if (kind == ScorerKind::kGplda) {
    if (!model) throw ConfigError("gplda scorer without a model");
    return gplda_distance(*model, x, y);
  }
  return 1.0 - cosine_similarity(x, y);
}

double Scorer::similarity(const Vector& x, const Vector& y) const {
  if (kind == ScorerKind::kGplda) return -distance(x, y);
  return cosine_similarity(x, y);
}

TrialScores score_trials(const Scorer& scorer, const TrialSet& trials) {
  if (trials.target_pairs.empty() || trials.nontarget_pairs.empty())
    throw DataError("score_trials: need at least one target and one nontarget pair");
  TrialScores scores;
  scores.target.reserve(trials.target_pairs.size());
  scores.nontarget.reserve(trials.nontarget_pairs.size());
  for (const auto& [x, y] : trials.target_pairs)
    scores.target.push_back(scorer.similarity(x, y));
  for (const auto& [x, y] : trials.nontarget_pairs)
    scores.nontarget.push_back(scorer.similarity(x, y));
  return scores;
}

}  // namespace diar
