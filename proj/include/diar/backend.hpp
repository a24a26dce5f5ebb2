#ifndef DIAR_BACKEND_HPP
#define DIAR_BACKEND_HPP

#include <optional>
#include <string>
#include <vector>

#include "diar/common.hpp"

namespace diar {

/// Fixed projection chain: subtract mean -> LDA (optional) -> WCCN
/// (optional) -> whitening -> length normalization. Every matrix is stored
/// in its applied form (y = M x).
struct ProjectionSet {
  Vector mean;
  std::optional<Matrix> lda;
  std::optional<Matrix> wccn;
  std::optional<Matrix> whitener;
  bool apply_length_norm = true;

  Vector apply(const Vector& x) const;
  Matrix apply_rows(const Matrix& rows) const;
  long output_dim(long input_dim) const;
};

/// Two-covariance GPLDA: within-class covariance, between-class covariance
/// and the global mean of the training vectors.
struct GpldaModel {
  Matrix sigma_w;
  Matrix sigma_b;
  Vector mu;

  // Scoring matrices derived from (sigma_w, sigma_b); see
  // prepare_gplda_scoring.
  Matrix lambda;  // P - T^{-1}
  Matrix gamma;   // off-diagonal block of M^{-1}

  long dim() const { return sigma_w.rows(); }
};

/// Covariance regularization used before every inversion:
/// eps = 1e-6 * trace(C) / dim.
double covariance_epsilon(const Matrix& cov);

/// Fisher LDA rows = generalized eigenvectors of S_w^{-1} S_b by decreasing
/// eigenvalue. Requesting more rows than the between-class rank fills the
/// remainder with the next eigenvectors and sets *rank_warning.
Matrix train_lda(const Matrix& X, const std::vector<int>& labels, long out_dim,
                 bool* rank_warning = nullptr);

/// Transform making the average per-class covariance identity.
Matrix train_wccn(const Matrix& X, const std::vector<int>& labels);

/// Mean and C^{-1/2} of the data covariance (symmetric eigendecomposition).
void train_whitener(const Matrix& X, Vector* mean, Matrix* whitener);

/// x / ||x||2. Throws DataError on the zero vector.
Vector length_normalize(const Vector& x);

/// Closed-form moment estimation: pooled within-class covariance and the
/// class-size-weighted covariance of class means, both symmetrized and
/// PSD-projected.
GpldaModel train_gplda(const Matrix& X, const std::vector<int>& labels);

/// Fills model.lambda / model.gamma from the covariances. Called by
/// train_gplda and by the model reader.
void prepare_gplda_scoring(GpldaModel& model);

/// Eq-style two-covariance distance; larger means more likely different
/// classes. Symmetric in (x, y).
double gplda_distance(const GpldaModel& model, const Vector& x, const Vector& y);

/// <x,y> / (||x|| ||y||). Throws DataError on zero vectors.
double cosine_similarity(const Vector& x, const Vector& y);

enum class ScorerKind { kGplda, kCosine };

ScorerKind scorer_kind_from_string(const std::string& name);
std::string to_string(ScorerKind kind);

/// Distance/similarity pair with a consistent orientation: similarity is
/// -distance for GPLDA and cos for cosine (distance 1 - cos).
struct Scorer {
  ScorerKind kind = ScorerKind::kGplda;
  const GpldaModel* model = nullptr;  // required for kGplda

  double distance(const Vector& x, const Vector& y) const;
  double similarity(const Vector& x, const Vector& y) const;
};

/// Trial pairs for EER calibration; target = same class.
struct TrialSet {
  std::vector<std::pair<Vector, Vector>> target_pairs;
  std::vector<std::pair<Vector, Vector>> nontarget_pairs;
};

struct TrialScores {
  std::vector<double> target;
  std::vector<double> nontarget;
};

TrialScores score_trials(const Scorer& scorer, const TrialSet& trials);

}  // namespace diar

#endif  // DIAR_BACKEND_HPP
