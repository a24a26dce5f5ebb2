#ifndef DIAR_EMBEDDING_HPP
#define DIAR_EMBEDDING_HPP

#include <memory>
#include <string>
#include <vector>

#include "diar/common.hpp"
#include "diar/features.hpp"

namespace diar {

enum class ExtractorKind { kStatPool, kMeanPool, kTestLinear, kExternalFile };

ExtractorKind extractor_kind_from_string(const std::string& name);
std::string to_string(ExtractorKind kind);

/// Window-level representation vectors with the start time of each analysis
/// window (P_rv).
struct EmbeddingSequence {
  Matrix embeddings;          // l'' x D
  std::vector<double> starts; // seconds, strictly increasing
  std::string source;         // extractor name, informational

  long size() const { return embeddings.rows(); }
  long dim() const { return embeddings.cols(); }
};

/// Column-wise arithmetic mean of a window.
Vector mean_pool(const Matrix& window);

/// [mean || population standard deviation], column-wise. The first d
/// components equal mean_pool exactly.
Vector stat_pool(const Matrix& window);

/// Pure mapping window -> vector. Immutable after construction.
class Extractor {
 public:
  virtual ~Extractor() = default;
  virtual Vector extract(const Matrix& window) const = 0;
  virtual long output_dim(long input_dim) const = 0;
  virtual std::string name() const = 0;
};

class MeanPoolExtractor final : public Extractor {
 public:
  Vector extract(const Matrix& window) const override { return mean_pool(window); }
  long output_dim(long input_dim) const override { return input_dim; }
  std::string name() const override { return "mean-pool"; }
};

class StatPoolExtractor final : public Extractor {
 public:
  Vector extract(const Matrix& window) const override { return stat_pool(window); }
  long output_dim(long input_dim) const override { return 2 * input_dim; }
  std::string name() const override { return "stat-pool"; }
};

/// Deterministic seeded random projection of the stat-pool vector. Exists so
/// clustering tests can control embedding geometry.
class TestLinearExtractor final : public Extractor {
 public:
  TestLinearExtractor(long input_dim, long output_dim, std::uint64_t seed);
  Vector extract(const Matrix& window) const override;
  long output_dim(long) const override { return projection_.rows(); }
  std::string name() const override { return "test-linear"; }

 private:
  Matrix projection_;  // output_dim x 2*input_dim
};

std::unique_ptr<Extractor> make_extractor(ExtractorKind kind, long input_dim,
                                          long output_dim = 0,
                                          std::uint64_t seed = 7);

/// One embedding per window of N consecutive rows of `voiced`, advancing by
/// `shift` rows. starts[i] is the start time of the window's first frame.
/// Throws DataError when fewer than N voiced rows are available.
EmbeddingSequence sliding_extract(const Extractor& extractor,
                                  const Matrix& voiced,
                                  const std::vector<double>& voiced_starts,
                                  long window_len, long shift = 1);

/// Reads an embedding matrix (io module format, start-times required) and
/// validates dimension and time monotonicity.
EmbeddingSequence load_external_embeddings(const std::string& path,
                                           long expected_dim);

void write_embeddings(const std::string& path, const EmbeddingSequence& seq);

}  // namespace diar

#endif  // DIAR_EMBEDDING_HPP
