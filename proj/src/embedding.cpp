#include "diar/embedding.hpp"

#include <cmath>

#include "diar/io.hpp"
#include "diar/kernels.hpp"
#include "diar/rng.hpp"

namespace diar {

ExtractorKind extractor_kind_from_string(const std::string& name) {
  if (name == "stat-pool") return ExtractorKind::kStatPool;
  if (name == "mean-pool") return ExtractorKind::kMeanPool;
  if (name == "test-linear") return ExtractorKind::kTestLinear;
  if (name == "external-file") return ExtractorKind::kExternalFile;
  throw ConfigError("unknown extractor kind: " + name);
}

std::string to_string(ExtractorKind kind) {
  switch (kind) {
    case ExtractorKind::kStatPool: return "stat-pool";
    case ExtractorKind::kMeanPool: return "mean-pool";
    case ExtractorKind::kTestLinear: return "test-linear";
    case ExtractorKind::kExternalFile: return "external-file";
  }
  return "?";
}

Vector mean_pool(const Matrix& window) {
  if (window.rows() < 1) throw DataError("mean_pool: empty window");
  return window.colwise().mean();
}

Vector stat_pool(const Matrix& window) {
  if (window.rows() < 1) throw DataError("stat_pool: empty window");
  const long d = window.cols();
  const Vector mean = window.colwise().mean();
  Vector out(2 * d);
  out.head(d) = mean;
  // population standard deviation (1/N)
  for (long c = 0; c < d; ++c) {
    const double var =
        (window.col(c).array() - mean[c]).square().sum() / window.rows();
    out[d + c] = std::sqrt(var);
  }
  return out;
}

TestLinearExtractor::TestLinearExtractor(long input_dim, long output_dim,
                                         std::uint64_t seed) {
  if (input_dim < 1 || output_dim < 1)
    throw ConfigError("test-linear extractor needs positive dimensions");
  rng::Xoshiro256ss gen(seed);
  projection_.resize(output_dim, 2 * input_dim);
  for (long r = 0; r < projection_.rows(); ++r)
    for (long c = 0; c < projection_.cols(); ++c)
      projection_(r, c) = gen.next_normal() / std::sqrt(2.0 * input_dim);
}

Vector TestLinearExtractor::extract(const Matrix& window) const {
  if (2 * window.cols() != projection_.cols())
    throw DataError("test-linear extractor: window dimension mismatch");
  return projection_ * stat_pool(window);
}

std::unique_ptr<Extractor> make_extractor(ExtractorKind kind, long input_dim,
                                          long output_dim, std::uint64_t seed) {
  switch (kind) {
    case ExtractorKind::kMeanPool:
      return std::make_unique<MeanPoolExtractor>();
    case ExtractorKind::kStatPool:
      return std::make_unique<StatPoolExtractor>();
    case ExtractorKind::kTestLinear:
      return std::make_unique<TestLinearExtractor>(
          input_dim, output_dim > 0 ? output_dim : 2 * input_dim, seed);
    case ExtractorKind::kExternalFile:
      throw ConfigError("external-file embeddings are loaded, not extracted");
  }
  throw ConfigError("unknown extractor kind");
}

EmbeddingSequence sliding_extract(const Extractor& extractor,
                                  const Matrix& voiced,
                                  const std::vector<double>& voiced_starts,
                                  long window_len, long shift) {
  if (window_len < 1 || shift < 1)
    throw ConfigError("sliding_extract: window and shift must be >= 1");
  const long l = voiced.rows();
  if (l < window_len)
    throw DataError("utterance too short for N: " + std::to_string(l) +
                    " voiced frames < N=" + std::to_string(window_len));
  if (static_cast<long>(voiced_starts.size()) != l)
    throw DataError("sliding_extract: starts/rows mismatch");

  const long count = (l - window_len) / shift + 1;
  EmbeddingSequence seq;
  seq.source = extractor.name();
  seq.embeddings = kernels::sliding_pool_parallel(extractor, voiced, window_len, shift);
  seq.starts.resize(count);
  for (long i = 0; i < count; ++i) seq.starts[i] = voiced_starts[i * shift];
  return seq;
}

EmbeddingSequence load_external_embeddings(const std::string& path,
                                           long expected_dim) {
  MatrixFile file = read_matrix(path);
  if (file.values.rows() == 0) throw FormatError(path, "empty embedding file");
  if (!file.times)
    throw FormatError(path, "embedding file lacks the start-time column");
  if (expected_dim > 0 && file.values.cols() != expected_dim)
    throw FormatError(path, "dimension mismatch: file has " +
                                std::to_string(file.values.cols()) +
                                ", expected " + std::to_string(expected_dim));
  const auto& times = *file.times;
  for (std::size_t i = 1; i < times.size(); ++i)
    if (times[i] <= times[i - 1])
      throw FormatError(path, "start times not strictly increasing at row " +
                                  std::to_string(i));

  EmbeddingSequence seq;
  seq.embeddings = file.values;
  seq.starts = times;
  seq.source = "external-file";
  return seq;
}

void write_embeddings(const std::string& path, const EmbeddingSequence& seq) {
  write_matrix(path, seq.embeddings, &seq.starts);
}

}  // namespace diar
