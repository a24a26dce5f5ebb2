#ifndef DIAR_IO_HPP
#define DIAR_IO_HPP

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "diar/backend.hpp"
#include "diar/common.hpp"
#include "diar/diarize.hpp"

namespace diar {

// ---- RTTM -------------------------------------------------------------------

// One "SPEAKER" line per segment, onset/duration at 3 decimals, label in the
// name field, all other optional fields "<NA>".
void write_rttm(const Diarization& d, std::ostream& out);
void write_rttm_file(const Diarization& d, const std::string& path);
Diarization read_rttm(std::istream& in, const std::string& path_for_errors);
Diarization read_rttm_file(const std::string& path);

/// Label names used on write ("L0", "L1", ...) and expected back on read;
/// unknown names are assigned ids by first appearance.
std::string rttm_label_name(int label);

// ---- DKM1 matrix container ----------------------------------------------------

// Layout: magic "DKM1" | rows u32 LE | cols u32 LE | has_times u8 |
// [rows float64 LE times] | rows*cols float32 LE row-major payload.
// The reader rejects bad magic, short payloads and trailing bytes; writing a
// non-finite value is an error.
struct MatrixFile {
  Matrix values;
  std::optional<std::vector<double>> times;
};

void write_matrix(const std::string& path, const Matrix& values,
                  const std::vector<double>* times = nullptr);
MatrixFile read_matrix(const std::string& path);

// ---- model container ----------------------------------------------------------

// Same framing one level up: magic "DKM2" | count u32 | entries of
// {name u32+bytes | rows u32 | cols u32 | float64 payload}. Holds the
// projection chain, the GPLDA covariances and scorer metadata.
struct BackendModel {
  ProjectionSet projections;
  std::optional<GpldaModel> gplda;
  ScorerKind scorer = ScorerKind::kGplda;
};

void write_model(const std::string& path, const BackendModel& model);
BackendModel read_model(const std::string& path);

// ---- pipeline configuration -----------------------------------------------------

/// Named presets carrying the published hyperparameter sets
/// (alpha, delta, gamma, N, scorer).
struct Preset {
  std::string name;
  double alpha;
  double delta;
  double gamma;
  long window_len;
  ScorerKind scorer;
};

const std::vector<Preset>& known_presets();
const Preset* find_preset(const std::string& name);

enum class PipelineMode { kFixed, kChangePoint };

struct LoadedConfig {
  PipelineMode mode = PipelineMode::kChangePoint;
  PipelineConfig pipeline;
  FrameSpec frame;
  std::string effective_json;  // full config with defaults filled
};

/// Parses and validates a pipeline configuration document. Unknown keys are
/// rejected with their JSON path; defaults are filled and echoed back in
/// effective_json.
LoadedConfig load_config(const std::string& path);
LoadedConfig parse_config(const std::string& json_text,
                          const std::string& path_for_errors);

}  // namespace diar

#endif  // DIAR_IO_HPP
