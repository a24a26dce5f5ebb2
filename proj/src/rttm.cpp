#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

#include "diar/io.hpp"

namespace diar {

std::string rttm_label_name(int label) { return "L" + std::to_string(label); }

void write_rttm(const Diarization& d, std::ostream& out) {
  char onset[32], duration[32];
  for (const auto& seg : d.segments) {
    std::snprintf(onset, sizeof(onset), "%.3f", seg.onset);
    std::snprintf(duration, sizeof(duration), "%.3f", seg.duration);
    out << "SPEAKER " << d.utterance_id << " 1 " << onset << ' ' << duration
        << " <NA> <NA> " << rttm_label_name(seg.label) << " <NA> <NA>\n";
  }
}

void write_rttm_file(const Diarization& d, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError(path, "cannot open for writing");
  write_rttm(d, out);
  if (!out) throw FormatError(path, "write failed");
}

Diarization read_rttm(std::istream& in, const std::string& path) {
  std::vector<Segment> segments;
  std::string utterance_id;
  std::map<std::string, int> label_ids;

  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::vector<std::string> tokens;
    std::string token;
    while (fields >> token) tokens.push_back(token);
    if (tokens.empty()) continue;
    if (tokens.size() != 10)
      throw FormatError(path, line_no,
                        "expected 10 fields, got " + std::to_string(tokens.size()));
    if (tokens[0] != "SPEAKER")
      throw FormatError(path, line_no, "unexpected record type '" + tokens[0] + "'");
    if (utterance_id.empty())
      utterance_id = tokens[1];
    else if (utterance_id != tokens[1])
      throw FormatError(path, line_no, "multiple utterance ids in one file");

    Segment seg;
    try {
      seg.onset = std::stod(tokens[3]);
      seg.duration = std::stod(tokens[4]);
    } catch (const std::exception&) {
      throw FormatError(path, line_no, "non-numeric onset or duration");
    }
    if (!(seg.duration > 0.0))
      throw FormatError(path, line_no, "non-positive duration");
    if (seg.onset < 0.0) throw FormatError(path, line_no, "negative onset");

    const std::string& name = tokens[7];
    auto it = label_ids.find(name);
    if (it == label_ids.end()) {
      // L<k> names keep their id; anything else is numbered by appearance
      int id = -1;
      if (name.size() > 1 && name[0] == 'L') {
        bool digits = true;
        for (std::size_t i = 1; i < name.size(); ++i)
          digits = digits && std::isdigit(static_cast<unsigned char>(name[i]));
        if (digits) id = std::stoi(name.substr(1));
      }
      if (id < 0) {
        id = 0;
        for (const auto& [key, value] : label_ids) id = std::max(id, value + 1);
      }
      it = label_ids.emplace(name, id).first;
    }
    seg.label = it->second;
    segments.push_back(seg);
  }
  if (segments.empty()) throw FormatError(path, "no RTTM records");
  return Diarization::from_segments(std::move(utterance_id), std::move(segments));
}

Diarization read_rttm_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(path, "cannot open file");
  return read_rttm(in, path);
}

}  // namespace diar
