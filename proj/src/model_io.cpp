#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <vector>

#include "diar/io.hpp"

namespace diar {

// DKM2: named float64 matrices. Entry = name(u32 len + bytes) | rows u32 |
// cols u32 | row-major float64 payload. Scalars travel as 1x1 matrices.

namespace {

constexpr char kMagic[4] = {'D', 'K', 'M', '2'};

void put_u32(std::ofstream& out, std::uint32_t v) {
  char buf[4];
  std::memcpy(buf, &v, 4);
  out.write(buf, 4);
}

std::uint32_t get_u32(std::ifstream& in, const std::string& path) {
  char buf[4];
  if (!in.read(buf, 4)) throw FormatError(path, "truncated container");
  std::uint32_t v;
  std::memcpy(&v, buf, 4);
  return v;
}

void put_entry(std::ofstream& out, const std::string& name, const Matrix& m) {
  put_u32(out, static_cast<std::uint32_t>(name.size()));
  out.write(name.data(), static_cast<std::streamsize>(name.size()));
  put_u32(out, static_cast<std::uint32_t>(m.rows()));
  put_u32(out, static_cast<std::uint32_t>(m.cols()));
  for (long r = 0; r < m.rows(); ++r)
    out.write(reinterpret_cast<const char*>(m.row(r).eval().data()),
              static_cast<std::streamsize>(m.cols() * sizeof(double)));
}

Matrix scalar(double v) {
  Matrix m(1, 1);
  m(0, 0) = v;
  return m;
}

}  // namespace

void write_model(const std::string& path, const BackendModel& model) {
  std::vector<std::pair<std::string, Matrix>> entries;
  if (model.projections.mean.size() > 0)
    entries.emplace_back("mean", model.projections.mean.transpose());
  if (model.projections.lda) entries.emplace_back("lda", *model.projections.lda);
  if (model.projections.wccn) entries.emplace_back("wccn", *model.projections.wccn);
  if (model.projections.whitener)
    entries.emplace_back("whitener", *model.projections.whitener);
  entries.emplace_back("lnorm", scalar(model.projections.apply_length_norm ? 1.0 : 0.0));
  entries.emplace_back("scorer", scalar(model.scorer == ScorerKind::kGplda ? 0.0 : 1.0));
  if (model.gplda) {
    entries.emplace_back("sigma_w", model.gplda->sigma_w);
    entries.emplace_back("sigma_b", model.gplda->sigma_b);
    entries.emplace_back("mu", model.gplda->mu.transpose());
  }

  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError(path, "cannot open for writing");
  out.write(kMagic, 4);
  put_u32(out, static_cast<std::uint32_t>(entries.size()));
  for (const auto& [name, matrix] : entries) put_entry(out, name, matrix);
  if (!out) throw FormatError(path, "write failed");
}

BackendModel read_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(path, "cannot open file");

  char magic[4];
  if (!in.read(magic, 4)) throw FormatError(path, "empty file");
  if (std::memcmp(magic, kMagic, 4) != 0) throw FormatError(path, "bad magic");

  const std::uint32_t count = get_u32(in, path);
  if (count > 64) throw FormatError(path, "implausible entry count");

  std::map<std::string, Matrix> entries;
  for (std::uint32_t e = 0; e < count; ++e) {
    const std::uint32_t name_len = get_u32(in, path);
    if (name_len > 256) throw FormatError(path, "implausible entry name length");
    std::string name(name_len, '\0');
    if (!in.read(name.data(), name_len)) throw FormatError(path, "truncated entry name");
    const std::uint32_t rows = get_u32(in, path);
    const std::uint32_t cols = get_u32(in, path);
    if (rows > (1u << 20) || cols > (1u << 20))
      throw FormatError(path, "implausible entry dimensions");
    Matrix m(rows, cols);
    std::vector<double> row(cols);
    for (std::uint32_t r = 0; r < rows; ++r) {
      if (!in.read(reinterpret_cast<char*>(row.data()),
                   static_cast<std::streamsize>(cols * sizeof(double))))
        throw FormatError(path, "truncated entry '" + name + "'");
      for (std::uint32_t c = 0; c < cols; ++c) m(r, c) = row[c];
    }
    entries.emplace(std::move(name), std::move(m));
  }
  char extra;
  if (in.read(&extra, 1)) throw FormatError(path, "trailing bytes after payload");

  auto require = [&](const char* name) -> const Matrix& {
    auto it = entries.find(name);
    if (it == entries.end())
      throw FormatError(path, std::string("missing entry '") + name + "'");
    return it->second;
  };

  BackendModel model;
  if (auto it = entries.find("mean"); it != entries.end())
    model.projections.mean = it->second.row(0).transpose();
  if (auto it = entries.find("lda"); it != entries.end())
    model.projections.lda = it->second;
  if (auto it = entries.find("wccn"); it != entries.end())
    model.projections.wccn = it->second;
  if (auto it = entries.find("whitener"); it != entries.end())
    model.projections.whitener = it->second;
  model.projections.apply_length_norm = require("lnorm")(0, 0) != 0.0;
  model.scorer = require("scorer")(0, 0) == 0.0 ? ScorerKind::kGplda : ScorerKind::kCosine;
  if (entries.count("sigma_w")) {
    GpldaModel gplda;
    gplda.sigma_w = require("sigma_w");
    gplda.sigma_b = require("sigma_b");
    gplda.mu = require("mu").row(0).transpose();
    prepare_gplda_scoring(gplda);
    model.gplda = std::move(gplda);
  }
  return model;
}

}  // namespace diar
