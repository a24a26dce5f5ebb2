#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

#include "diar/io.hpp"

namespace diar {

namespace {

constexpr char kMagic[4] = {'D', 'K', 'M', '1'};
constexpr std::uint32_t kMaxDim = 1u << 28;

void put_u32(std::ofstream& out, std::uint32_t v) {
  char buf[4];
  std::memcpy(buf, &v, 4);  // little-endian host assumed (x86/arm64)
  out.write(buf, 4);
}

std::uint32_t get_u32(std::ifstream& in, const std::string& path) {
  char buf[4];
  if (!in.read(buf, 4)) throw FormatError(path, "truncated header");
  std::uint32_t v;
  std::memcpy(&v, buf, 4);
  return v;
}

}  // namespace

void write_matrix(const std::string& path, const Matrix& values,
                  const std::vector<double>* times) {
  if (!values.allFinite())
    throw DataError("write_matrix: refusing to write non-finite values");
  if (times && static_cast<long>(times->size()) != values.rows())
    throw DataError("write_matrix: times length must equal the row count");

  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError(path, "cannot open for writing");

  out.write(kMagic, 4);
  put_u32(out, static_cast<std::uint32_t>(values.rows()));
  put_u32(out, static_cast<std::uint32_t>(values.cols()));
  const char flag = times ? 1 : 0;
  out.write(&flag, 1);

  if (times)
    out.write(reinterpret_cast<const char*>(times->data()),
              static_cast<std::streamsize>(times->size() * sizeof(double)));

  std::vector<float> row(values.cols());
  for (long r = 0; r < values.rows(); ++r) {
    for (long c = 0; c < values.cols(); ++c)
      row[c] = static_cast<float>(values(r, c));
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(row.size() * sizeof(float)));
  }
  if (!out) throw FormatError(path, "write failed");
}

MatrixFile read_matrix(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(path, "cannot open file");

  char magic[4];
  if (!in.read(magic, 4)) throw FormatError(path, "empty file");
  if (std::memcmp(magic, kMagic, 4) != 0) throw FormatError(path, "bad magic");

  const std::uint32_t rows = get_u32(in, path);
  const std::uint32_t cols = get_u32(in, path);
  if (rows > kMaxDim || cols > kMaxDim)
    throw FormatError(path, "implausible matrix dimensions");
  char flag;
  if (!in.read(&flag, 1)) throw FormatError(path, "truncated header");
  if (flag != 0 && flag != 1) throw FormatError(path, "invalid has_times flag");

  MatrixFile file;
  if (flag) {
    std::vector<double> times(rows);
    if (!in.read(reinterpret_cast<char*>(times.data()),
                 static_cast<std::streamsize>(rows * sizeof(double))))
      throw FormatError(path, "truncated start-times block");
    file.times = std::move(times);
  }

  file.values.resize(rows, cols);
  std::vector<float> row(cols);
  for (std::uint32_t r = 0; r < rows; ++r) {
    if (!in.read(reinterpret_cast<char*>(row.data()),
                 static_cast<std::streamsize>(cols * sizeof(float))))
      throw FormatError(path, "payload shorter than the header promises");
    for (std::uint32_t c = 0; c < cols; ++c) file.values(r, c) = row[c];
  }

  char extra;
  if (in.read(&extra, 1)) throw FormatError(path, "trailing bytes after payload");
  return file;
}

}  // namespace diar
