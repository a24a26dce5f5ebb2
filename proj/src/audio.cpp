#include "diar/audio.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

#include "diar/common.hpp"

namespace diar {

namespace {

struct ChunkHeader {
  char id[4];
  std::uint32_t size;
};

std::uint16_t read_u16(const char* p) {
  std::uint16_t v;
  std::memcpy(&v, p, 2);
  return v;
}

std::uint32_t read_u32(const char* p) {
  std::uint32_t v;
  std::memcpy(&v, p, 4);
  return v;
}

}  // namespace

AudioSignal read_wav(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw FormatError(path, "cannot open file");

  char riff[12];
  if (!file.read(riff, 12)) throw FormatError(path, "truncated RIFF header");
  if (std::strncmp(riff, "RIFF", 4) != 0 || std::strncmp(riff + 8, "WAVE", 4) != 0)
    throw FormatError(path, "not a RIFF/WAVE file");

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t sample_rate = 0;
  bool have_fmt = false;
  std::vector<char> data;

  ChunkHeader chunk;
  while (file.read(reinterpret_cast<char*>(&chunk), sizeof(chunk))) {
    if (std::strncmp(chunk.id, "fmt ", 4) == 0) {
      std::vector<char> fmt(chunk.size);
      if (!file.read(fmt.data(), chunk.size) || chunk.size < 16)
        throw FormatError(path, "truncated fmt chunk");
      format = read_u16(fmt.data());
      channels = read_u16(fmt.data() + 2);
      sample_rate = read_u32(fmt.data() + 4);
      bits = read_u16(fmt.data() + 14);
      have_fmt = true;
    } else if (std::strncmp(chunk.id, "data", 4) == 0) {
      data.resize(chunk.size);
      if (!file.read(data.data(), chunk.size))
        throw FormatError(path, "truncated data chunk");
      break;
    } else {
      // skip unknown chunk (word-aligned)
      file.seekg(chunk.size + (chunk.size & 1), std::ios::cur);
    }
  }

  if (!have_fmt || data.empty()) throw FormatError(path, "missing fmt or data chunk");
  if (channels != 1)
    throw FormatError(path, "only mono audio is supported (got " +
                                std::to_string(channels) + " channels)");

  AudioSignal signal;
  signal.sample_rate = static_cast<int>(sample_rate);

  if (format == 1 && bits == 16) {
    const std::size_t n = data.size() / 2;
    signal.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::int16_t s;
      std::memcpy(&s, data.data() + 2 * i, 2);
      signal.samples[i] = static_cast<double>(s) / 32768.0;
    }
  } else if (format == 3 && bits == 32) {
    const std::size_t n = data.size() / 4;
    signal.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      float s;
      std::memcpy(&s, data.data() + 4 * i, 4);
      signal.samples[i] = static_cast<double>(s);
    }
  } else {
    throw FormatError(path, "unsupported sample format (need PCM16 or float32)");
  }

  if (signal.samples.empty()) throw FormatError(path, "empty audio payload");
  return signal;
}

}  // namespace diar
