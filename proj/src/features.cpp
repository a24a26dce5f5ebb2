#include "diar/features.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace diar {

long FeatureSequence::num_voiced() const {
  return std::count(voiced_mask.begin(), voiced_mask.end(), true);
}

Matrix FeatureSequence::voiced_features() const {
  const long n = num_voiced();
  Matrix out(n, features.cols());
  long row = 0;
  for (long i = 0; i < features.rows(); ++i)
    if (voiced_mask[i]) out.row(row++) = features.row(i);
  return out;
}

std::vector<double> FeatureSequence::voiced_starts() const {
  std::vector<double> out;
  out.reserve(num_voiced());
  for (std::size_t i = 0; i < frame_starts.size(); ++i)
    if (voiced_mask[i]) out.push_back(frame_starts[i]);
  return out;
}

Matrix frame_signal(const AudioSignal& signal, const FrameSpec& spec,
                    std::vector<double>* frame_starts) {
  spec.validate();
  if (signal.sample_rate <= 0) throw DataError("sample_rate must be positive");
  const long len = std::lround(spec.frame_len * signal.sample_rate);
  const long shift = std::lround(spec.frame_shift * signal.sample_rate);
  const long n = static_cast<long>(signal.samples.size());
  if (len <= 0 || shift <= 0) throw ConfigError("frame geometry collapses to zero samples");
  if (n < len)
    throw DataError("signal too short: " + std::to_string(n) + " samples < one frame (" +
                    std::to_string(len) + ")");

  const long count = (n - len) / shift + 1;
  Matrix frames(count, len);
  if (frame_starts) frame_starts->resize(count);
  for (long i = 0; i < count; ++i) {
    for (long j = 0; j < len; ++j) frames(i, j) = signal.samples[i * shift + j];
    if (frame_starts) (*frame_starts)[i] = i * spec.frame_shift;
  }
  return frames;
}

std::vector<double> frame_energy(const Matrix& frames) {
  if (frames.rows() == 0) throw DataError("frame_energy: no frames");
  std::vector<double> energies(frames.rows());
  for (long i = 0; i < frames.rows(); ++i)
    energies[i] = frames.row(i).squaredNorm() / frames.cols();
  return energies;
}

FeatureSequence energy_vad(const FeatureSequence& seq, double factor) {
  if (seq.energies.empty()) throw DataError("energy_vad: energies not populated");
  const double mean_energy =
      std::accumulate(seq.energies.begin(), seq.energies.end(), 0.0) /
      seq.energies.size();
  const double threshold = factor * mean_energy;

  FeatureSequence out = seq;
  out.voiced_mask.resize(seq.energies.size());
  long voiced = 0;
  for (std::size_t j = 0; j < seq.energies.size(); ++j) {
    out.voiced_mask[j] = seq.energies[j] >= threshold;
    voiced += out.voiced_mask[j];
  }
  if (voiced == 0) throw DataError("energy_vad: no voiced frames");
  return out;
}

namespace detail {

// In-place iterative radix-2 FFT. Sizes are powers of two (512 default);
// validated against a direct DFT in the tests.
void fft_radix2(std::vector<double>& re, std::vector<double>& im) {
  const std::size_t n = re.size();
  if (n == 0 || (n & (n - 1)) != 0)
    throw ConfigError("fft size must be a power of two");

  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) {
      std::swap(re[i], re[j]);
      std::swap(im[i], im[j]);
    }
  }

  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double angle = -2.0 * M_PI / static_cast<double>(len);
    const double wr = std::cos(angle), wi = std::sin(angle);
    for (std::size_t i = 0; i < n; i += len) {
      double cur_r = 1.0, cur_i = 0.0;
      for (std::size_t k = 0; k < len / 2; ++k) {
        const std::size_t a = i + k, b = i + k + len / 2;
        const double tr = re[b] * cur_r - im[b] * cur_i;
        const double ti = re[b] * cur_i + im[b] * cur_r;
        re[b] = re[a] - tr;
        im[b] = im[a] - ti;
        re[a] += tr;
        im[a] += ti;
        const double next_r = cur_r * wr - cur_i * wi;
        cur_i = cur_r * wi + cur_i * wr;
        cur_r = next_r;
      }
    }
  }
}

namespace {
double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }
}  // namespace

Matrix mel_filterbank(int n_mels, int fft_size, int sample_rate, double f_min,
                      double f_max) {
  if (f_max <= 0.0) f_max = sample_rate / 2.0;
  if (f_max > sample_rate / 2.0)
    throw ConfigError("mel f_max above Nyquist");
  if (f_min < 0.0 || f_min >= f_max) throw ConfigError("invalid mel range");

  const int n_bins = fft_size / 2 + 1;
  const double mel_min = hz_to_mel(f_min), mel_max = hz_to_mel(f_max);
  std::vector<double> centers(n_mels + 2);
  for (int m = 0; m < n_mels + 2; ++m)
    centers[m] = mel_to_hz(mel_min + (mel_max - mel_min) * m / (n_mels + 1));

  Matrix bank = Matrix::Zero(n_mels, n_bins);
  for (int m = 0; m < n_mels; ++m) {
    const double lo = centers[m], mid = centers[m + 1], hi = centers[m + 2];
    for (int k = 0; k < n_bins; ++k) {
      const double hz = static_cast<double>(k) * sample_rate / fft_size;
      if (hz > lo && hz < mid)
        bank(m, k) = (hz - lo) / (mid - lo);
      else if (hz >= mid && hz < hi)
        bank(m, k) = (hi - hz) / (hi - mid);
    }
  }
  return bank;
}

}  // namespace detail

namespace {

std::vector<double> hamming_taps(long len) {
  std::vector<double> w(len);
  if (len == 1) {
    w[0] = 1.0;
    return w;
  }
  for (long i = 0; i < len; ++i)
    w[i] = 0.54 - 0.46 * std::cos(2.0 * M_PI * i / (len - 1));
  return w;
}

// Orthonormal DCT-II of the mel log energies, first n_ceps coefficients.
Matrix dct_matrix(int n_ceps, int n_mels) {
  Matrix dct(n_ceps, n_mels);
  const double scale = std::sqrt(2.0 / n_mels);
  for (int k = 0; k < n_ceps; ++k)
    for (int m = 0; m < n_mels; ++m)
      dct(k, m) = scale * std::cos(M_PI * k * (m + 0.5) / n_mels);
  dct.row(0) *= 1.0 / std::sqrt(2.0);
  return dct;
}

}  // namespace

FeatureSequence mfcc(const AudioSignal& signal, const MfccConfig& cfg) {
  cfg.frame.validate();
  if (cfg.n_mels < cfg.n_ceps)
    throw ConfigError("mel filter count must be >= cepstral count");

  FeatureSequence seq;
  seq.spec = cfg.frame;
  Matrix frames = frame_signal(signal, cfg.frame, &seq.frame_starts);
  seq.energies = frame_energy(frames);

  const long frame_len = frames.cols();
  if (frame_len > cfg.fft_size)
    throw ConfigError("fft_size smaller than the frame length");

  const Matrix bank = detail::mel_filterbank(cfg.n_mels, cfg.fft_size,
                                             signal.sample_rate, cfg.f_min, cfg.f_max);
  const Matrix dct = dct_matrix(cfg.n_ceps, cfg.n_mels);
  const std::vector<double> window = hamming_taps(frame_len);
  const int n_bins = cfg.fft_size / 2 + 1;

  seq.features.resize(frames.rows(), cfg.n_ceps);
  std::vector<double> re(cfg.fft_size), im(cfg.fft_size);
  Vector power(n_bins), mel(cfg.n_mels);

  for (long i = 0; i < frames.rows(); ++i) {
    std::fill(re.begin(), re.end(), 0.0);
    std::fill(im.begin(), im.end(), 0.0);
    re[0] = frames(i, 0) * window[0];
    for (long j = 1; j < frame_len; ++j)
      re[j] = (frames(i, j) - cfg.preemphasis * frames(i, j - 1)) * window[j];
    detail::fft_radix2(re, im);
    for (int k = 0; k < n_bins; ++k) power[k] = re[k] * re[k] + im[k] * im[k];
    mel = bank * power;
    for (int m = 0; m < cfg.n_mels; ++m)
      mel[m] = std::log(std::max(mel[m], cfg.log_floor));
    seq.features.row(i) = (dct * mel).transpose();
  }

  seq.voiced_mask.assign(frames.rows(), true);
  return seq;
}

FeatureSequence deltas(const FeatureSequence& seq, int win) {
  if (win < 1) throw ConfigError("delta window must be >= 1");
  const long l = seq.features.rows();
  if (l <= 2 * win)
    throw DataError("sequence too short for delta window " + std::to_string(win));
  const long d = seq.features.cols();

  double denom = 0.0;
  for (int n = 1; n <= win; ++n) denom += n * n;
  denom *= 2.0;

  auto regression = [&](const Matrix& src) {
    Matrix out(l, d);
    for (long t = 0; t < l; ++t) {
      Vector acc = Vector::Zero(d);
      for (int n = 1; n <= win; ++n) {
        const long hi = std::min(t + n, l - 1);
        const long lo = std::max(t - n, 0L);
        acc += n * (src.row(hi) - src.row(lo)).transpose();
      }
      out.row(t) = (acc / denom).transpose();
    }
    return out;
  };

  const Matrix velocity = regression(seq.features);
  const Matrix acceleration = regression(velocity);

  FeatureSequence out = seq;
  out.features.resize(l, 3 * d);
  out.features.leftCols(d) = seq.features;
  out.features.middleCols(d, d) = velocity;
  out.features.rightCols(d) = acceleration;
  return out;
}

}  // namespace diar
