#ifndef DIAR_FEATURES_HPP
#define DIAR_FEATURES_HPP

#include <vector>

#include "diar/audio.hpp"
#include "diar/common.hpp"

namespace diar {

/// Frame geometry in seconds. The usual setting is 20 ms / 10 ms; 25/20 and
/// 20/20 variants are plain configuration values.
struct FrameSpec {
  double frame_len = 0.020;
  double frame_shift = 0.010;

  void validate() const {
    if (frame_shift <= 0.0 || frame_shift > frame_len)
      throw ConfigError("FrameSpec requires 0 < frame_shift <= frame_len");
  }
};

/// Per-frame feature matrix (rows = frames) with frame start times, frame
/// energies and a voiced mask.
struct FeatureSequence {
  Matrix features;                  // l x d
  std::vector<double> frame_starts; // seconds, constant step = frame_shift
  std::vector<double> energies;     // mean squared amplitude per frame
  std::vector<bool> voiced_mask;    // set by energy_vad
  FrameSpec spec;

  long num_frames() const { return features.rows(); }
  long dim() const { return features.cols(); }
  long num_voiced() const;

  /// Rows of `features` where the mask is set (F_v).
  Matrix voiced_features() const;
  /// Start times of the voiced frames (P_v).
  std::vector<double> voiced_starts() const;
};

struct MfccConfig {
  FrameSpec frame;
  int n_ceps = 13;          // includes c0
  int n_mels = 26;
  int fft_size = 512;
  double preemphasis = 0.97;
  double f_min = 0.0;
  double f_max = 0.0;       // 0 = Nyquist
  double log_floor = 1e-10;
};

/// Slices the signal into frames. Frame i starts at sample i * shift; the
/// count is floor((n - len) / shift) + 1.
Matrix frame_signal(const AudioSignal& signal, const FrameSpec& spec,
                    std::vector<double>* frame_starts);

/// Mean squared amplitude per frame.
std::vector<double> frame_energy(const Matrix& frames);

/// Energy VAD: frame j voiced iff e_j >= factor * mean(e). Returns a copy
/// with the mask set. Throws DataError if no frame survives.
FeatureSequence energy_vad(const FeatureSequence& seq, double factor = 0.06);

/// Static MFCCs (pre-emphasis, Hamming window, FFT, mel filterbank, log,
/// orthonormal DCT-II). Energies computed from the raw frames before
/// pre-emphasis; voiced_mask left all-true until energy_vad runs.
FeatureSequence mfcc(const AudioSignal& signal, const MfccConfig& cfg);

/// Appends velocity and acceleration by the standard regression formula,
/// edge frames replicated. Output dimension 3*d.
FeatureSequence deltas(const FeatureSequence& seq, int win = 2);

namespace detail {
// Exposed for the DFT-oracle tests.
void fft_radix2(std::vector<double>& re, std::vector<double>& im);
Matrix mel_filterbank(int n_mels, int fft_size, int sample_rate, double f_min,
                      double f_max);
}  // namespace detail

}  // namespace diar

#endif  // DIAR_FEATURES_HPP
