#ifndef DIAR_AUDIO_HPP
#define DIAR_AUDIO_HPP

#include <string>
#include <vector>

namespace diar {

/// Mono audio, samples in [-1, 1].
struct AudioSignal {
  std::vector<double> samples;
  int sample_rate = 0;

  double duration() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
};

/// Reads a mono WAV file (PCM16 or IEEE float32). Rejects everything else;
/// resampling is out of scope.
AudioSignal read_wav(const std::string& path);

}  // namespace diar

#endif  // DIAR_AUDIO_HPP
