#pragma once

#include <cstdint>
#include <vector>

#include "s2p/common.hpp"

namespace s2p::data {

struct Waveform {
  std::vector<double> samples;  // in [-1, 1]
  int sample_rate = 0;
  double duration_seconds() const {
    return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate : 0.0;
  }
};

// Mono 16-bit PCM WAV. Reading rejects anything else; unknown RIFF chunks
// are skipped.
Waveform read_wav(const fs::path& path);
void write_wav(const fs::path& path, const Waveform& wav);

}  // namespace s2p::data
