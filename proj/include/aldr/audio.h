// aldr/audio.h

// Copyright 2026  The ALDR Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef ALDR_AUDIO_H_
#define ALDR_AUDIO_H_

#include <random>
#include <vector>

#include "aldr/error.h"

namespace aldr {
namespace audio {

inline constexpr int kDefaultSampleRate = 16000;
// 25 ms window / 10 ms hop at 16 kHz.
inline constexpr int kWindowSamples = 400;
inline constexpr int kHopSamples = 160;
inline constexpr int kNumBins = kWindowSamples / 2 + 1;  // 201
// Frames in a 3 s segment: floor((48000 - 400) / 160) + 1.
inline constexpr int kSegmentFrames = 298;

struct Waveform {
  std::vector<double> samples;  // in [-1, 1]
  int sample_rate = kDefaultSampleRate;
};

// Row-major T x F magnitude matrix.
struct Spectrogram {
  int frames = 0;
  int bins = 0;
  bool normalized = false;
  std::vector<double> data;

  double &at(int t, int f) { return data[static_cast<size_t>(t) * bins + f]; }
  double at(int t, int f) const {
    return data[static_cast<size_t>(t) * bins + f];
  }
};

// w[n] = 0.54 - 0.46 cos(2 pi n / (N - 1)).
std::vector<double> hamming_window(int n);

// Sliding-window magnitude DFT, valid frames only, bins 0..W/2.
Spectrogram spectrogram(const Waveform &w, double width_ms = 25.0,
                        double step_ms = 10.0);

// Per-frequency-bin standardization over time; bins with std < 1e-8 are
// zeroed rather than divided.
Spectrogram normalize(const Spectrogram &s);

// Uniformly random contiguous slice of t_seg frames; shorter inputs are
// cyclic-padded. Always consumes exactly one rng draw when a choice exists.
Spectrogram sample_segment(const Spectrogram &s, int t_seg,
                           std::mt19937_64 &rng);

// Deterministic slice at a fixed start frame (evaluation path).
Spectrogram segment_at(const Spectrogram &s, int start, int t_seg);

}  // namespace audio
}  // namespace aldr

#endif  // ALDR_AUDIO_H_
