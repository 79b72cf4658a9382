// aldr/audio.cc

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

#include "aldr/audio.h"

#include <cmath>
#include <cstdint>
#include <string>

namespace aldr {
namespace audio {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

std::vector<double> hamming_window(int n) {
  if (n < 2)
    throw ConfigError("hamming window length must be >= 2, got " +
                      std::to_string(n));
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i)
    w[i] = 0.54 - 0.46 * std::cos(2.0 * kPi * i / (n - 1));
  return w;
}

Spectrogram spectrogram(const Waveform &wav, double width_ms, double step_ms) {
  if (wav.sample_rate <= 0)
    throw ConfigError("sample rate must be positive, got " +
                      std::to_string(wav.sample_rate));
  const int width = static_cast<int>(
      std::llround(wav.sample_rate * width_ms / 1000.0));
  const int step = static_cast<int>(
      std::llround(wav.sample_rate * step_ms / 1000.0));
  if (width < 2 || step < 1)
    throw ConfigError("window/hop too small at this sample rate");
  const int64_t len = static_cast<int64_t>(wav.samples.size());
  if (len < width)
    throw DataError("waveform of " + std::to_string(len) +
                    " samples is shorter than one " + std::to_string(width) +
                    "-sample window");
  const int frames = static_cast<int>((len - width) / step) + 1;
  const int bins = width / 2 + 1;

  const std::vector<double> window = hamming_window(width);
  // Direct DFT with precomputed basis; O(W^2) per frame is fine at this scale.
  std::vector<double> cos_tab(static_cast<size_t>(bins) * width);
  std::vector<double> sin_tab(static_cast<size_t>(bins) * width);
  for (int k = 0; k < bins; ++k)
    for (int i = 0; i < width; ++i) {
      const double ang = 2.0 * kPi * k * i / width;
      cos_tab[static_cast<size_t>(k) * width + i] = std::cos(ang);
      sin_tab[static_cast<size_t>(k) * width + i] = std::sin(ang);
    }

  Spectrogram s;
  s.frames = frames;
  s.bins = bins;
  s.data.assign(static_cast<size_t>(frames) * bins, 0.0);
  std::vector<double> frame(width);
  for (int t = 0; t < frames; ++t) {
    const double *src = wav.samples.data() + static_cast<int64_t>(t) * step;
    for (int i = 0; i < width; ++i) frame[i] = src[i] * window[i];
    double *out = s.data.data() + static_cast<size_t>(t) * bins;
    for (int k = 0; k < bins; ++k) {
      const double *ct = cos_tab.data() + static_cast<size_t>(k) * width;
      const double *st = sin_tab.data() + static_cast<size_t>(k) * width;
      double re = 0.0, im = 0.0;
      for (int i = 0; i < width; ++i) {
        re += frame[i] * ct[i];
        im -= frame[i] * st[i];
      }
      out[k] = std::sqrt(re * re + im * im);
    }
  }
  return s;
}

Spectrogram normalize(const Spectrogram &s) {
  if (s.frames < 2)
    throw ConfigError("normalize needs at least 2 frames, got " +
                      std::to_string(s.frames));
  Spectrogram out = s;
  out.normalized = true;
  const int t_n = s.frames, f_n = s.bins;
  for (int f = 0; f < f_n; ++f) {
    double mean = 0.0;
    for (int t = 0; t < t_n; ++t) mean += s.at(t, f);
    mean /= t_n;
    double var = 0.0;
    for (int t = 0; t < t_n; ++t) {
      const double d = s.at(t, f) - mean;
      var += d * d;
    }
    const double sd = std::sqrt(var / t_n);
    if (sd < 1e-8) {
      for (int t = 0; t < t_n; ++t) out.at(t, f) = 0.0;
    } else {
      for (int t = 0; t < t_n; ++t) out.at(t, f) = (s.at(t, f) - mean) / sd;
    }
  }
  return out;
}

Spectrogram segment_at(const Spectrogram &s, int start, int t_seg) {
  if (t_seg < 1) throw ConfigError("segment length must be positive");
  Spectrogram out;
  out.frames = t_seg;
  out.bins = s.bins;
  out.normalized = s.normalized;
  out.data.assign(static_cast<size_t>(t_seg) * s.bins, 0.0);
  for (int t = 0; t < t_seg; ++t) {
    const int src = (start + t) % s.frames;
    std::copy_n(s.data.begin() + static_cast<size_t>(src) * s.bins, s.bins,
                out.data.begin() + static_cast<size_t>(t) * s.bins);
  }
  return out;
}

Spectrogram sample_segment(const Spectrogram &s, int t_seg,
                           std::mt19937_64 &rng) {
  if (t_seg < 1) throw ConfigError("segment length must be positive");
  if (s.frames <= t_seg) return segment_at(s, 0, t_seg);  // cyclic pad
  const int start = static_cast<int>(rng() % (s.frames - t_seg + 1));
  return segment_at(s, start, t_seg);
}

}  // namespace audio
}  // namespace aldr
