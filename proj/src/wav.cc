// aldr/wav.cc

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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "aldr/dataset.h"

namespace aldr {
namespace data {

namespace {

uint32_t read_u32(const unsigned char *p) {
  return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
         (static_cast<uint32_t>(p[2]) << 16) |
         (static_cast<uint32_t>(p[3]) << 24);
}

uint16_t read_u16(const unsigned char *p) {
  return static_cast<uint16_t>(p[0] | (p[1] << 8));
}

void put_u32(std::string &out, uint32_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 24) & 0xff));
}

void put_u16(std::string &out, uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

}  // namespace

audio::Waveform read_wav(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open wav file " + path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0)
    throw DataError(path + ": missing RIFF header");
  if (std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    throw DataError(path + ": RIFF form type is not WAVE");

  bool have_fmt = false;
  int sample_rate = 0;
  audio::Waveform w;
  bool have_data = false;
  size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const char *id = reinterpret_cast<const char *>(bytes.data() + pos);
    const uint32_t size = read_u32(bytes.data() + pos + 4);
    pos += 8;
    if (pos + size > bytes.size())
      throw DataError(path + ": chunk overruns file");
    if (std::memcmp(id, "fmt ", 4) == 0) {
      if (size < 16) throw DataError(path + ": fmt chunk too small");
      const uint16_t format = read_u16(bytes.data() + pos);
      const uint16_t channels = read_u16(bytes.data() + pos + 2);
      sample_rate = static_cast<int>(read_u32(bytes.data() + pos + 4));
      const uint16_t bits = read_u16(bytes.data() + pos + 14);
      if (format != 1)
        throw DataError(path + ": audio format " + std::to_string(format) +
                        " unsupported (PCM only)");
      if (channels != 1)
        throw DataError(path + ": " + std::to_string(channels) +
                        " channels unsupported (mono only)");
      if (bits != 16)
        throw DataError(path + ": " + std::to_string(bits) +
                        " bits per sample unsupported (16 only)");
      have_fmt = true;
    } else if (std::memcmp(id, "data", 4) == 0) {
      if (!have_fmt) throw DataError(path + ": data chunk before fmt");
      const size_t n = size / 2;
      w.samples.resize(n);
      for (size_t i = 0; i < n; ++i) {
        const int16_t v = static_cast<int16_t>(
            read_u16(bytes.data() + pos + 2 * i));
        w.samples[i] = v / 32768.0;
      }
      have_data = true;
    }
    pos += size + (size & 1);  // chunks are word aligned
  }
  if (!have_fmt) throw DataError(path + ": no fmt chunk");
  if (!have_data) throw DataError(path + ": no data chunk");
  if (w.samples.empty()) throw DataError(path + ": empty data chunk");
  w.sample_rate = sample_rate;
  return w;
}

void write_wav(const std::string &path, const audio::Waveform &w) {
  if (w.samples.empty()) throw DataError("refusing to write empty waveform");
  const uint32_t n = static_cast<uint32_t>(w.samples.size());
  const uint32_t data_bytes = n * 2;
  std::string out;
  out.reserve(44 + data_bytes);
  out.append("RIFF");
  put_u32(out, 36 + data_bytes);
  out.append("WAVE");
  out.append("fmt ");
  put_u32(out, 16);
  put_u16(out, 1);  // PCM
  put_u16(out, 1);  // mono
  put_u32(out, static_cast<uint32_t>(w.sample_rate));
  put_u32(out, static_cast<uint32_t>(w.sample_rate) * 2);  // byte rate
  put_u16(out, 2);   // block align
  put_u16(out, 16);  // bits
  out.append("data");
  put_u32(out, data_bytes);
  for (double s : w.samples) {
    double scaled = std::round(s * 32768.0);
    scaled = std::clamp(scaled, -32768.0, 32767.0);
    put_u16(out, static_cast<uint16_t>(static_cast<int16_t>(scaled)));
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw DataError("cannot open " + path + " for writing");
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw DataError("short write to " + path);
}

}  // namespace data
}  // namespace aldr
