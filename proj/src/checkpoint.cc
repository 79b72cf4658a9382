// checkpoint.cc

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

#include "aldr/checkpoint.h"

#include <bit>
#include <cstring>
#include <fstream>

#include "aldr/error.h"

// Records are written in host byte order; all supported targets are
// little-endian, which the on-disk format requires.
static_assert(std::endian::native == std::endian::little);

namespace aldr {
namespace ckpt {
namespace {

constexpr std::uint8_t kDtypeF64 = 0;

void put_bytes(std::ofstream &out, const void *p, size_t n) {
  out.write(static_cast<const char *>(p), static_cast<std::streamsize>(n));
}

template <typename T>
void put(std::ofstream &out, T v) {
  put_bytes(out, &v, sizeof(v));
}

void put_string(std::ofstream &out, const std::string &s) {
  put<std::uint64_t>(out, s.size());
  put_bytes(out, s.data(), s.size());
}

void take_bytes(std::ifstream &in, void *p, size_t n) {
  in.read(static_cast<char *>(p), static_cast<std::streamsize>(n));
  if (static_cast<size_t>(in.gcount()) != n)
    throw DataError("unexpected end of file in checkpoint");
}

template <typename T>
T take(std::ifstream &in) {
  T v;
  take_bytes(in, &v, sizeof(v));
  return v;
}

std::string take_string(std::ifstream &in, std::uint64_t max_len) {
  std::uint64_t n = take<std::uint64_t>(in);
  if (n > max_len) throw DataError("implausible length field in checkpoint");
  std::string s(n, '\0');
  take_bytes(in, s.data(), n);
  return s;
}

}  // namespace

const TensorRecord *Checkpoint::find(const std::string &name) const {
  for (const TensorRecord &t : tensors)
    if (t.name == name) return &t;
  return nullptr;
}

void write_checkpoint(const Checkpoint &c, const std::string &path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open checkpoint for writing: " + path);
  put_bytes(out, kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, kVersion);
  put_string(out, c.config_text);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(c.epochs_phase1));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(c.epochs_phase2));
  put<std::uint64_t>(out, static_cast<std::uint64_t>(c.steps_phase1));
  put<std::uint64_t>(out, static_cast<std::uint64_t>(c.steps_phase2));
  put_string(out, c.rng_state);
  put<std::uint64_t>(out, c.tensors.size());
  for (const TensorRecord &t : c.tensors) {
    put_string(out, t.name);
    put<std::uint8_t>(out, kDtypeF64);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(t.shape.size()));
    for (int d : t.shape) put<std::int32_t>(out, d);
    put<std::uint64_t>(out, t.values.size());
    put_bytes(out, t.values.data(), t.values.size() * sizeof(double));
  }
  out.flush();
  if (!out) throw DataError("write failure on checkpoint: " + path);
}

Checkpoint read_checkpoint(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint: " + path);
  char magic[sizeof(kMagic)];
  take_bytes(in, magic, sizeof(magic));
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw DataError("not a checkpoint file (bad magic): " + path);
  std::uint32_t version = take<std::uint32_t>(in);
  if (version != kVersion)
    throw DataError("checkpoint version " + std::to_string(version) +
                    " unsupported (expected " + std::to_string(kVersion) + ")");
  Checkpoint c;
  c.config_text = take_string(in, 1u << 20);
  c.epochs_phase1 = static_cast<int>(take<std::uint32_t>(in));
  c.epochs_phase2 = static_cast<int>(take<std::uint32_t>(in));
  c.steps_phase1 = static_cast<std::int64_t>(take<std::uint64_t>(in));
  c.steps_phase2 = static_cast<std::int64_t>(take<std::uint64_t>(in));
  c.rng_state = take_string(in, 1u << 20);
  std::uint64_t count = take<std::uint64_t>(in);
  if (count > (1u << 20))
    throw DataError("implausible tensor count in checkpoint");
  c.tensors.resize(count);
  for (TensorRecord &t : c.tensors) {
    t.name = take_string(in, 1u << 16);
    std::uint8_t dtype = take<std::uint8_t>(in);
    if (dtype != kDtypeF64)
      throw DataError("unsupported dtype tag " + std::to_string(dtype) +
                      " for tensor " + t.name);
    std::uint32_t rank = take<std::uint32_t>(in);
    if (rank > 8) throw DataError("implausible rank for tensor " + t.name);
    t.shape.resize(rank);
    std::uint64_t expect = 1;
    for (std::uint32_t i = 0; i < rank; ++i) {
      t.shape[i] = static_cast<int>(take<std::int32_t>(in));
      if (t.shape[i] <= 0)
        throw DataError("nonpositive dimension for tensor " + t.name);
      expect *= static_cast<std::uint64_t>(t.shape[i]);
    }
    std::uint64_t n = take<std::uint64_t>(in);
    if (n != expect)
      throw DataError("value count does not match shape for tensor " + t.name);
    t.values.resize(n);
    take_bytes(in, t.values.data(), n * sizeof(double));
  }
  if (in.peek() != std::ifstream::traits_type::eof())
    throw DataError("trailing bytes after checkpoint payload: " + path);
  return c;
}

}  // namespace ckpt
}  // namespace aldr
