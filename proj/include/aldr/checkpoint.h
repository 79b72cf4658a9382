// aldr/checkpoint.h

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

#ifndef ALDR_CHECKPOINT_H_
#define ALDR_CHECKPOINT_H_

#include <cstdint>
#include <string>
#include <vector>

namespace aldr {
namespace ckpt {

inline constexpr char kMagic[8] = {'A', 'L', 'D', 'R', 'C', 'K', 'P', 'T'};
inline constexpr std::uint32_t kVersion = 1;

struct TensorRecord {
  std::string name;
  std::vector<int> shape;
  std::vector<double> values;
};

// Versioned binary training snapshot: a config text block, every parameter
// and optimizer buffer by name, progress counters, and the serialized rng.
struct Checkpoint {
  std::string config_text;
  int epochs_phase1 = 0;
  int epochs_phase2 = 0;
  std::int64_t steps_phase1 = 0;
  std::int64_t steps_phase2 = 0;
  std::string rng_state;
  std::vector<TensorRecord> tensors;

  const TensorRecord *find(const std::string &name) const;
};

void write_checkpoint(const Checkpoint &c, const std::string &path);
// Data faults (bad magic, unsupported version, truncation) raise DataError.
Checkpoint read_checkpoint(const std::string &path);

}  // namespace ckpt
}  // namespace aldr

#endif  // ALDR_CHECKPOINT_H_
