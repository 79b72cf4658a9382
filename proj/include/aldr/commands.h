// aldr/commands.h

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

// The three toolkit commands as plain functions so tests can drive them
// without spawning processes. The binary in tools/ is a thin flag shell.

#ifndef ALDR_COMMANDS_H_
#define ALDR_COMMANDS_H_

#include <cstdint>
#include <iosfwd>
#include <string>

namespace aldr {
namespace cli {

struct GenerateArgs {
  std::string out_dir;
  int speakers = 8;
  int nuisance = 4;
  int utts = 20;
  std::uint64_t seed = 1234;
  double seconds = 4.0;
  bool force = false;
};

struct TrainArgs {
  std::string config_path;
  std::string ablation;  // empty keeps the config file's choice
  std::string resume;    // checkpoint to continue from; empty starts fresh
};

struct EvalArgs {
  std::string checkpoint;
  std::string trials;
  std::string manifest;  // empty resolves manifest.txt next to the trials
  std::string out_dir;
  bool probe = false;
};

// Materializes a synthetic dataset (WAVs, manifest, nuisance sidecar,
// balanced trial list). Refuses a non-empty output directory unless force.
void cmd_generate(const GenerateArgs &a, std::ostream &out);

// Runs the two-phase schedule per the config file, writing the training log
// and checkpoint the config names.
void cmd_train(const TrainArgs &a, std::ostream &out);

// Scores the trial list with the checkpointed model and emits report files;
// with probe set, also fits the four linear probes.
void cmd_eval(const EvalArgs &a, std::ostream &out);

// Reads ALDR_SEED; returns fallback when unset. Malformed values raise
// ConfigError.
std::uint64_t seed_from_env(std::uint64_t fallback);

}  // namespace cli
}  // namespace aldr

#endif  // ALDR_COMMANDS_H_
