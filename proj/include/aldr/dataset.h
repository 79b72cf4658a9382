// aldr/dataset.h

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

#ifndef ALDR_DATASET_H_
#define ALDR_DATASET_H_

#include <cstdint>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "aldr/audio.h"
#include "aldr/error.h"

namespace aldr {
namespace data {

struct Utterance {
  std::string id;
  int speaker_id = -1;        // contiguous 0-based index
  std::string speaker_label;  // label as written in the manifest
  std::string path;           // relative to the manifest directory
};

struct Manifest {
  std::vector<Utterance> entries;
  std::vector<std::string> speaker_names;  // index = speaker_id
  std::string root;                        // directory paths resolve against

  int n_speakers() const { return static_cast<int>(speaker_names.size()); }
  // Index of an utterance id, or -1.
  int find(const std::string &id) const;
  std::string resolve(const Utterance &u) const;

 private:
  mutable std::unordered_map<std::string, int> index_;
};

struct TrialPair {
  bool same = false;
  std::string a, b;
};

// PCM 16-bit mono RIFF/WAVE only; samples scaled by 1/32768.
audio::Waveform read_wav(const std::string &path);
void write_wav(const std::string &path, const audio::Waveform &w);

struct SynthSpec {
  int n_speakers = 8;
  int n_nuisance = 4;
  int utts_per_speaker = 20;
  uint64_t seed = 1234;
  double seconds = 4.0;
  int sample_rate = audio::kDefaultSampleRate;
};

struct GeneratedDataset {
  Manifest manifest;
  std::vector<int> nuisance_ids;  // aligned with manifest.entries
};

// Materializes WAVs plus manifest.txt, nuisance.txt and trials.txt under
// out_dir. Identity = 3 harmonics shaped by a formant-like envelope and a
// speaker-specific tremolo rate; nuisance = class-banded resonator-colored
// noise with a class-specific coherence time, random gain and time offset.
// Pure function of the spec (including the seed).
GeneratedDataset generate_synthetic(const SynthSpec &spec,
                                    const std::string &out_dir);

Manifest load_manifest(const std::string &path);
std::vector<TrialPair> load_trials(const std::string &path,
                                   const Manifest &manifest);
// Per-entry nuisance class labels, aligned with manifest.entries.
std::vector<int> load_nuisance(const std::string &path,
                               const Manifest &manifest);

// One same-speaker pair (different nuisance class preferred) and one
// different-speaker pair (same nuisance class preferred) per utterance.
std::vector<TrialPair> make_trials(const Manifest &manifest,
                                   const std::vector<int> &nuisance_ids,
                                   std::mt19937_64 &rng);

void write_manifest(const Manifest &manifest, const std::string &path);
void write_trials(const std::vector<TrialPair> &trials,
                  const std::string &path);

}  // namespace data
}  // namespace aldr

#endif  // ALDR_DATASET_H_
