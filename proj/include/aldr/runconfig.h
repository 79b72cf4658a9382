// aldr/runconfig.h

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

// Flat key=value run configuration ("section.key=value" per line) with
// consumption tracking, plus converters between config text, model and
// trainer configs, and checkpoints.

#ifndef ALDR_RUNCONFIG_H_
#define ALDR_RUNCONFIG_H_

#include <cstdint>
#include <string>
#include <vector>

#include "aldr/checkpoint.h"
#include "aldr/networks.h"
#include "aldr/trainer.h"

namespace aldr {
namespace cli {

// Parsed config lines in file order. Lookups mark keys consumed so that
// forbid_unknown() can reject typos by name. '#' starts a comment line;
// blank lines are ignored; duplicate keys are an error at parse time.
class KeyValues {
 public:
  static KeyValues from_file(const std::string &path);
  static KeyValues from_text(const std::string &text,
                             const std::string &origin = "<config>");

  bool has(const std::string &key) const;
  // Required key: missing raises ConfigError naming it.
  std::string get_string(const std::string &key);
  std::string get_string(const std::string &key, const std::string &fallback);
  int get_int(const std::string &key, int fallback);
  std::uint64_t get_u64(const std::string &key, std::uint64_t fallback);
  double get_double(const std::string &key, double fallback);
  // Raises ConfigError naming the first key never consumed by a getter.
  void forbid_unknown() const;

 private:
  struct Entry {
    std::string key, value;
    int line = 0;
    bool consumed = false;
  };
  Entry *find(const std::string &key);
  const Entry *find(const std::string &key) const;

  std::vector<Entry> entries_;
  std::string origin_;
};

// Consume the model.* keys; absent keys keep ModelConfig defaults.
net::ModelConfig model_config_from(KeyValues &kv);
// Consume the train.* keys; absent keys keep TrainConfig defaults.
train::TrainConfig train_config_from(KeyValues &kv);

// Rebuilds the architecture recorded in a checkpoint and loads its
// parameter tensors (momentum and rng records are ignored here). Missing
// or mismatched tensors raise DataError.
net::Model model_from_checkpoint(const ckpt::Checkpoint &c);
train::TrainConfig train_config_from_checkpoint(const ckpt::Checkpoint &c);

}  // namespace cli
}  // namespace aldr

#endif  // ALDR_RUNCONFIG_H_
