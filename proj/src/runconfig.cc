// src/runconfig.cc

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

#include "aldr/runconfig.h"

#include <cerrno>
#include <climits>
#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>

#include "aldr/error.h"

namespace aldr {
namespace cli {

namespace {

std::string trim(const std::string &s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace

KeyValues KeyValues::from_text(const std::string &text,
                               const std::string &origin) {
  KeyValues kv;
  kv.origin_ = origin;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(lineno) +
                        ": expected key=value, got '" + t + "'");
    Entry e;
    e.key = trim(t.substr(0, eq));
    e.value = trim(t.substr(eq + 1));
    e.line = lineno;
    if (e.key.empty())
      throw ConfigError(origin + ":" + std::to_string(lineno) +
                        ": empty key");
    if (kv.find(e.key))
      throw ConfigError(origin + ":" + std::to_string(lineno) +
                        ": duplicate config key '" + e.key + "'");
    kv.entries_.push_back(std::move(e));
  }
  return kv;
}

KeyValues KeyValues::from_file(const std::string &path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot read config file " + path);
  std::stringstream buf;
  buf << f.rdbuf();
  return from_text(buf.str(), path);
}

KeyValues::Entry *KeyValues::find(const std::string &key) {
  for (Entry &e : entries_)
    if (e.key == key) return &e;
  return nullptr;
}

const KeyValues::Entry *KeyValues::find(const std::string &key) const {
  for (const Entry &e : entries_)
    if (e.key == key) return &e;
  return nullptr;
}

bool KeyValues::has(const std::string &key) const {
  return find(key) != nullptr;
}

std::string KeyValues::get_string(const std::string &key) {
  Entry *e = find(key);
  if (!e) throw ConfigError("missing config key '" + key + "'");
  e->consumed = true;
  return e->value;
}

std::string KeyValues::get_string(const std::string &key,
                                  const std::string &fallback) {
  Entry *e = find(key);
  if (!e) return fallback;
  e->consumed = true;
  return e->value;
}

int KeyValues::get_int(const std::string &key, int fallback) {
  Entry *e = find(key);
  if (!e) return fallback;
  e->consumed = true;
  errno = 0;
  char *end = nullptr;
  long v = std::strtol(e->value.c_str(), &end, 10);
  if (errno != 0 || end == e->value.c_str() || *end != '\0' ||
      v < INT_MIN || v > INT_MAX)
    throw ConfigError("config key '" + key + "': expected integer, got '" +
                      e->value + "'");
  return static_cast<int>(v);
}

std::uint64_t KeyValues::get_u64(const std::string &key,
                                 std::uint64_t fallback) {
  Entry *e = find(key);
  if (!e) return fallback;
  e->consumed = true;
  errno = 0;
  char *end = nullptr;
  unsigned long long v = std::strtoull(e->value.c_str(), &end, 10);
  if (errno != 0 || end == e->value.c_str() || *end != '\0' ||
      e->value[0] == '-')
    throw ConfigError("config key '" + key +
                      "': expected unsigned integer, got '" + e->value + "'");
  return v;
}

double KeyValues::get_double(const std::string &key, double fallback) {
  Entry *e = find(key);
  if (!e) return fallback;
  e->consumed = true;
  errno = 0;
  char *end = nullptr;
  double v = std::strtod(e->value.c_str(), &end);
  if (errno != 0 || end == e->value.c_str() || *end != '\0')
    throw ConfigError("config key '" + key + "': expected number, got '" +
                      e->value + "'");
  return v;
}

void KeyValues::forbid_unknown() const {
  for (const Entry &e : entries_)
    if (!e.consumed)
      throw ConfigError(origin_ + ":" + std::to_string(e.line) +
                        ": unknown config key '" + e.key + "'");
}

net::ModelConfig model_config_from(KeyValues &kv) {
  net::ModelConfig mc;
  mc.kind = kv.get_string("model.kind", mc.kind);
  mc.frames = kv.get_int("model.frames", mc.frames);
  mc.bins = kv.get_int("model.bins", mc.bins);
  mc.embedding_dim = kv.get_int("model.embedding_dim", mc.embedding_dim);
  mc.n_speakers = kv.get_int("model.n_speakers", mc.n_speakers);
  mc.conv_c1 = kv.get_int("model.conv_c1", mc.conv_c1);
  mc.conv_c2 = kv.get_int("model.conv_c2", mc.conv_c2);
  mc.mlp_hidden = kv.get_int("model.mlp_hidden", mc.mlp_hidden);
  mc.adv_hidden = kv.get_int("model.adv_hidden", mc.adv_hidden);
  mc.dec_hidden = kv.get_int("model.dec_hidden", mc.dec_hidden);
  return mc;
}

train::TrainConfig train_config_from(KeyValues &kv) {
  train::TrainConfig tc;
  tc.batch_size = kv.get_int("train.batch_size", tc.batch_size);
  tc.momentum = kv.get_double("train.momentum", tc.momentum);
  tc.weight_decay = kv.get_double("train.weight_decay", tc.weight_decay);
  tc.lr_init = kv.get_double("train.lr_init", tc.lr_init);
  tc.lr_floor = kv.get_double("train.lr_floor", tc.lr_floor);
  tc.lr_decay = kv.get_double("train.lr_decay", tc.lr_decay);
  tc.phase1_epochs = kv.get_int("train.phase1_epochs", tc.phase1_epochs);
  tc.phase1_accuracy_threshold = kv.get_double(
      "train.phase1_accuracy_threshold", tc.phase1_accuracy_threshold);
  tc.phase2_epochs = kv.get_int("train.phase2_epochs", tc.phase2_epochs);
  tc.weights.lambda_p = kv.get_double("train.lambda_p", tc.weights.lambda_p);
  tc.weights.lambda_adv =
      kv.get_double("train.lambda_adv", tc.weights.lambda_adv);
  tc.weights.lambda_r = kv.get_double("train.lambda_r", tc.weights.lambda_r);
  tc.asoftmax.m = kv.get_int("train.margin", tc.asoftmax.m);
  tc.asoftmax.lambda_cos =
      kv.get_double("train.asoftmax_lambda", tc.asoftmax.lambda_cos);
  tc.asoftmax_lambda_start =
      kv.get_double("train.asoftmax_lambda_start", tc.asoftmax_lambda_start);
  tc.asoftmax_anneal_epochs =
      kv.get_int("train.asoftmax_anneal_epochs", tc.asoftmax_anneal_epochs);
  tc.k_adv = kv.get_int("train.k_adv", tc.k_adv);
  tc.seed = kv.get_u64("train.seed", tc.seed);
  tc.ablation =
      train::ablation_from_name(kv.get_string("train.ablation", "full"));
  tc.holdout_fraction =
      kv.get_double("train.holdout_fraction", tc.holdout_fraction);
  tc.max_phase2_steps =
      kv.get_int("train.max_phase2_steps", tc.max_phase2_steps);
  return tc;
}

net::Model model_from_checkpoint(const ckpt::Checkpoint &c) {
  KeyValues kv = KeyValues::from_text(c.config_text, "<checkpoint>");
  net::ModelConfig mc = model_config_from(kv);
  std::mt19937_64 rng(0);  // initial values are overwritten below
  net::Model model(mc, rng);
  for (const auto &named : model.named_params()) {
    const ckpt::TensorRecord *rec = c.find(named.first);
    if (!rec)
      throw DataError("checkpoint lacks tensor '" + named.first + "'");
    if (rec->shape != named.second.shape())
      throw DataError("checkpoint tensor '" + named.first +
                      "' does not match the model architecture");
    autodiff::Tensor t = named.second;
    t.data() = rec->values;
  }
  return model;
}

train::TrainConfig train_config_from_checkpoint(const ckpt::Checkpoint &c) {
  KeyValues kv = KeyValues::from_text(c.config_text, "<checkpoint>");
  return train_config_from(kv);
}

}  // namespace cli
}  // namespace aldr
