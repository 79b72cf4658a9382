// src/commands.cc

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

#include "aldr/commands.h"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <random>

#include "aldr/dataset.h"
#include "aldr/error.h"
#include "aldr/evaluator.h"
#include "aldr/runconfig.h"
#include "aldr/trainer.h"

namespace fs = std::filesystem;

namespace aldr {
namespace cli {

namespace {

// Model-init stream, derived from the run seed but distinct from the
// trainer's own stream so initialization and batch order never correlate.
std::mt19937_64 model_rng(std::uint64_t seed) {
  return std::mt19937_64(seed ^ 0xc2b2ae3d27d4eb4full);
}

std::string sibling(const std::string &anchor, const char *name) {
  fs::path p(anchor);
  return (p.parent_path() / name).string();
}

}  // namespace

std::uint64_t seed_from_env(std::uint64_t fallback) {
  const char *env = std::getenv("ALDR_SEED");
  if (!env || *env == '\0') return fallback;
  errno = 0;
  char *end = nullptr;
  unsigned long long v = std::strtoull(env, &end, 10);
  if (errno != 0 || end == env || *end != '\0' || env[0] == '-')
    throw ConfigError(std::string("ALDR_SEED: expected unsigned integer, "
                                  "got '") +
                      env + "'");
  return v;
}

void cmd_generate(const GenerateArgs &a, std::ostream &out) {
  if (fs::exists(a.out_dir) && !fs::is_empty(a.out_dir) && !a.force)
    throw DataError("output directory " + a.out_dir +
                    " is not empty (pass --force to overwrite)");
  data::SynthSpec spec;
  spec.n_speakers = a.speakers;
  spec.n_nuisance = a.nuisance;
  spec.utts_per_speaker = a.utts;
  spec.seed = a.seed;
  spec.seconds = a.seconds;
  data::GeneratedDataset d = data::generate_synthetic(spec, a.out_dir);
  out << "wrote " << d.manifest.entries.size() << " utterances ("
      << a.speakers << " speakers, " << a.nuisance
      << " nuisance classes) to " << a.out_dir << "\n";
}

void cmd_train(const TrainArgs &a, std::ostream &out) {
  KeyValues kv = KeyValues::from_file(a.config_path);
  const bool seed_in_file = kv.has("train.seed");
  net::ModelConfig mc = model_config_from(kv);
  train::TrainConfig tc = train_config_from(kv);
  if (!seed_in_file) tc.seed = seed_from_env(tc.seed);
  if (!a.ablation.empty()) tc.ablation = train::ablation_from_name(a.ablation);
  const std::string manifest_path = kv.get_string("data.manifest");
  const std::string ckpt_path =
      kv.get_string("out.checkpoint", "checkpoint.bin");
  const std::string log_path = kv.get_string("out.log", "train.log");
  kv.forbid_unknown();

  data::Manifest manifest = data::load_manifest(manifest_path);
  if (mc.n_speakers == 0) {
    mc.n_speakers = manifest.n_speakers();
  } else if (mc.n_speakers != manifest.n_speakers()) {
    throw ConfigError("model.n_speakers=" + std::to_string(mc.n_speakers) +
                      " but the manifest has " +
                      std::to_string(manifest.n_speakers()) + " speakers");
  }
  train::Corpus corpus = train::Corpus::load(manifest);

  std::mt19937_64 rng = model_rng(tc.seed);
  net::Model model(mc, rng);
  train::Trainer trainer(model, corpus, tc);
  const bool resuming = !a.resume.empty();
  if (resuming) trainer.restore(a.resume);

  std::ofstream log(log_path, resuming ? std::ios::app : std::ios::trunc);
  if (!log) throw DataError("cannot write training log " + log_path);
  trainer.run(&log, ckpt_path);
  if (!log.flush()) throw DataError("failed writing training log " + log_path);

  out << "trained " << train::ablation_name(tc.ablation) << ": phase1 "
      << trainer.epochs_phase1_done() << " epochs, phase2 "
      << trainer.epochs_phase2_done() << " epochs ("
      << trainer.phase2_steps_done() << " steps); checkpoint " << ckpt_path
      << "\n";
}

void cmd_eval(const EvalArgs &a, std::ostream &out) {
  ckpt::Checkpoint c = ckpt::read_checkpoint(a.checkpoint);
  net::Model model = model_from_checkpoint(c);
  train::TrainConfig tc = train_config_from_checkpoint(c);

  const std::string manifest_path =
      a.manifest.empty() ? sibling(a.trials, "manifest.txt") : a.manifest;
  data::Manifest manifest = data::load_manifest(manifest_path);
  std::vector<data::TrialPair> trials = data::load_trials(a.trials, manifest);
  train::Corpus corpus = train::Corpus::load(manifest);

  const eval::FeatureSource src = train::eval_uses_eliminating(tc.ablation)
                                      ? eval::FeatureSource::kEliminating
                                      : eval::FeatureSource::kPurifying;
  eval::VerificationReport rep =
      eval::evaluate_verification(model, corpus, trials, src);

  std::vector<eval::ProbeReport> probes;
  if (a.probe) {
    corpus.nuisance_labels =
        data::load_nuisance(sibling(manifest_path, "nuisance.txt"), manifest);
    std::vector<std::vector<double>> fp(corpus.size()), fe(corpus.size());
    for (int i = 0; i < corpus.size(); ++i) {
      fp[i] = eval::embed_utterance(model, corpus.specs[i],
                                    eval::FeatureSource::kPurifying);
      fe[i] = eval::embed_utterance(model, corpus.specs[i],
                                    eval::FeatureSource::kEliminating);
    }
    eval::ProbeConfig pc;
    pc.seed = tc.seed;
    const struct {
      const char *target;
      const char *source;
      const std::vector<std::vector<double>> *feats;
      const std::vector<int> *labels;
    } plan[] = {
        {"speaker", "f_p", &fp, &corpus.speaker_labels},
        {"speaker", "f_e", &fe, &corpus.speaker_labels},
        {"nuisance", "f_p", &fp, &corpus.nuisance_labels},
        {"nuisance", "f_e", &fe, &corpus.nuisance_labels},
    };
    for (const auto &p : plan) {
      eval::ProbeReport r = eval::linear_probe(*p.feats, *p.labels, pc);
      r.target = p.target;
      r.source = p.source;
      probes.push_back(r);
    }
  }

  fs::create_directories(a.out_dir);
  eval::emit_report(rep, probes, a.out_dir);
  char line[160];
  std::snprintf(line, sizeof line,
                "EER %.2f%%  minDCF %.4f  (%d target / %d nontarget trials, "
                "scored on %s)\n",
                rep.eer * 100.0, rep.c_det_min, rep.n_target, rep.n_nontarget,
                src == eval::FeatureSource::kEliminating ? "f_e" : "f_p");
  out << line << "report written to " << a.out_dir << "\n";
}

}  // namespace cli
}  // namespace aldr
