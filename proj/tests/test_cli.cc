// tests/test_cli.cc

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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "aldr/commands.h"
#include "aldr/runconfig.h"
#include "doctest.h"

namespace fs = std::filesystem;
using aldr::ConfigError;
using aldr::DataError;
using aldr::cli::EvalArgs;
using aldr::cli::GenerateArgs;
using aldr::cli::KeyValues;
using aldr::cli::TrainArgs;

namespace {

std::string slurp(const fs::path &p) {
  std::ifstream f(p, std::ios::binary);
  REQUIRE(f.good());
  std::stringstream buf;
  buf << f.rdbuf();
  return buf.str();
}

void write_file(const fs::path &p, const std::string &text) {
  std::ofstream f(p, std::ios::binary | std::ios::trunc);
  f << text;
  REQUIRE(f.good());
}

// One generated dataset shared by the command tests.
const fs::path &data_dir() {
  static fs::path *dir = [] {
    auto *d = new fs::path(fs::temp_directory_path() / "aldr_cli_fixture");
    fs::remove_all(*d);
    GenerateArgs ga;
    ga.out_dir = d->string();
    ga.speakers = 4;
    ga.nuisance = 2;
    ga.utts = 6;
    ga.seed = 31;
    ga.seconds = 1.0;
    std::ostringstream sink;
    aldr::cli::cmd_generate(ga, sink);
    return d;
  }();
  return *dir;
}

std::string base_config(const fs::path &work) {
  std::ostringstream os;
  os << "model.kind=mlp\n"
     << "model.frames=50\n"
     << "model.embedding_dim=8\n"
     << "model.mlp_hidden=16\n"
     << "model.adv_hidden=16\n"
     << "model.dec_hidden=16\n"
     << "train.batch_size=6\n"
     << "train.phase1_epochs=2\n"
     << "train.phase2_epochs=2\n"
     << "train.seed=5\n"
     << "train.holdout_fraction=0.25\n"
     << "data.manifest=" << (data_dir() / "manifest.txt").string() << "\n"
     << "out.checkpoint=" << (work / "ckpt.bin").string() << "\n"
     << "out.log=" << (work / "train.log").string() << "\n";
  return os.str();
}

}  // namespace

TEST_CASE("config parser: comments, trimming, and malformed lines") {
  KeyValues kv = KeyValues::from_text(
      "# comment\n\n  train.lr_init = 0.5 \ntrain.seed=7\n");
  CHECK_EQ(kv.get_double("train.lr_init", 0.0), 0.5);
  CHECK_EQ(kv.get_u64("train.seed", 0), 7);
  CHECK_FALSE(kv.has("train.momentum"));
  kv.forbid_unknown();  // everything consumed

  CHECK_THROWS_AS(KeyValues::from_text("no equals sign\n"), ConfigError);
  CHECK_THROWS_AS(KeyValues::from_text("=value\n"), ConfigError);
  CHECK_THROWS_AS(KeyValues::from_text("a=1\na=2\n"), ConfigError);
}

TEST_CASE("config parser: required keys, types, and unknown-key rejection") {
  KeyValues kv = KeyValues::from_text("train.batch_size=abc\nx.y=1\n");
  try {
    kv.get_string("data.manifest");
    CHECK(false);
  } catch (const ConfigError &e) {
    CHECK(std::string(e.what()).find("data.manifest") != std::string::npos);
  }
  CHECK_THROWS_AS(kv.get_int("train.batch_size", 1), ConfigError);
  try {
    kv.forbid_unknown();
    CHECK(false);
  } catch (const ConfigError &e) {
    CHECK(std::string(e.what()).find("x.y") != std::string::npos);
  }
}

TEST_CASE("config converters fill model and trainer settings") {
  KeyValues kv = KeyValues::from_text(
      "model.kind=conv\nmodel.frames=64\nmodel.conv_c1=3\n"
      "train.lr_init=0.05\ntrain.ablation=ep_randvec_dr\ntrain.margin=2\n");
  aldr::net::ModelConfig mc = aldr::cli::model_config_from(kv);
  CHECK_EQ(mc.kind, "conv");
  CHECK_EQ(mc.frames, 64);
  CHECK_EQ(mc.conv_c1, 3);
  CHECK_EQ(mc.bins, aldr::audio::kNumBins);  // default preserved
  aldr::train::TrainConfig tc = aldr::cli::train_config_from(kv);
  CHECK_EQ(tc.lr_init, 0.05);
  CHECK_EQ(tc.asoftmax.m, 2);
  CHECK(tc.ablation == aldr::train::Ablation::kEpRandvecDr);
  CHECK_EQ(tc.batch_size, aldr::train::TrainConfig().batch_size);
  kv.forbid_unknown();

  KeyValues bad = KeyValues::from_text("train.ablation=nonsense\n");
  CHECK_THROWS_AS(aldr::cli::train_config_from(bad), ConfigError);
}

TEST_CASE("generate: counting, determinism, and the force guard") {
  fs::path a = fs::temp_directory_path() / "aldr_cli_gen_a";
  fs::path b = fs::temp_directory_path() / "aldr_cli_gen_b";
  fs::remove_all(a);
  fs::remove_all(b);
  GenerateArgs ga;
  ga.speakers = 8;
  ga.nuisance = 2;
  ga.utts = 10;
  ga.seed = 77;
  ga.seconds = 1.0;
  std::ostringstream sink;
  ga.out_dir = a.string();
  aldr::cli::cmd_generate(ga, sink);
  ga.out_dir = b.string();
  aldr::cli::cmd_generate(ga, sink);

  aldr::data::Manifest m = aldr::data::load_manifest((a / "manifest.txt").string());
  CHECK_EQ(m.entries.size(), 80);
  CHECK_EQ(m.n_speakers(), 8);

  // Same seed gives byte-identical artifacts.
  CHECK_EQ(slurp(a / "manifest.txt"), slurp(b / "manifest.txt"));
  CHECK_EQ(slurp(a / "trials.txt"), slurp(b / "trials.txt"));
  CHECK_EQ(slurp(a / "nuisance.txt"), slurp(b / "nuisance.txt"));
  CHECK_EQ(slurp(a / m.entries[0].path), slurp(b / m.entries[0].path));

  // Refuse to clobber without force, allow with it.
  ga.out_dir = a.string();
  CHECK_THROWS_AS(aldr::cli::cmd_generate(ga, sink), DataError);
  ga.force = true;
  aldr::cli::cmd_generate(ga, sink);

  ga.force = false;
  ga.speakers = 1;
  ga.out_dir = (fs::temp_directory_path() / "aldr_cli_gen_c").string();
  fs::remove_all(ga.out_dir);
  CHECK_THROWS_AS(aldr::cli::cmd_generate(ga, sink), ConfigError);
  fs::remove_all(b);
}

TEST_CASE("train command writes log and checkpoint; override and errors") {
  fs::path work = fs::temp_directory_path() / "aldr_cli_train";
  fs::remove_all(work);
  fs::create_directories(work);
  write_file(work / "run.cfg", base_config(work));

  TrainArgs ta;
  ta.config_path = (work / "run.cfg").string();
  std::ostringstream out;
  aldr::cli::cmd_train(ta, out);
  CHECK(fs::exists(work / "ckpt.bin"));
  CHECK(fs::exists(work / "train.log"));
  CHECK(out.str().find("full") != std::string::npos);

  // The ablation override is recorded in the checkpoint.
  ta.ablation = "ep_only";
  aldr::cli::cmd_train(ta, out);
  aldr::ckpt::Checkpoint c =
      aldr::ckpt::read_checkpoint((work / "ckpt.bin").string());
  aldr::train::TrainConfig tc = aldr::cli::train_config_from_checkpoint(c);
  CHECK(tc.ablation == aldr::train::Ablation::kEpOnly);

  ta.ablation = "bogus";
  try {
    aldr::cli::cmd_train(ta, out);
    CHECK(false);
  } catch (const ConfigError &e) {
    CHECK(std::string(e.what()).find("ep_randvec_dr") != std::string::npos);
  }

  // A config without the manifest key names the missing key.
  write_file(work / "nomanifest.cfg", "train.seed=5\n");
  ta = TrainArgs();
  ta.config_path = (work / "nomanifest.cfg").string();
  try {
    aldr::cli::cmd_train(ta, out);
    CHECK(false);
  } catch (const ConfigError &e) {
    CHECK(std::string(e.what()).find("data.manifest") != std::string::npos);
  }

  // Unknown keys are rejected by name.
  write_file(work / "typo.cfg", base_config(work) + "train.lr_final=1\n");
  ta.config_path = (work / "typo.cfg").string();
  try {
    aldr::cli::cmd_train(ta, out);
    CHECK(false);
  } catch (const ConfigError &e) {
    CHECK(std::string(e.what()).find("train.lr_final") != std::string::npos);
  }
}

TEST_CASE("checkpoint config text rebuilds the same model and settings") {
  fs::path work = fs::temp_directory_path() / "aldr_cli_roundtrip";
  fs::remove_all(work);
  fs::create_directories(work);
  write_file(work / "run.cfg", base_config(work));
  TrainArgs ta;
  ta.config_path = (work / "run.cfg").string();
  std::ostringstream out;
  aldr::cli::cmd_train(ta, out);

  aldr::ckpt::Checkpoint c =
      aldr::ckpt::read_checkpoint((work / "ckpt.bin").string());
  aldr::net::Model m = aldr::cli::model_from_checkpoint(c);
  CHECK_EQ(m.config().kind, "mlp");
  CHECK_EQ(m.config().frames, 50);
  CHECK_EQ(m.config().n_speakers, 4);
  for (const auto &kv : m.named_params()) {
    const aldr::ckpt::TensorRecord *rec = c.find(kv.first);
    REQUIRE(rec != nullptr);
    CHECK(kv.second.data() == rec->values);
  }
  aldr::train::TrainConfig tc = aldr::cli::train_config_from_checkpoint(c);
  CHECK_EQ(tc.seed, 5);
  CHECK_EQ(tc.batch_size, 6);

  // A tampered architecture line must be rejected.
  aldr::ckpt::Checkpoint broken = c;
  size_t at = broken.config_text.find("model.embedding_dim=8");
  REQUIRE(at != std::string::npos);
  broken.config_text.replace(at, 21, "model.embedding_dim=9");
  CHECK_THROWS_AS(aldr::cli::model_from_checkpoint(broken), DataError);
}

TEST_CASE("resume through the command reproduces the uninterrupted run") {
  fs::path full = fs::temp_directory_path() / "aldr_cli_res_full";
  fs::path parts = fs::temp_directory_path() / "aldr_cli_res_parts";
  fs::remove_all(full);
  fs::remove_all(parts);
  fs::create_directories(full);
  fs::create_directories(parts);
  std::ostringstream out;

  write_file(full / "run.cfg", base_config(full));
  TrainArgs ta;
  ta.config_path = (full / "run.cfg").string();
  aldr::cli::cmd_train(ta, out);

  // Same schedule, but stop after one phase-2 epoch, then resume.
  std::string cfg = base_config(parts);
  size_t at = cfg.find("train.phase2_epochs=2");
  REQUIRE(at != std::string::npos);
  write_file(parts / "short.cfg",
             std::string(cfg).replace(at, 21, "train.phase2_epochs=1"));
  write_file(parts / "run.cfg", cfg);
  ta.config_path = (parts / "short.cfg").string();
  aldr::cli::cmd_train(ta, out);
  ta.config_path = (parts / "run.cfg").string();
  ta.resume = (parts / "ckpt.bin").string();
  aldr::cli::cmd_train(ta, out);

  aldr::ckpt::Checkpoint a =
      aldr::ckpt::read_checkpoint((full / "ckpt.bin").string());
  aldr::ckpt::Checkpoint b =
      aldr::ckpt::read_checkpoint((parts / "ckpt.bin").string());
  REQUIRE_EQ(a.tensors.size(), b.tensors.size());
  for (size_t i = 0; i < a.tensors.size(); ++i) {
    CHECK_EQ(a.tensors[i].name, b.tensors[i].name);
    CHECK(a.tensors[i].values == b.tensors[i].values);
  }
  CHECK_EQ(a.rng_state, b.rng_state);
}

TEST_CASE("eval command emits reports; ee checkpoints score on f_e") {
  fs::path work = fs::temp_directory_path() / "aldr_cli_eval";
  fs::remove_all(work);
  fs::create_directories(work);
  write_file(work / "run.cfg", base_config(work));
  std::ostringstream out;
  TrainArgs ta;
  ta.config_path = (work / "run.cfg").string();
  aldr::cli::cmd_train(ta, out);

  EvalArgs ea;
  ea.checkpoint = (work / "ckpt.bin").string();
  ea.trials = (data_dir() / "trials.txt").string();
  ea.out_dir = (work / "report").string();
  ea.probe = true;
  std::ostringstream eo;
  aldr::cli::cmd_eval(ea, eo);
  CHECK(fs::exists(work / "report" / "report.txt"));
  CHECK(fs::exists(work / "report" / "det.csv"));
  CHECK(fs::exists(work / "report" / "scores.txt"));
  CHECK(eo.str().find("f_p") != std::string::npos);
  std::string rep = slurp(work / "report" / "report.txt");
  CHECK(rep.find("probes") != std::string::npos);
  CHECK(rep.find("nuisance") != std::string::npos);

  // An eliminating-branch checkpoint flips the scoring source.
  ta.ablation = "ee_only";
  aldr::cli::cmd_train(ta, out);
  std::ostringstream eo2;
  ea.probe = false;
  ea.out_dir = (work / "report_ee").string();
  aldr::cli::cmd_eval(ea, eo2);
  CHECK(eo2.str().find("f_e") != std::string::npos);

  // A trial list with an unknown id names the offender.
  write_file(work / "bad_trials.txt", "1 nosuch u0\n");
  ea.trials = (work / "bad_trials.txt").string();
  ea.manifest = (data_dir() / "manifest.txt").string();
  ea.out_dir = (work / "report_bad").string();
  try {
    aldr::cli::cmd_eval(ea, eo2);
    CHECK(false);
  } catch (const DataError &e) {
    CHECK(std::string(e.what()).find("nosuch") != std::string::npos);
  }
}

TEST_CASE("a full seeded pipeline is byte-reproducible") {
  std::ostringstream sink;
  std::vector<std::string> scores;
  for (int run = 0; run < 2; ++run) {
    fs::path root = fs::temp_directory_path() /
                    ("aldr_cli_repro_" + std::to_string(run));
    fs::remove_all(root);
    fs::create_directories(root);
    GenerateArgs ga;
    ga.out_dir = (root / "data").string();
    ga.speakers = 4;
    ga.nuisance = 2;
    ga.utts = 6;
    ga.seed = 99;
    ga.seconds = 1.0;
    aldr::cli::cmd_generate(ga, sink);
    std::ostringstream cfg;
    cfg << "model.kind=mlp\nmodel.frames=50\nmodel.embedding_dim=8\n"
        << "model.mlp_hidden=16\nmodel.adv_hidden=16\nmodel.dec_hidden=16\n"
        << "train.batch_size=6\ntrain.phase1_epochs=1\n"
        << "train.phase2_epochs=1\ntrain.seed=17\n"
        << "data.manifest=" << (root / "data" / "manifest.txt").string()
        << "\nout.checkpoint=" << (root / "ckpt.bin").string()
        << "\nout.log=" << (root / "train.log").string() << "\n";
    write_file(root / "run.cfg", cfg.str());
    TrainArgs ta;
    ta.config_path = (root / "run.cfg").string();
    aldr::cli::cmd_train(ta, sink);
    EvalArgs ea;
    ea.checkpoint = (root / "ckpt.bin").string();
    ea.trials = (root / "data" / "trials.txt").string();
    ea.out_dir = (root / "report").string();
    aldr::cli::cmd_eval(ea, sink);
    scores.push_back(slurp(root / "report" / "scores.txt"));
    CHECK_GT(scores.back().size(), 0);
  }
  CHECK_EQ(scores[0], scores[1]);
}

TEST_CASE("ALDR_SEED is a fallback, not an override") {
  ::setenv("ALDR_SEED", "4242", 1);
  CHECK_EQ(aldr::cli::seed_from_env(1), 4242);
  ::setenv("ALDR_SEED", "-3", 1);
  CHECK_THROWS_AS(aldr::cli::seed_from_env(1), ConfigError);
  ::unsetenv("ALDR_SEED");
  CHECK_EQ(aldr::cli::seed_from_env(9), 9);
}
