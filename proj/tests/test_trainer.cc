// tests/test_trainer.cc

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
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <vector>

#include "aldr/checkpoint.h"
#include "aldr/trainer.h"
#include "doctest.h"

namespace fs = std::filesystem;
using aldr::ConfigError;
using aldr::DataError;
using aldr::NumericError;
using aldr::autodiff::Group;
using aldr::autodiff::Tensor;
using aldr::train::Ablation;
using aldr::train::Corpus;
using aldr::train::TrainConfig;
using aldr::train::Trainer;

namespace {

struct Fixture {
  fs::path dir;
  aldr::data::Manifest manifest;
  Corpus corpus;
};

// Small learnable set shared by every case: 4 speakers x 2 nuisance classes
// x 8 one-second utterances.
const Fixture &fx() {
  static Fixture *f = [] {
    auto *r = new Fixture;
    r->dir = fs::temp_directory_path() / "aldr_trainer_fixture";
    fs::remove_all(r->dir);
    aldr::data::SynthSpec spec;
    spec.n_speakers = 4;
    spec.n_nuisance = 2;
    spec.utts_per_speaker = 8;
    spec.seed = 77;
    spec.seconds = 1.0;
    aldr::data::GeneratedDataset d =
        aldr::data::generate_synthetic(spec, r->dir.string());
    r->manifest = d.manifest;
    r->corpus = Corpus::load(r->manifest);
    return r;
  }();
  return *f;
}

aldr::net::ModelConfig small_model() {
  aldr::net::ModelConfig mc;
  mc.kind = "mlp";
  mc.frames = 50;
  mc.bins = aldr::audio::kNumBins;
  mc.embedding_dim = 8;
  mc.n_speakers = 4;
  mc.mlp_hidden = 16;
  mc.adv_hidden = 16;
  mc.dec_hidden = 16;
  return mc;
}

aldr::net::ModelConfig small_conv_model() {
  aldr::net::ModelConfig mc;
  mc.kind = "conv";
  mc.frames = 50;
  mc.bins = aldr::audio::kNumBins;
  mc.embedding_dim = 8;
  mc.n_speakers = 4;
  mc.conv_c1 = 4;
  mc.conv_c2 = 8;
  mc.adv_hidden = 16;
  mc.dec_hidden = 16;
  return mc;
}

TrainConfig small_train(Ablation a = Ablation::kFull) {
  TrainConfig tc;
  tc.batch_size = 8;
  tc.phase1_epochs = 2;
  tc.phase1_accuracy_threshold = 0.999;
  tc.phase2_epochs = 2;
  tc.seed = 99;
  tc.ablation = a;
  tc.holdout_fraction = 0.25;
  return tc;
}

std::vector<std::vector<double>> snapshot(const aldr::net::Model &m) {
  std::vector<std::vector<double>> s;
  for (const auto &kv : m.named_params()) s.push_back(kv.second.data());
  return s;
}

}  // namespace

TEST_CASE("sgd reproduces hand-computed single steps") {
  std::vector<double> v;
  Tensor p = Tensor::from_values({1}, {1.0}, true);
  p.grad()[0] = 1.0;
  aldr::train::sgd_step(p, v, 0.1, 0.9, 0.0);
  CHECK_EQ(p.data()[0], 0.9);
  CHECK_EQ(v[0], 1.0);
  CHECK_EQ((*p.grad_if_any())[0], 0.0);

  // Decay-only step: v = 0.5 p, p -= lr v.
  v.clear();
  p = Tensor::from_values({1}, {1.0}, true);
  aldr::train::sgd_step(p, v, 0.1, 0.9, 0.5);
  CHECK_EQ(p.data()[0], 0.95);

  // Zero grad, zero velocity, no decay: unchanged.
  v.clear();
  p = Tensor::from_values({1}, {0.7}, true);
  aldr::train::sgd_step(p, v, 0.1, 0.9, 0.0);
  CHECK_EQ(p.data()[0], 0.7);

  p.grad()[0] = std::nan("");
  CHECK_THROWS_AS(aldr::train::sgd_step(p, v, 0.1, 0.9, 0.0), NumericError);
}

TEST_CASE("learning rate decays per epoch down to the floor") {
  TrainConfig tc;
  CHECK_EQ(aldr::train::lr_schedule(tc, 0), 1e-2);
  CHECK_EQ(aldr::train::lr_schedule(tc, 1),
           doctest::Approx(9e-3).epsilon(1e-12));
  CHECK_EQ(aldr::train::lr_schedule(tc, 2),
           doctest::Approx(8.1e-3).epsilon(1e-12));
  CHECK_EQ(aldr::train::lr_schedule(tc, 500), 1e-6);
}

TEST_CASE("angular-loss lambda decays linearly to its end value") {
  TrainConfig tc;
  tc.asoftmax.lambda_cos = 5.0;
  tc.asoftmax_lambda_start = 1000.0;
  tc.asoftmax_anneal_epochs = 10;
  CHECK_EQ(aldr::train::asoftmax_lambda_schedule(tc, 0), 1000.0);
  CHECK_EQ(aldr::train::asoftmax_lambda_schedule(tc, 5),
           doctest::Approx(502.5).epsilon(1e-12));
  CHECK_EQ(aldr::train::asoftmax_lambda_schedule(tc, 10), 5.0);
  CHECK_EQ(aldr::train::asoftmax_lambda_schedule(tc, 99), 5.0);
  tc.asoftmax_anneal_epochs = 0;  // disabled: constant
  CHECK_EQ(aldr::train::asoftmax_lambda_schedule(tc, 0), 5.0);
  tc.asoftmax_anneal_epochs = -1;
  CHECK_THROWS_AS(tc.validate(), ConfigError);
  tc.asoftmax_anneal_epochs = 10;
  tc.asoftmax_lambda_start = 1.0;  // below the end value
  CHECK_THROWS_AS(tc.validate(), ConfigError);
}

TEST_CASE("ablation names round-trip and bad ones list the valid set") {
  for (Ablation a :
       {Ablation::kFull, Ablation::kEpOnly, Ablation::kEpDr,
        Ablation::kEpRandvecDr, Ablation::kEeOnly, Ablation::kEeNoAdvS,
        Ablation::kEeNoAdvE}) {
    CHECK_EQ(aldr::train::ablation_from_name(aldr::train::ablation_name(a)),
             a);
  }
  CHECK(aldr::train::eval_uses_eliminating(Ablation::kEeOnly));
  CHECK(aldr::train::eval_uses_eliminating(Ablation::kEeNoAdvE));
  CHECK_FALSE(aldr::train::eval_uses_eliminating(Ablation::kFull));
  try {
    aldr::train::ablation_from_name("bogus");
    CHECK(false);
  } catch (const ConfigError &e) {
    CHECK(std::string(e.what()).find("ep_randvec_dr") != std::string::npos);
    CHECK(std::string(e.what()).find("bogus") != std::string::npos);
  }
}

TEST_CASE("config bounds are validated") {
  TrainConfig tc;
  tc.batch_size = 0;
  CHECK_THROWS_AS(tc.validate(), ConfigError);
  tc = TrainConfig();
  tc.lr_decay = 1.0;
  CHECK_THROWS_AS(tc.validate(), ConfigError);
  tc = TrainConfig();
  tc.weights.lambda_r = -0.1;
  CHECK_THROWS_AS(tc.validate(), ConfigError);
  tc = TrainConfig();
  tc.k_adv = 0;
  CHECK_THROWS_AS(tc.validate(), ConfigError);
}

TEST_CASE("corpus load caches one normalized spectrogram per utterance") {
  const Fixture &f = fx();
  CHECK_EQ(f.corpus.size(), 32);
  CHECK_EQ(f.corpus.n_speakers, 4);
  CHECK_EQ(f.corpus.specs[0].frames, 98);
  CHECK(f.corpus.specs[0].normalized);
  CHECK_EQ(f.corpus.ids[0], f.manifest.entries[0].id);
}

TEST_CASE("holdout split is stratified and disjoint") {
  const Fixture &f = fx();
  std::mt19937_64 rng(5);
  aldr::net::Model m(small_model(), rng);
  Trainer tr(m, f.corpus, small_train());
  CHECK_EQ(tr.holdout_indices().size(), 8);  // floor(0.25*8)=2 per speaker
  CHECK_EQ(tr.train_indices().size(), 24);
  std::map<int, int> held_per_speaker;
  std::set<int> seen;
  for (int u : tr.holdout_indices()) {
    held_per_speaker[f.corpus.speaker_labels[u]]++;
    CHECK(seen.insert(u).second);
  }
  for (int u : tr.train_indices()) CHECK(seen.insert(u).second);
  for (const auto &kv : held_per_speaker) CHECK_EQ(kv.second, 2);
}

TEST_CASE("zero learning rate leaves parameters bitwise unchanged") {
  const Fixture &f = fx();
  std::mt19937_64 rng(6);
  aldr::net::Model m(small_model(), rng);
  TrainConfig tc = small_train();
  tc.lr_init = 0.0;
  tc.lr_floor = 0.0;
  tc.phase1_epochs = 1;
  tc.phase2_epochs = 1;
  auto before = snapshot(m);
  Trainer tr(m, f.corpus, tc);
  // Drive the phases directly: the run() entry point also re-seeds E_e from
  // E_p between phases, which is a copy, not an optimizer update.
  tr.train_phase1();
  tr.train_phase2();
  CHECK(snapshot(m) == before);
}

TEST_CASE("phase 1 beats chance on the held-out speakers") {
  const Fixture &f = fx();
  std::mt19937_64 rng(7);
  aldr::net::Model m(small_conv_model(), rng);
  TrainConfig tc = small_train();
  tc.lr_init = 0.05;
  tc.phase1_epochs = 40;
  tc.phase1_accuracy_threshold = 0.85;
  tc.phase2_epochs = 0;
  Trainer tr(m, f.corpus, tc);
  std::ostringstream log;
  tr.run(&log);
  CHECK_GE(tr.holdout_speaker_accuracy(), 0.75);
  // Step lines carry eight space-separated fields.
  std::istringstream lines(log.str());
  std::string line;
  int step_lines = 0;
  while (std::getline(lines, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream cols(line);
    std::string col;
    int n = 0;
    while (cols >> col) ++n;
    CHECK_EQ(n, 8);
    ++step_lines;
  }
  CHECK_GT(step_lines, 0);
}

TEST_CASE("same seed same trajectory, different seed diverges") {
  const Fixture &f = fx();
  std::mt19937_64 rng1(8), rng2(8), rng3(8);
  aldr::net::Model m1(small_model(), rng1), m2(small_model(), rng2),
      m3(small_model(), rng3);
  TrainConfig tc = small_train();
  Trainer t1(m1, f.corpus, tc), t2(m2, f.corpus, tc);
  t1.run();
  t2.run();
  CHECK(snapshot(m1) == snapshot(m2));
  CHECK_EQ(t1.step_history().size(), t2.step_history().size());
  for (size_t i = 0; i < t1.step_history().size(); ++i)
    CHECK_EQ(t1.step_history()[i].l_total, t2.step_history()[i].l_total);

  tc.seed = 100;
  Trainer t3(m3, f.corpus, tc);
  t3.run();
  CHECK(snapshot(m3) != snapshot(m1));
}

TEST_CASE("ep_only phase 2 reduces to phase-1 training bitwise") {
  const Fixture &f = fx();
  std::mt19937_64 rng1(9), rng2(9), rng3(9);
  aldr::net::Model m1(small_model(), rng1), m2(small_model(), rng2),
      m3(small_model(), rng3);

  TrainConfig a = small_train(Ablation::kEpOnly);
  a.phase1_epochs = 0;
  a.phase2_epochs = 2;
  Trainer ta(m1, f.corpus, a);
  ta.run();

  // Full model with both extra weights zeroed takes the identical steps.
  TrainConfig b = small_train(Ablation::kFull);
  b.phase1_epochs = 0;
  b.phase2_epochs = 2;
  b.weights.lambda_adv = 0.0;
  b.weights.lambda_r = 0.0;
  Trainer tb(m2, f.corpus, b);
  tb.run();

  // Plain phase-1 epochs take them too.
  TrainConfig c = small_train(Ablation::kFull);
  c.phase1_epochs = 2;
  c.phase1_accuracy_threshold = 1.0;
  c.phase2_epochs = 0;
  Trainer tcr(m3, f.corpus, c);
  tcr.run();

  const auto &named1 = m1.named_params();
  const auto &named2 = m2.named_params();
  const auto &named3 = m3.named_params();
  for (size_t i = 0; i < named1.size(); ++i) {
    if (named1[i].second.group() == Group::kEncoderE) continue;
    CHECK(named1[i].second.data() == named2[i].second.data());
    CHECK(named1[i].second.data() == named3[i].second.data());
  }
  for (size_t i = 0; i < ta.step_history().size(); ++i) {
    CHECK_EQ(ta.step_history()[i].l_p, tb.step_history()[i].l_p);
    CHECK_EQ(ta.step_history()[i].l_adv_s, 0.0);
    CHECK_EQ(ta.step_history()[i].l_r, 0.0);
  }
}

TEST_CASE("a full step's change footprint is exactly the five groups") {
  const Fixture &f = fx();
  std::mt19937_64 rng(10);
  aldr::net::Model m(small_model(), rng);
  TrainConfig tc = small_train(Ablation::kFull);
  tc.phase1_epochs = 0;
  tc.phase2_epochs = 1;
  tc.max_phase2_steps = 1;
  Trainer tr(m, f.corpus, tc);
  auto before = snapshot(m);
  tr.run();
  CHECK_EQ(tr.phase2_steps_done(), 1);
  std::set<int> changed;
  const auto &named = m.named_params();
  for (size_t i = 0; i < named.size(); ++i)
    if (named[i].second.data() != before[i]) {
      changed.insert(static_cast<int>(named[i].second.group()));
    }
  CHECK_EQ(changed.size(), 5u);  // every group participates
}

TEST_CASE("ee_no_adv_e lets E_e move only through reconstruction") {
  const Fixture &f = fx();
  TrainConfig tc = small_train(Ablation::kEeNoAdvE);
  tc.phase1_epochs = 0;
  tc.phase2_epochs = 1;
  tc.max_phase2_steps = 2;

  // With reconstruction off too, E_e is frozen after the twin hand-off.
  std::mt19937_64 rng1(11);
  aldr::net::Model m1(small_model(), rng1);
  TrainConfig frozen = tc;
  frozen.weights.lambda_r = 0.0;
  Trainer t1(m1, f.corpus, frozen);
  t1.run();
  auto after = snapshot(m1);
  std::mt19937_64 rng2(11);
  aldr::net::Model m2(small_model(), rng2);
  m2.init_eliminating_from_purifying();
  auto handoff = snapshot(m2);
  const auto &named = m1.named_params();
  bool adv_changed = false;
  for (size_t i = 0; i < named.size(); ++i) {
    if (named[i].second.group() == Group::kEncoderE)
      CHECK(after[i] == handoff[i]);
    if (named[i].second.group() == Group::kClassifierAdv &&
        after[i] != handoff[i])
      adv_changed = true;
  }
  CHECK(adv_changed);  // the adversary still trains on L_adv_s

  // With reconstruction on, E_e does move.
  std::mt19937_64 rng3(11);
  aldr::net::Model m3(small_model(), rng3);
  Trainer t3(m3, f.corpus, tc);
  t3.run();
  auto with_recon = snapshot(m3);
  bool ee_changed = false;
  for (size_t i = 0; i < named.size(); ++i)
    if (named[i].second.group() == Group::kEncoderE &&
        with_recon[i] != handoff[i])
      ee_changed = true;
  CHECK(ee_changed);
}

TEST_CASE("pinned f_e branches train and stay deterministic") {
  const Fixture &f = fx();
  for (Ablation a : {Ablation::kEpDr, Ablation::kEpRandvecDr}) {
    std::mt19937_64 rng1(12), rng2(12);
    aldr::net::Model m1(small_model(), rng1), m2(small_model(), rng2);
    TrainConfig tc = small_train(a);
    tc.phase1_epochs = 0;
    tc.phase2_epochs = 1;
    Trainer t1(m1, f.corpus, tc), t2(m2, f.corpus, tc);
    t1.run();
    t2.run();
    CHECK(snapshot(m1) == snapshot(m2));
    // E_e and C_adv are untouched in these branches.
    const auto &named = m1.named_params();
    std::mt19937_64 rng3(12);
    aldr::net::Model init(small_model(), rng3);
    auto fresh = snapshot(init);
    for (size_t i = 0; i < named.size(); ++i) {
      Group g = named[i].second.group();
      if (g == Group::kEncoderE || g == Group::kClassifierAdv)
        CHECK(named[i].second.data() == fresh[i]);
      if (g == Group::kDecoder) CHECK(named[i].second.data() != fresh[i]);
    }
    for (const auto &sl : t1.step_history()) CHECK_GT(sl.l_r, 0.0);
  }

  // The two substitutes produce different reconstruction trajectories.
  std::mt19937_64 rng4(12), rng5(12);
  aldr::net::Model m4(small_model(), rng4), m5(small_model(), rng5);
  TrainConfig td = small_train(Ablation::kEpDr);
  td.phase1_epochs = 0;
  td.phase2_epochs = 1;
  TrainConfig tv = td;
  tv.ablation = Ablation::kEpRandvecDr;
  Trainer t4(m4, f.corpus, td), t5(m5, f.corpus, tv);
  t4.run();
  t5.run();
  CHECK_NE(t4.step_history()[0].l_r, t5.step_history()[0].l_r);
}

TEST_CASE("checkpoint container round-trips exactly and rejects damage") {
  fs::path dir = fs::temp_directory_path() / "aldr_ckpt_unit";
  fs::create_directories(dir);
  aldr::ckpt::Checkpoint c;
  c.config_text = "model.kind=mlp\ntrain.seed=5\n";
  c.epochs_phase1 = 3;
  c.epochs_phase2 = 7;
  c.steps_phase1 = 9;
  c.steps_phase2 = 21;
  c.rng_state = "12345 678 90";
  c.tensors.push_back({"enc_p.w1", {2, 3}, {1, 2, 3, 4, 5, 0.25}});
  c.tensors.push_back({"momentum.enc_p.w1", {2, 3}, {0, 0, 0, 0, 0, -1}});
  std::string path = (dir / "a.ckpt").string();
  aldr::ckpt::write_checkpoint(c, path);

  aldr::ckpt::Checkpoint r = aldr::ckpt::read_checkpoint(path);
  CHECK_EQ(r.config_text, c.config_text);
  CHECK_EQ(r.epochs_phase1, 3);
  CHECK_EQ(r.epochs_phase2, 7);
  CHECK_EQ(r.steps_phase1, 9);
  CHECK_EQ(r.steps_phase2, 21);
  CHECK_EQ(r.rng_state, c.rng_state);
  REQUIRE_EQ(r.tensors.size(), 2u);
  CHECK_EQ(r.tensors[0].name, "enc_p.w1");
  CHECK(r.tensors[0].shape == std::vector<int>{2, 3});
  CHECK(r.tensors[0].values == c.tensors[0].values);
  CHECK(r.find("momentum.enc_p.w1") != nullptr);
  CHECK(r.find("nope") == nullptr);

  // Truncation.
  auto bytes = [&] {
    std::ifstream in(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
  }();
  std::string trunc_path = (dir / "trunc.ckpt").string();
  std::ofstream(trunc_path, std::ios::binary)
      << bytes.substr(0, bytes.size() - 7);
  CHECK_THROWS_AS(aldr::ckpt::read_checkpoint(trunc_path), DataError);

  // Bad magic.
  std::string bad = bytes;
  bad[0] = 'X';
  std::string bad_path = (dir / "bad.ckpt").string();
  std::ofstream(bad_path, std::ios::binary) << bad;
  CHECK_THROWS_AS(aldr::ckpt::read_checkpoint(bad_path), DataError);

  // Unsupported version.
  std::string vers = bytes;
  vers[8] = 2;
  std::string vers_path = (dir / "vers.ckpt").string();
  std::ofstream(vers_path, std::ios::binary) << vers;
  try {
    aldr::ckpt::read_checkpoint(vers_path);
    CHECK(false);
  } catch (const DataError &e) {
    CHECK(std::string(e.what()).find("version") != std::string::npos);
  }

  // Trailing garbage.
  std::string tail_path = (dir / "tail.ckpt").string();
  std::ofstream(tail_path, std::ios::binary) << bytes << "zz";
  CHECK_THROWS_AS(aldr::ckpt::read_checkpoint(tail_path), DataError);
}

TEST_CASE("trainer checkpoints restore bitwise and replay identically") {
  const Fixture &f = fx();
  fs::path dir = fs::temp_directory_path() / "aldr_ckpt_trainer";
  fs::create_directories(dir);
  std::string path = (dir / "mid.ckpt").string();

  // Uninterrupted reference: 1 phase-1 epoch + 3 phase-2 epochs.
  std::mt19937_64 rng1(13);
  aldr::net::Model m1(small_model(), rng1);
  TrainConfig tc = small_train();
  tc.phase1_epochs = 1;
  tc.phase2_epochs = 3;
  Trainer t1(m1, f.corpus, tc);
  t1.run();

  // Interrupted twin: stop after 1 phase-2 epoch, checkpoint, resume fresh.
  std::mt19937_64 rng2(13);
  aldr::net::Model m2(small_model(), rng2);
  TrainConfig half = tc;
  half.phase2_epochs = 1;
  Trainer t2(m2, f.corpus, half);
  t2.run();
  t2.save(path);

  std::mt19937_64 rng3(999);  // deliberately different init
  aldr::net::Model m3(small_model(), rng3);
  Trainer t3(m3, f.corpus, tc);
  t3.restore(path);
  CHECK_EQ(t3.epochs_phase1_done(), 1);
  CHECK_EQ(t3.epochs_phase2_done(), 1);
  CHECK(snapshot(m3) == snapshot(m2));
  t3.run();

  CHECK(snapshot(m3) == snapshot(m1));
  size_t skip = t1.step_history().size() - t3.step_history().size();
  CHECK_EQ(skip, t2.step_history().size());
  for (size_t i = 0; i < t3.step_history().size(); ++i) {
    CHECK_EQ(t3.step_history()[i].l_p, t1.step_history()[skip + i].l_p);
    CHECK_EQ(t3.step_history()[i].l_total,
             t1.step_history()[skip + i].l_total);
  }

  // Save/load round trip is bitwise even for a retrained model.
  std::string again = (dir / "again.ckpt").string();
  t3.save(again);
  std::mt19937_64 rng4(1000);
  aldr::net::Model m4(small_model(), rng4);
  Trainer t4(m4, f.corpus, tc);
  t4.restore(again);
  CHECK(snapshot(m4) == snapshot(m3));

  // A checkpoint from a different architecture is rejected by name/shape.
  aldr::net::ModelConfig other = small_model();
  other.embedding_dim = 6;
  std::mt19937_64 rng5(1001);
  aldr::net::Model m5(other, rng5);
  Trainer t5(m5, f.corpus, tc);
  CHECK_THROWS_AS(t5.restore(again), DataError);
}

TEST_CASE("constructor rejects mismatched corpus or oversized batches") {
  const Fixture &f = fx();
  std::mt19937_64 rng(14);
  aldr::net::ModelConfig mc = small_model();
  mc.n_speakers = 5;
  aldr::net::Model m(mc, rng);
  CHECK_THROWS_AS(Trainer(m, f.corpus, small_train()), ConfigError);

  std::mt19937_64 rng2(14);
  aldr::net::Model m2(small_model(), rng2);
  TrainConfig tc = small_train();
  tc.batch_size = 1000;
  Trainer tr(m2, f.corpus, tc);
  CHECK_THROWS_AS(tr.run(), ConfigError);
}

TEST_CASE("a poisoned parameter surfaces as a numeric fault") {
  const Fixture &f = fx();
  std::mt19937_64 rng(15);
  aldr::net::Model m(small_model(), rng);
  // Poison the angular-loss weights: that path has no relu clamps that could
  // absorb the NaN before it reaches the loss.
  bool poisoned = false;
  for (const auto &kv : m.named_params()) {
    if (kv.first.find("speaker") != std::string::npos) {
      Tensor w = kv.second;
      w.data()[0] = std::nan("");
      poisoned = true;
      break;
    }
  }
  REQUIRE(poisoned);
  TrainConfig tc = small_train();
  tc.phase1_epochs = 1;
  Trainer tr(m, f.corpus, tc);
  CHECK_THROWS_AS(tr.run(), NumericError);
}
