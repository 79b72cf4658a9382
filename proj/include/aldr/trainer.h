// aldr/trainer.h

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

#ifndef ALDR_TRAINER_H_
#define ALDR_TRAINER_H_

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include "aldr/audio.h"
#include "aldr/dataset.h"
#include "aldr/losses.h"
#include "aldr/networks.h"
#include "aldr/tensor.h"

namespace aldr {
namespace train {

enum class Ablation {
  kFull = 0,
  kEpOnly,       // speaker supervision only; phase 2 degenerates to phase 1
  kEpDr,         // reconstruction with f_e pinned to zeros; no E_e, no C_adv
  kEpRandvecDr,  // f_e pinned to a fixed per-utterance random vector
  kEeOnly,       // trains like kFull; the branch differs only at evaluation
  kEeNoAdvS,     // adversary never trained
  kEeNoAdvE,     // eliminating objective off; E_e changes only through L_r
};

// ConfigError listing the valid names on an unknown one.
Ablation ablation_from_name(const std::string &name);
const std::string &ablation_name(Ablation a);
// True for branches whose verification embedding comes from E_e.
bool eval_uses_eliminating(Ablation a);

struct TrainConfig {
  int batch_size = 64;
  double momentum = 0.9;
  double weight_decay = 5e-4;
  double lr_init = 1e-2;
  double lr_floor = 1e-6;
  double lr_decay = 0.9;  // per cycle; one cycle = one epoch
  int phase1_epochs = 15;
  double phase1_accuracy_threshold = 0.9;
  int phase2_epochs = 24;
  losses::LossWeights weights;
  losses::ASoftmaxConfig asoftmax;
  // Optional linear decay of the angular-loss lambda from `lambda_start`
  // down to asoftmax.lambda_cos over the first `anneal_epochs` epochs.
  // A margin applied from a cold start collapses the embedding norm, so the
  // default eases it in; 0 epochs holds lambda constant.
  double asoftmax_lambda_start = 1000.0;
  int asoftmax_anneal_epochs = 10;
  int k_adv = 1;  // adversary steps per eliminating step
  std::uint64_t seed = 1234;
  Ablation ablation = Ablation::kFull;
  double holdout_fraction = 0.2;
  int max_phase2_steps = 0;  // 0 = unbounded; cap for replay tests

  void validate() const;  // ConfigError on violated bounds
};

// In-memory training set: one normalized spectrogram per utterance.
struct Corpus {
  std::vector<audio::Spectrogram> specs;
  std::vector<int> speaker_labels;
  std::vector<int> nuisance_labels;  // empty when no sidecar was loaded
  std::vector<std::string> ids;
  int n_speakers = 0;

  int size() const { return static_cast<int>(specs.size()); }
  // Reads every manifest wav and caches its normalized spectrogram.
  static Corpus load(const data::Manifest &manifest);
};

// max(lr_init * lr_decay^epoch, lr_floor); the epoch count is global across
// both phases.
double lr_schedule(const TrainConfig &cfg, int epoch);

// Linear decay from asoftmax_lambda_start to asoftmax.lambda_cos over the
// first asoftmax_anneal_epochs epochs (global count), constant afterwards.
// With anneal_epochs == 0 the end value is used throughout.
double asoftmax_lambda_schedule(const TrainConfig &cfg, int epoch);

// One momentum-SGD update:
//   v <- momentum v + grad + weight_decay p;  p <- p - lr v
// An absent grad counts as zero; the grad is zeroed afterwards. Velocity is
// sized to the parameter on first use. Non-finite grads raise NumericError.
void sgd_step(autodiff::Tensor param, std::vector<double> &velocity, double lr,
              double momentum, double weight_decay);

struct StepLosses {
  double l_p = 0, l_adv_s = 0, l_adv_e = 0, l_r = 0, l_total = 0;
};

// Two-phase schedule: phase 1 fits {E_p, C_speaker} on the angular loss until
// a held-out accuracy threshold (or the epoch cap); phase 2 interleaves, per
// batch, an adversary step, an eliminating step, and a joint step, with each
// loss gated to its parameter groups. Checkpoints are cut at epoch
// boundaries, so a restored run replays the uninterrupted one bitwise.
class Trainer {
 public:
  Trainer(net::Model &model, const Corpus &corpus, const TrainConfig &cfg);

  // Phase 1, the twin hand-off, then phase 2. When ckpt_path is nonempty a
  // checkpoint is (re)written after every completed epoch.
  void run(std::ostream *log = nullptr, const std::string &ckpt_path = "");

  void train_phase1(std::ostream *log = nullptr,
                    const std::string &ckpt_path = "");
  void train_phase2(std::ostream *log = nullptr,
                    const std::string &ckpt_path = "");

  // Fraction of held-out utterances whose f_p angular logits pick the true
  // speaker. Negative when there is no holdout split.
  double holdout_speaker_accuracy();
  // Same for the adversary reading f_e.
  double holdout_adv_accuracy();

  int epochs_phase1_done() const { return epochs_phase1_; }
  int epochs_phase2_done() const { return epochs_phase2_; }
  std::int64_t phase2_steps_done() const { return steps_phase2_; }
  const std::vector<int> &train_indices() const { return train_; }
  const std::vector<int> &holdout_indices() const { return holdout_; }
  // Per-step phase-2 losses recorded since construction or restore.
  const std::vector<StepLosses> &step_history() const { return history_; }

  void save(const std::string &path) const;
  void restore(const std::string &path);  // DataError on missing/mismatched

 private:
  struct Batch {
    autodiff::Tensor x;
    std::vector<int> targets;
    std::vector<int> utts;
  };

  Batch draw_batch(const int *utts, int n);
  // The angular-loss lambda for the given global epoch, alongside the
  // configured margin.
  losses::ASoftmaxConfig asoftmax_at(int epoch) const;
  double phase1_step(const Batch &b, double lr, int epoch);
  StepLosses phase2_step(const Batch &b, double lr, int epoch);
  void apply_sgd(const autodiff::GroupSet &groups, double lr);
  std::vector<int> epoch_order();
  double accuracy_on(const std::vector<int> &utts, bool adversary);
  autodiff::Tensor pinned_fe(const Batch &b) const;
  std::string config_text() const;

  net::Model &model_;
  const Corpus &corpus_;
  TrainConfig cfg_;
  bool use_ee_ = true, do_adv_s_ = true, do_adv_e_ = true, do_recon_ = true;
  std::mt19937_64 rng_;
  std::vector<std::vector<double>> velocity_;  // aligned with named_params()
  std::vector<std::vector<double>> randvec_;   // per utterance, randvec branch
  std::vector<int> train_, holdout_;
  int epochs_phase1_ = 0, epochs_phase2_ = 0;
  std::int64_t steps_phase1_ = 0, steps_phase2_ = 0;
  std::vector<StepLosses> history_;
};

}  // namespace train
}  // namespace aldr

#endif  // ALDR_TRAINER_H_
