// aldr/evaluator.h

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

// Verification scoring and diagnostics: cosine-scored trials, EER, detection
// cost, DET-curve points, linear probes, and report emission.

#ifndef ALDR_EVALUATOR_H_
#define ALDR_EVALUATOR_H_

#include <cstdint>
#include <string>
#include <vector>

#include "aldr/dataset.h"
#include "aldr/networks.h"
#include "aldr/trainer.h"

namespace aldr {
namespace eval {

// Which embedding head scores the trials.
enum class FeatureSource { kPurifying, kEliminating };

struct ScoredTrial {
  data::TrialPair trial;
  double score = 0.0;  // cosine similarity in [-1, 1]
};

// One operating point of the detection-error tradeoff curve.
struct DetPoint {
  double threshold = 0.0;
  double p_fa = 0.0;    // non-targets accepted (score >= threshold)
  double p_miss = 0.0;  // targets rejected (score < threshold)
};

struct EerResult {
  double eer = 0.0;
  double threshold = 0.0;
};

struct CdetConfig {
  double p_tar = 0.01;
  double c_miss = 1.0;
  double c_fa = 1.0;
};

struct CdetResult {
  double c_det_min = 0.0;
  double c_det_at_eer = 0.0;
  std::vector<DetPoint> det_points;
};

struct VerificationReport {
  double eer = 0.0;
  double eer_threshold = 0.0;
  double c_det_min = 0.0;
  double c_det_at_eer = 0.0;
  std::vector<DetPoint> det_points;
  int n_target = 0;
  int n_nontarget = 0;
  std::vector<ScoredTrial> scored;  // in trial-list order
};

struct ProbeReport {
  std::string target;  // "speaker" or "nuisance"
  std::string source;  // "f_p" or "f_e"
  double accuracy = 0.0;
  double chance = 0.0;
};

struct ProbeConfig {
  int iters = 500;
  double lr = 0.1;
  double test_fraction = 0.5;
  std::uint64_t seed = 0;
};

// Mean embedding over deterministic segments covering the whole utterance
// (hop = segment length, the tail wraps cyclically), L2-normalized.
// A zero vector before normalization raises NumericError.
std::vector<double> embed_utterance(const net::Model &model,
                                    const audio::Spectrogram &spec,
                                    FeatureSource src);

// Dot product; both inputs must already be unit vectors.
double cosine_score(const std::vector<double> &a, const std::vector<double> &b);

// Sweeps thresholds at every distinct score. FRR(t) is the fraction of
// targets with score < t, FAR(t) the fraction of non-targets with score
// >= t; the crossing is linearly interpolated between the bracketing
// operating points. Needs at least one trial of each label (DataError).
EerResult compute_eer(const std::vector<ScoredTrial> &scored);

// C_det(t) = c_miss P_miss(t) p_tar + c_fa P_fa(t) (1 - p_tar), minimized
// over the same threshold sweep and also evaluated at the EER threshold.
// det_points cover every distinct score plus a reject-all sentinel.
CdetResult compute_cdet(const std::vector<ScoredTrial> &scored,
                        const CdetConfig &cfg = CdetConfig());

// Embeds every corpus utterance once and scores the trial list. Trial ids
// that do not resolve in the corpus raise DataError naming the first
// offender.
VerificationReport evaluate_verification(const net::Model &model,
                                         const train::Corpus &corpus,
                                         const std::vector<data::TrialPair> &trials,
                                         FeatureSource src,
                                         const CdetConfig &cdet = CdetConfig());

// Multinomial logistic regression, zero-initialized, trained by full-batch
// gradient descent on a stratified split; reports held-out accuracy. Needs
// >= 2 classes and >= 4 samples per class, and every class must keep >= 2
// test samples (DataError otherwise).
ProbeReport linear_probe(const std::vector<std::vector<double>> &features,
                         const std::vector<int> &labels,
                         const ProbeConfig &cfg = ProbeConfig());

// Writes report.txt, det.csv (threshold,p_fa,p_miss) and scores.txt
// (label score per line) under out_dir, which must already exist.
void emit_report(const VerificationReport &report,
                 const std::vector<ProbeReport> &probes,
                 const std::string &out_dir);

}  // namespace eval
}  // namespace aldr

#endif  // ALDR_EVALUATOR_H_
