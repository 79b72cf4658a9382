// src/evaluator.cc

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

#include "aldr/evaluator.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <random>
#include <unordered_map>

#include "aldr/error.h"

namespace aldr {
namespace eval {

using autodiff::Graph;
using autodiff::Tensor;

namespace {

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// (FAR, FRR) at a threshold, from ascending-sorted score lists. Accept means
// score >= t, so FAR counts non-targets at or above t and FRR targets below.
struct OperatingPoint {
  double far = 0.0, frr = 0.0;
};

OperatingPoint point_at(const std::vector<double> &targets,
                        const std::vector<double> &nontargets, double t) {
  OperatingPoint p;
  const auto below_t =
      std::lower_bound(targets.begin(), targets.end(), t) - targets.begin();
  const auto below_n =
      std::lower_bound(nontargets.begin(), nontargets.end(), t) -
      nontargets.begin();
  p.frr = static_cast<double>(below_t) / targets.size();
  p.far = static_cast<double>(nontargets.size() - below_n) / nontargets.size();
  return p;
}

struct Sweep {
  std::vector<double> targets, nontargets;  // ascending
  std::vector<double> thresholds;           // distinct scores + sentinel
};

Sweep make_sweep(const std::vector<ScoredTrial> &scored) {
  Sweep s;
  std::vector<double> all;
  all.reserve(scored.size());
  for (const ScoredTrial &st : scored) {
    if (!std::isfinite(st.score))
      throw NumericError("non-finite trial score");
    (st.trial.same ? s.targets : s.nontargets).push_back(st.score);
    all.push_back(st.score);
  }
  if (s.targets.empty() || s.nontargets.empty())
    throw DataError("need at least one target and one non-target trial");
  std::sort(s.targets.begin(), s.targets.end());
  std::sort(s.nontargets.begin(), s.nontargets.end());
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());
  // A sentinel above every score closes the sweep with the reject-all point.
  all.push_back(all.back() + 1.0);
  s.thresholds = std::move(all);
  return s;
}

double cdet_at(const OperatingPoint &p, const CdetConfig &c) {
  return c.c_miss * p.frr * c.p_tar + c.c_fa * p.far * (1.0 - c.p_tar);
}

}  // namespace

std::vector<double> embed_utterance(const net::Model &model,
                                    const audio::Spectrogram &spec,
                                    FeatureSource src) {
  const int t_seg = model.config().frames;
  const int d = model.config().embedding_dim;
  const int n_segs = std::max(1, (spec.frames + t_seg - 1) / t_seg);
  std::vector<audio::Spectrogram> segs;
  segs.reserve(n_segs);
  for (int i = 0; i < n_segs; ++i)
    segs.push_back(audio::segment_at(spec, i * t_seg, t_seg));
  std::vector<const audio::Spectrogram *> ptrs(segs.size());
  for (size_t i = 0; i < segs.size(); ++i) ptrs[i] = &segs[i];
  Tensor x = model.make_input(ptrs);
  Graph g;
  Tensor f = src == FeatureSource::kPurifying ? model.encode_p(g, x)
                                              : model.encode_e(g, x);
  const std::vector<double> &v = f.data();
  std::vector<double> mean(d, 0.0);
  for (int i = 0; i < n_segs; ++i)
    for (int j = 0; j < d; ++j) mean[j] += v[static_cast<size_t>(i) * d + j];
  double norm2 = 0.0;
  for (int j = 0; j < d; ++j) {
    mean[j] /= n_segs;
    norm2 += mean[j] * mean[j];
  }
  const double norm = std::sqrt(norm2);
  if (!(norm > 0.0) || !std::isfinite(norm))
    throw NumericError("degenerate embedding: zero or non-finite norm");
  for (int j = 0; j < d; ++j) mean[j] /= norm;
  return mean;
}

double cosine_score(const std::vector<double> &a,
                    const std::vector<double> &b) {
  if (a.size() != b.size())
    throw ShapeError("cosine_score dimension mismatch: " +
                     std::to_string(a.size()) + " vs " +
                     std::to_string(b.size()));
  double dot = 0.0;
  for (size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
  return dot;
}

EerResult compute_eer(const std::vector<ScoredTrial> &scored) {
  const Sweep s = make_sweep(scored);
  // FAR - FRR is non-increasing in the threshold and positive at the lowest
  // score (everything accepted), so the first non-positive difference always
  // has a positive predecessor to interpolate against.
  OperatingPoint prev = point_at(s.targets, s.nontargets, s.thresholds[0]);
  double prev_t = s.thresholds[0];
  for (size_t i = 1; i < s.thresholds.size(); ++i) {
    const OperatingPoint cur =
        point_at(s.targets, s.nontargets, s.thresholds[i]);
    const double d1 = prev.far - prev.frr;
    const double d2 = cur.far - cur.frr;
    if (d2 <= 0.0) {
      const double span = d1 - d2;
      const double frac = span > 0.0 ? d1 / span : 0.0;
      EerResult r;
      r.eer = prev.frr + frac * (cur.frr - prev.frr);
      r.threshold = prev_t + frac * (s.thresholds[i] - prev_t);
      return r;
    }
    prev = cur;
    prev_t = s.thresholds[i];
  }
  throw NumericError("EER sweep found no crossing");  // unreachable
}

CdetResult compute_cdet(const std::vector<ScoredTrial> &scored,
                        const CdetConfig &cfg) {
  if (cfg.p_tar < 0.0 || cfg.p_tar > 1.0)
    throw ConfigError("p_tar must be in [0,1]");
  if (cfg.c_miss < 0.0 || cfg.c_fa < 0.0)
    throw ConfigError("detection costs must be >= 0");
  const Sweep s = make_sweep(scored);
  CdetResult r;
  r.det_points.reserve(s.thresholds.size());
  r.c_det_min = std::numeric_limits<double>::infinity();
  for (double t : s.thresholds) {
    const OperatingPoint p = point_at(s.targets, s.nontargets, t);
    r.det_points.push_back({t, p.far, p.frr});
    r.c_det_min = std::min(r.c_det_min, cdet_at(p, cfg));
  }
  const EerResult eer = compute_eer(scored);
  r.c_det_at_eer =
      cdet_at(point_at(s.targets, s.nontargets, eer.threshold), cfg);
  return r;
}

VerificationReport evaluate_verification(
    const net::Model &model, const train::Corpus &corpus,
    const std::vector<data::TrialPair> &trials, FeatureSource src,
    const CdetConfig &cdet) {
  std::unordered_map<std::string, int> index;
  index.reserve(corpus.ids.size());
  for (size_t i = 0; i < corpus.ids.size(); ++i)
    index.emplace(corpus.ids[i], static_cast<int>(i));
  std::vector<std::vector<double>> emb(corpus.specs.size());
  auto embed_of = [&](const std::string &id) -> const std::vector<double> & {
    auto it = index.find(id);
    if (it == index.end())
      throw DataError("trial id '" + id + "' not in the evaluated corpus");
    std::vector<double> &e = emb[it->second];
    if (e.empty()) e = embed_utterance(model, corpus.specs[it->second], src);
    return e;
  };
  VerificationReport rep;
  rep.scored.reserve(trials.size());
  for (const data::TrialPair &t : trials) {
    ScoredTrial st;
    st.trial = t;
    st.score = cosine_score(embed_of(t.a), embed_of(t.b));
    (t.same ? rep.n_target : rep.n_nontarget) += 1;
    rep.scored.push_back(st);
  }
  const EerResult eer = compute_eer(rep.scored);
  const CdetResult cd = compute_cdet(rep.scored, cdet);
  rep.eer = eer.eer;
  rep.eer_threshold = eer.threshold;
  rep.c_det_min = cd.c_det_min;
  rep.c_det_at_eer = cd.c_det_at_eer;
  rep.det_points = cd.det_points;
  return rep;
}

ProbeReport linear_probe(const std::vector<std::vector<double>> &features,
                         const std::vector<int> &labels,
                         const ProbeConfig &cfg) {
  if (features.size() != labels.size())
    throw ShapeError("features and labels disagree: " +
                     std::to_string(features.size()) + " vs " +
                     std::to_string(labels.size()));
  if (features.empty()) throw DataError("probe needs samples");
  const int dim = static_cast<int>(features[0].size());
  for (const auto &f : features)
    if (static_cast<int>(f.size()) != dim)
      throw ShapeError("probe features must share one dimension");
  if (cfg.iters < 1) throw ConfigError("probe iters must be >= 1");
  if (cfg.test_fraction <= 0.0 || cfg.test_fraction >= 1.0)
    throw ConfigError("probe test_fraction must be in (0,1)");

  // Remap labels to a dense 0-based range.
  std::map<int, int> remap;
  for (int l : labels) remap.emplace(l, 0);
  int next = 0;
  for (auto &kv : remap) kv.second = next++;
  const int n_classes = next;
  if (n_classes < 2) throw DataError("probe needs at least 2 classes");
  std::vector<std::vector<int>> by_class(n_classes);
  for (size_t i = 0; i < labels.size(); ++i)
    by_class[remap.at(labels[i])].push_back(static_cast<int>(i));
  for (int c = 0; c < n_classes; ++c)
    if (by_class[c].size() < 4)
      throw DataError("probe needs >= 4 samples per class, class " +
                      std::to_string(c) + " has " +
                      std::to_string(by_class[c].size()));

  // Stratified split: shuffle within each class, first part becomes test.
  std::mt19937_64 rng(cfg.seed);
  std::vector<int> train_idx, test_idx;
  for (int c = 0; c < n_classes; ++c) {
    std::vector<int> &idx = by_class[c];
    for (size_t i = idx.size(); i > 1; --i)
      std::swap(idx[i - 1], idx[rng() % i]);
    const size_t n_test =
        static_cast<size_t>(cfg.test_fraction * idx.size());
    if (n_test < 2)
      throw DataError("probe class " + std::to_string(c) +
                      " keeps fewer than 2 test samples");
    test_idx.insert(test_idx.end(), idx.begin(), idx.begin() + n_test);
    train_idx.insert(train_idx.end(), idx.begin() + n_test, idx.end());
  }

  // Multinomial logistic regression, zero-initialized, full-batch GD.
  std::vector<double> w(static_cast<size_t>(n_classes) * dim, 0.0);
  std::vector<double> b(n_classes, 0.0);
  std::vector<double> z(n_classes), gw(w.size()), gb(b.size());
  for (int it = 0; it < cfg.iters; ++it) {
    std::fill(gw.begin(), gw.end(), 0.0);
    std::fill(gb.begin(), gb.end(), 0.0);
    for (int i : train_idx) {
      const std::vector<double> &x = features[i];
      double zmax = -std::numeric_limits<double>::infinity();
      for (int c = 0; c < n_classes; ++c) {
        double s = b[c];
        for (int j = 0; j < dim; ++j)
          s += w[static_cast<size_t>(c) * dim + j] * x[j];
        z[c] = s;
        zmax = std::max(zmax, s);
      }
      double sum = 0.0;
      for (int c = 0; c < n_classes; ++c) {
        z[c] = std::exp(z[c] - zmax);
        sum += z[c];
      }
      const int y = remap.at(labels[i]);
      for (int c = 0; c < n_classes; ++c) {
        const double delta = z[c] / sum - (c == y ? 1.0 : 0.0);
        gb[c] += delta;
        for (int j = 0; j < dim; ++j)
          gw[static_cast<size_t>(c) * dim + j] += delta * x[j];
      }
    }
    const double scale = cfg.lr / train_idx.size();
    for (size_t k = 0; k < w.size(); ++k) w[k] -= scale * gw[k];
    for (int c = 0; c < n_classes; ++c) b[c] -= scale * gb[c];
  }

  int correct = 0;
  for (int i : test_idx) {
    const std::vector<double> &x = features[i];
    int best = 0;
    double best_z = -std::numeric_limits<double>::infinity();
    for (int c = 0; c < n_classes; ++c) {
      double s = b[c];
      for (int j = 0; j < dim; ++j)
        s += w[static_cast<size_t>(c) * dim + j] * x[j];
      if (s > best_z) {
        best_z = s;
        best = c;
      }
    }
    if (best == remap.at(labels[i])) ++correct;
  }
  ProbeReport rep;
  rep.accuracy = static_cast<double>(correct) / test_idx.size();
  rep.chance = 1.0 / n_classes;
  return rep;
}

void emit_report(const VerificationReport &report,
                 const std::vector<ProbeReport> &probes,
                 const std::string &out_dir) {
  auto open = [&](const char *name) {
    std::ofstream f(out_dir + "/" + name,
                    std::ios::binary | std::ios::trunc);
    if (!f) throw DataError(std::string("cannot write ") + out_dir + "/" +
                            name);
    return f;
  };
  {
    std::ofstream f = open("report.txt");
    char line[128];
    std::snprintf(line, sizeof line, "%-18s %10.2f\n", "EER (%)",
                  report.eer * 100.0);
    f << "verification\n" << line;
    std::snprintf(line, sizeof line, "%-18s %10.4f\n", "C_det (min)",
                  report.c_det_min);
    f << line;
    std::snprintf(line, sizeof line, "%-18s %10.4f\n", "C_det (at EER)",
                  report.c_det_at_eer);
    f << line;
    std::snprintf(line, sizeof line, "%-18s %10d\n", "target trials",
                  report.n_target);
    f << line;
    std::snprintf(line, sizeof line, "%-18s %10d\n", "nontarget trials",
                  report.n_nontarget);
    f << line;
    f << "eer_threshold " << fmt_double(report.eer_threshold) << "\n";
    if (!probes.empty()) {
      f << "probes\n";
      for (const ProbeReport &p : probes) {
        std::snprintf(line, sizeof line,
                      "%-10s %-4s accuracy %.4f chance %.4f\n",
                      p.target.c_str(), p.source.c_str(), p.accuracy,
                      p.chance);
        f << line;
      }
    }
    if (!f) throw DataError("failed writing report.txt");
  }
  {
    std::ofstream f = open("det.csv");
    f << "threshold,p_fa,p_miss\n";
    for (const DetPoint &p : report.det_points)
      f << fmt_double(p.threshold) << "," << fmt_double(p.p_fa) << ","
        << fmt_double(p.p_miss) << "\n";
    if (!f) throw DataError("failed writing det.csv");
  }
  {
    std::ofstream f = open("scores.txt");
    for (const ScoredTrial &st : report.scored)
      f << (st.trial.same ? 1 : 0) << " " << fmt_double(st.score) << "\n";
    if (!f) throw DataError("failed writing scores.txt");
  }
}

}  // namespace eval
}  // namespace aldr
