// trainer.cc

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

#include "aldr/trainer.h"

#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <sstream>

#include "aldr/checkpoint.h"
#include "aldr/error.h"

namespace aldr {
namespace train {

using autodiff::Graph;
using autodiff::Group;
using autodiff::GroupSet;
using autodiff::Tensor;

namespace {

const std::vector<std::pair<Ablation, std::string>> kAblationNames = {
    {Ablation::kFull, "full"},
    {Ablation::kEpOnly, "ep_only"},
    {Ablation::kEpDr, "ep_dr"},
    {Ablation::kEpRandvecDr, "ep_randvec_dr"},
    {Ablation::kEeOnly, "ee_only"},
    {Ablation::kEeNoAdvS, "ee_no_adv_s"},
    {Ablation::kEeNoAdvE, "ee_no_adv_e"},
};

// Uniform in [0,1) from the top 53 bits, pinned to one construction so runs
// replay bitwise on any conforming platform.
double runif(std::mt19937_64 &rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double rnormal(std::mt19937_64 &rng) {
  double u1 = runif(rng);
  double u2 = runif(rng);
  if (u1 <= 0.0) u1 = 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

void shuffle_indices(std::vector<int> &v, std::mt19937_64 &rng) {
  for (size_t i = v.size(); i > 1; --i) {
    size_t j = static_cast<size_t>(rng() % i);
    std::swap(v[i - 1], v[j]);
  }
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

int argmax_row(const double *row, int n) {
  int best = 0;
  for (int i = 1; i < n; ++i)
    if (row[i] > row[best]) best = i;
  return best;
}

}  // namespace

Ablation ablation_from_name(const std::string &name) {
  for (const auto &kv : kAblationNames)
    if (kv.second == name) return kv.first;
  std::string valid;
  for (const auto &kv : kAblationNames) {
    if (!valid.empty()) valid += ", ";
    valid += kv.second;
  }
  throw ConfigError("unknown ablation '" + name + "' (valid: " + valid + ")");
}

const std::string &ablation_name(Ablation a) {
  for (const auto &kv : kAblationNames)
    if (kv.first == a) return kv.second;
  throw ConfigError("unknown ablation value");
}

bool eval_uses_eliminating(Ablation a) {
  return a == Ablation::kEeOnly || a == Ablation::kEeNoAdvS ||
         a == Ablation::kEeNoAdvE;
}

void TrainConfig::validate() const {
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (momentum < 0.0 || momentum >= 1.0)
    throw ConfigError("momentum must be in [0,1)");
  if (weight_decay < 0.0) throw ConfigError("weight_decay must be >= 0");
  if (lr_init < 0.0) throw ConfigError("lr_init must be >= 0");
  if (lr_floor < 0.0) throw ConfigError("lr_floor must be >= 0");
  if (lr_decay <= 0.0 || lr_decay >= 1.0)
    throw ConfigError("lr_decay must be in (0,1)");
  if (phase1_epochs < 0) throw ConfigError("phase1_epochs must be >= 0");
  if (phase1_accuracy_threshold <= 0.0 || phase1_accuracy_threshold > 1.0)
    throw ConfigError("phase1_accuracy_threshold must be in (0,1]");
  if (phase2_epochs < 0) throw ConfigError("phase2_epochs must be >= 0");
  if (weights.lambda_p < 0.0 || weights.lambda_adv < 0.0 ||
      weights.lambda_r < 0.0)
    throw ConfigError("loss weights must be >= 0");
  if (asoftmax.m < 1) throw ConfigError("margin must be >= 1");
  if (asoftmax.lambda_cos < 0.0)
    throw ConfigError("asoftmax_lambda must be >= 0");
  if (asoftmax_lambda_start < asoftmax.lambda_cos)
    throw ConfigError("asoftmax_lambda_start must be >= asoftmax_lambda");
  if (asoftmax_anneal_epochs < 0)
    throw ConfigError("asoftmax_anneal_epochs must be >= 0");
  if (k_adv < 1) throw ConfigError("k_adv must be >= 1");
  if (holdout_fraction < 0.0 || holdout_fraction >= 1.0)
    throw ConfigError("holdout_fraction must be in [0,1)");
  if (max_phase2_steps < 0) throw ConfigError("max_phase2_steps must be >= 0");
}

Corpus Corpus::load(const data::Manifest &manifest) {
  Corpus c;
  c.n_speakers = manifest.n_speakers();
  c.specs.reserve(manifest.entries.size());
  for (const data::Utterance &u : manifest.entries) {
    audio::Waveform w = data::read_wav(manifest.resolve(u));
    c.specs.push_back(audio::normalize(audio::spectrogram(w)));
    c.speaker_labels.push_back(u.speaker_id);
    c.ids.push_back(u.id);
  }
  return c;
}

double lr_schedule(const TrainConfig &cfg, int epoch) {
  return std::max(cfg.lr_init * std::pow(cfg.lr_decay, epoch), cfg.lr_floor);
}

double asoftmax_lambda_schedule(const TrainConfig &cfg, int epoch) {
  const double lo = cfg.asoftmax.lambda_cos;
  if (cfg.asoftmax_anneal_epochs == 0 || epoch >= cfg.asoftmax_anneal_epochs)
    return lo;
  const double t = double(epoch) / double(cfg.asoftmax_anneal_epochs);
  return cfg.asoftmax_lambda_start +
         (lo - cfg.asoftmax_lambda_start) * t;
}

void sgd_step(Tensor param, std::vector<double> &velocity, double lr,
              double momentum, double weight_decay) {
  const int n = param.size();
  if (velocity.empty()) velocity.assign(n, 0.0);
  std::vector<double> &p = param.data();
  const std::vector<double> *grad = param.grad_if_any();
  for (int i = 0; i < n; ++i) {
    double gi = grad ? (*grad)[i] : 0.0;
    if (!std::isfinite(gi))
      throw NumericError("non-finite gradient during sgd step");
    velocity[i] = momentum * velocity[i] + gi + weight_decay * p[i];
    p[i] -= lr * velocity[i];
  }
  param.zero_grad();
}

Trainer::Trainer(net::Model &model, const Corpus &corpus,
                 const TrainConfig &cfg)
    : model_(model), corpus_(corpus), cfg_(cfg) {
  cfg_.validate();
  if (corpus_.size() == 0) throw DataError("empty training corpus");
  if (model_.config().n_speakers != corpus_.n_speakers)
    throw ConfigError("model expects " +
                      std::to_string(model_.config().n_speakers) +
                      " speakers but the corpus has " +
                      std::to_string(corpus_.n_speakers));
  rng_.seed(cfg_.seed);
  velocity_.resize(model_.named_params().size());

  use_ee_ =
      cfg_.ablation == Ablation::kFull || eval_uses_eliminating(cfg_.ablation);
  do_adv_s_ = use_ee_ && cfg_.ablation != Ablation::kEeNoAdvS;
  do_adv_e_ = use_ee_ && cfg_.ablation != Ablation::kEeNoAdvE;
  do_recon_ = cfg_.ablation != Ablation::kEpOnly;

  // Stratified holdout: the last floor(fraction * count) utterances of each
  // speaker in corpus order, so the split is deterministic.
  std::map<int, std::vector<int>> by_speaker;
  for (int i = 0; i < corpus_.size(); ++i)
    by_speaker[corpus_.speaker_labels[i]].push_back(i);
  for (const auto &kv : by_speaker) {
    const std::vector<int> &utts = kv.second;
    size_t held = static_cast<size_t>(cfg_.holdout_fraction *
                                      static_cast<double>(utts.size()));
    for (size_t i = 0; i < utts.size(); ++i)
      (i + held >= utts.size() ? holdout_ : train_).push_back(utts[i]);
  }
  if (train_.empty()) throw ConfigError("holdout_fraction leaves no training data");

  if (cfg_.ablation == Ablation::kEpRandvecDr) {
    // One frozen substitute vector per utterance, from a stream independent
    // of the training rng.
    std::mt19937_64 vec_rng(cfg_.seed ^ 0x9e3779b97f4a7c15ull);
    int d = model_.config().embedding_dim;
    randvec_.resize(corpus_.size());
    for (auto &v : randvec_) {
      v.resize(d);
      for (double &x : v) x = rnormal(vec_rng);
    }
  }
}

std::vector<int> Trainer::epoch_order() {
  std::vector<int> order = train_;
  shuffle_indices(order, rng_);
  return order;
}

Trainer::Batch Trainer::draw_batch(const int *utts, int n) {
  const int t_seg = model_.config().frames;
  std::vector<audio::Spectrogram> segs;
  segs.reserve(n);
  Batch b;
  b.targets.resize(n);
  b.utts.assign(utts, utts + n);
  for (int i = 0; i < n; ++i) {
    segs.push_back(audio::sample_segment(corpus_.specs[utts[i]], t_seg, rng_));
    b.targets[i] = corpus_.speaker_labels[utts[i]];
  }
  std::vector<const audio::Spectrogram *> ptrs(segs.size());
  for (size_t i = 0; i < segs.size(); ++i) ptrs[i] = &segs[i];
  b.x = model_.make_input(ptrs);
  return b;
}

void Trainer::apply_sgd(const GroupSet &groups, double lr) {
  const auto &named = model_.named_params();
  for (size_t i = 0; i < named.size(); ++i) {
    if (!groups.contains(named[i].second.group())) continue;
    try {
      sgd_step(named[i].second, velocity_[i], lr, cfg_.momentum,
               cfg_.weight_decay);
    } catch (const NumericError &) {
      throw NumericError("non-finite gradient in " + named[i].first);
    }
  }
}

losses::ASoftmaxConfig Trainer::asoftmax_at(int epoch) const {
  losses::ASoftmaxConfig c = cfg_.asoftmax;
  c.lambda_cos = asoftmax_lambda_schedule(cfg_, epoch);
  return c;
}

double Trainer::phase1_step(const Batch &b, double lr, int epoch) {
  Graph g;
  Tensor f_p = model_.encode_p(g, b.x);
  Tensor l_p = losses::a_softmax_loss(g, f_p, model_.speaker_weights(),
                                      b.targets, asoftmax_at(epoch));
  g.backward(g.scale(l_p, cfg_.weights.lambda_p), losses::route_p());
  apply_sgd(losses::route_p(), lr);
  double v = l_p.value();
  if (!std::isfinite(v)) throw NumericError("non-finite L_p");
  return v;
}

Tensor Trainer::pinned_fe(const Batch &b) const {
  const int n = static_cast<int>(b.utts.size());
  const int d = model_.config().embedding_dim;
  if (cfg_.ablation == Ablation::kEpDr) return Tensor::zeros({n, d});
  std::vector<double> flat;
  flat.reserve(static_cast<size_t>(n) * d);
  for (int u : b.utts)
    flat.insert(flat.end(), randvec_[u].begin(), randvec_[u].end());
  return Tensor::from_values({n, d}, std::move(flat));
}

StepLosses Trainer::phase2_step(const Batch &b, double lr, int epoch) {
  const losses::LossWeights &w = cfg_.weights;
  const bool adv_s = do_adv_s_ && w.lambda_adv > 0.0;
  const bool adv_e = do_adv_e_ && w.lambda_adv > 0.0;
  const bool recon = do_recon_ && w.lambda_r > 0.0;
  StepLosses sl;

  // Adversary first: C_adv learns against the current, frozen f_e.
  if (adv_s) {
    for (int k = 0; k < cfg_.k_adv; ++k) {
      Graph g;
      Tensor f_e = model_.encode_e(g, b.x);
      Tensor z = model_.classify_adv(g, g.detach(f_e));
      Tensor l = losses::adv_classifier_loss(g, z, b.targets);
      g.backward(g.scale(l, w.lambda_adv), losses::route_adv_s());
      apply_sgd(losses::route_adv_s(), lr);
      sl.l_adv_s = l.value();
    }
  }

  // Eliminating objective: only E_e moves, through the updated adversary.
  if (adv_e) {
    Graph g;
    Tensor f_e = model_.encode_e(g, b.x);
    Tensor z = model_.classify_adv(g, f_e);
    Tensor l = losses::adv_eliminate_loss(g, z);
    g.backward(g.scale(l, w.lambda_adv), losses::route_adv_e());
    apply_sgd(losses::route_adv_e(), lr);
    sl.l_adv_e = l.value();
  }

  // Joint step on the speaker and reconstruction terms.
  {
    Graph g;
    Tensor f_p = model_.encode_p(g, b.x);
    Tensor l_p = losses::a_softmax_loss(g, f_p, model_.speaker_weights(),
                                        b.targets, asoftmax_at(epoch));
    Tensor total = g.scale(l_p, w.lambda_p);
    GroupSet groups = losses::route_p();
    if (recon) {
      Tensor f_e = use_ee_ ? model_.encode_e(g, b.x) : pinned_fe(b);
      Tensor s_hat = model_.decode(g, model_.fuse(g, f_p, f_e));
      Tensor l_r = losses::reconstruction_loss(g, s_hat, b.x);
      total = g.add(total, g.scale(l_r, w.lambda_r));
      groups = groups.united(GroupSet{Group::kDecoder});
      if (use_ee_) groups = groups.united(GroupSet{Group::kEncoderE});
      sl.l_r = l_r.value();
    }
    g.backward(total, groups);
    apply_sgd(groups, lr);
    sl.l_p = l_p.value();
  }

  sl.l_total = w.lambda_p * sl.l_p + w.lambda_adv * (sl.l_adv_s + sl.l_adv_e) +
               w.lambda_r * sl.l_r;
  if (!std::isfinite(sl.l_total)) throw NumericError("non-finite total loss");
  return sl;
}

double Trainer::accuracy_on(const std::vector<int> &utts, bool adversary) {
  if (utts.empty()) return -1.0;
  const int t_seg = model_.config().frames;
  const int ns = corpus_.n_speakers;
  const int chunk = 32;
  int correct = 0;
  for (size_t at = 0; at < utts.size(); at += chunk) {
    size_t n = std::min<size_t>(chunk, utts.size() - at);
    std::vector<audio::Spectrogram> segs;
    segs.reserve(n);
    for (size_t i = 0; i < n; ++i)
      segs.push_back(audio::segment_at(corpus_.specs[utts[at + i]], 0, t_seg));
    std::vector<const audio::Spectrogram *> ptrs(n);
    for (size_t i = 0; i < n; ++i) ptrs[i] = &segs[i];
    Tensor x = model_.make_input(ptrs);
    Graph g;
    std::vector<double> logits;
    if (adversary) {
      logits = model_.classify_adv(g, model_.encode_e(g, x)).data();
    } else {
      logits = model_.speaker_logits_values(model_.encode_p(g, x));
    }
    for (size_t i = 0; i < n; ++i) {
      int label = corpus_.speaker_labels[utts[at + i]];
      if (argmax_row(&logits[i * ns], ns) == label) ++correct;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(utts.size());
}

double Trainer::holdout_speaker_accuracy() {
  return accuracy_on(holdout_, false);
}

double Trainer::holdout_adv_accuracy() { return accuracy_on(holdout_, true); }

void Trainer::train_phase1(std::ostream *log, const std::string &ckpt_path) {
  if (epochs_phase2_ > 0 || steps_phase2_ > 0) return;  // phase 1 is sealed
  const int nb = static_cast<int>(train_.size()) / cfg_.batch_size;
  if (nb == 0 && cfg_.phase1_epochs > 0)
    throw ConfigError("batch_size " + std::to_string(cfg_.batch_size) +
                      " exceeds the " + std::to_string(train_.size()) +
                      " training utterances");
  while (epochs_phase1_ < cfg_.phase1_epochs) {
    double acc = holdout_speaker_accuracy();
    if (log)
      *log << "# phase1 epoch " << epochs_phase1_ << " holdout_acc "
           << fmt_double(acc) << "\n";
    if (acc >= cfg_.phase1_accuracy_threshold) break;
    double lr = lr_schedule(cfg_, epochs_phase1_);
    std::vector<int> order = epoch_order();
    double sum = 0.0;
    for (int s = 0; s < nb; ++s) {
      Batch b = draw_batch(&order[static_cast<size_t>(s) * cfg_.batch_size],
                           cfg_.batch_size);
      double l_p = phase1_step(b, lr, epochs_phase1_);
      sum += l_p;
      ++steps_phase1_;
      if (log)
        *log << epochs_phase1_ << " " << s << " " << fmt_double(l_p)
             << " 0 0 0 " << fmt_double(cfg_.weights.lambda_p * l_p) << " "
             << fmt_double(lr) << "\n";
    }
    ++epochs_phase1_;
    if (log)
      *log << "# phase1 epoch " << epochs_phase1_ << " mean_L_p "
           << fmt_double(sum / nb) << "\n";
    if (!ckpt_path.empty()) save(ckpt_path);
  }
}

void Trainer::train_phase2(std::ostream *log, const std::string &ckpt_path) {
  const int nb = static_cast<int>(train_.size()) / cfg_.batch_size;
  if (nb == 0 && cfg_.phase2_epochs > 0)
    throw ConfigError("batch_size " + std::to_string(cfg_.batch_size) +
                      " exceeds the " + std::to_string(train_.size()) +
                      " training utterances");
  while (epochs_phase2_ < cfg_.phase2_epochs) {
    if (cfg_.max_phase2_steps > 0 && steps_phase2_ >= cfg_.max_phase2_steps)
      return;
    int epoch = epochs_phase1_ + epochs_phase2_;
    double lr = lr_schedule(cfg_, epoch);
    std::vector<int> order = epoch_order();
    for (int s = 0; s < nb; ++s) {
      if (cfg_.max_phase2_steps > 0 && steps_phase2_ >= cfg_.max_phase2_steps)
        return;
      Batch b = draw_batch(&order[static_cast<size_t>(s) * cfg_.batch_size],
                           cfg_.batch_size);
      StepLosses sl = phase2_step(b, lr, epoch);
      history_.push_back(sl);
      ++steps_phase2_;
      if (log)
        *log << epoch << " " << s << " " << fmt_double(sl.l_p) << " "
             << fmt_double(sl.l_adv_s) << " " << fmt_double(sl.l_adv_e) << " "
             << fmt_double(sl.l_r) << " " << fmt_double(sl.l_total) << " "
             << fmt_double(lr) << "\n";
    }
    ++epochs_phase2_;
    if (!ckpt_path.empty()) save(ckpt_path);
  }
}

void Trainer::run(std::ostream *log, const std::string &ckpt_path) {
  train_phase1(log, ckpt_path);
  if (use_ee_ && epochs_phase2_ == 0 && steps_phase2_ == 0)
    model_.init_eliminating_from_purifying();
  train_phase2(log, ckpt_path);
  if (!ckpt_path.empty()) save(ckpt_path);
}

std::string Trainer::config_text() const {
  const net::ModelConfig &m = model_.config();
  std::ostringstream os;
  os << "model.kind=" << m.kind << "\n"
     << "model.frames=" << m.frames << "\n"
     << "model.bins=" << m.bins << "\n"
     << "model.embedding_dim=" << m.embedding_dim << "\n"
     << "model.n_speakers=" << m.n_speakers << "\n"
     << "model.conv_c1=" << m.conv_c1 << "\n"
     << "model.conv_c2=" << m.conv_c2 << "\n"
     << "model.mlp_hidden=" << m.mlp_hidden << "\n"
     << "model.adv_hidden=" << m.adv_hidden << "\n"
     << "model.dec_hidden=" << m.dec_hidden << "\n"
     << "train.batch_size=" << cfg_.batch_size << "\n"
     << "train.momentum=" << fmt_double(cfg_.momentum) << "\n"
     << "train.weight_decay=" << fmt_double(cfg_.weight_decay) << "\n"
     << "train.lr_init=" << fmt_double(cfg_.lr_init) << "\n"
     << "train.lr_floor=" << fmt_double(cfg_.lr_floor) << "\n"
     << "train.lr_decay=" << fmt_double(cfg_.lr_decay) << "\n"
     << "train.phase1_epochs=" << cfg_.phase1_epochs << "\n"
     << "train.phase1_accuracy_threshold="
     << fmt_double(cfg_.phase1_accuracy_threshold) << "\n"
     << "train.phase2_epochs=" << cfg_.phase2_epochs << "\n"
     << "train.lambda_p=" << fmt_double(cfg_.weights.lambda_p) << "\n"
     << "train.lambda_adv=" << fmt_double(cfg_.weights.lambda_adv) << "\n"
     << "train.lambda_r=" << fmt_double(cfg_.weights.lambda_r) << "\n"
     << "train.margin=" << cfg_.asoftmax.m << "\n"
     << "train.asoftmax_lambda=" << fmt_double(cfg_.asoftmax.lambda_cos)
     << "\n"
     << "train.asoftmax_lambda_start="
     << fmt_double(cfg_.asoftmax_lambda_start) << "\n"
     << "train.asoftmax_anneal_epochs=" << cfg_.asoftmax_anneal_epochs << "\n"
     << "train.k_adv=" << cfg_.k_adv << "\n"
     << "train.seed=" << cfg_.seed << "\n"
     << "train.ablation=" << ablation_name(cfg_.ablation) << "\n"
     << "train.holdout_fraction=" << fmt_double(cfg_.holdout_fraction) << "\n"
     << "train.max_phase2_steps=" << cfg_.max_phase2_steps << "\n";
  return os.str();
}

void Trainer::save(const std::string &path) const {
  ckpt::Checkpoint c;
  c.config_text = config_text();
  c.epochs_phase1 = epochs_phase1_;
  c.epochs_phase2 = epochs_phase2_;
  c.steps_phase1 = steps_phase1_;
  c.steps_phase2 = steps_phase2_;
  std::ostringstream os;
  os << rng_;
  c.rng_state = os.str();
  const auto &named = model_.named_params();
  c.tensors.reserve(named.size() * 2);
  for (const auto &kv : named)
    c.tensors.push_back({kv.first, kv.second.shape(), kv.second.data()});
  for (size_t i = 0; i < named.size(); ++i) {
    std::vector<double> v = velocity_[i];
    if (v.empty()) v.assign(named[i].second.size(), 0.0);
    c.tensors.push_back(
        {"momentum." + named[i].first, named[i].second.shape(), std::move(v)});
  }
  ckpt::write_checkpoint(c, path);
}

void Trainer::restore(const std::string &path) {
  ckpt::Checkpoint c = ckpt::read_checkpoint(path);
  const auto &named = model_.named_params();
  for (size_t i = 0; i < named.size(); ++i) {
    const std::string &name = named[i].first;
    const ckpt::TensorRecord *rec = c.find(name);
    if (!rec) throw DataError("checkpoint lacks tensor " + name);
    if (rec->shape != named[i].second.shape())
      throw DataError("shape mismatch for " + name + ": checkpoint has " +
                      autodiff::shape_str(rec->shape) + ", model expects " +
                      autodiff::shape_str(named[i].second.shape()));
    Tensor t = named[i].second;
    t.data() = rec->values;
    t.zero_grad();
    const ckpt::TensorRecord *mom = c.find("momentum." + name);
    if (!mom) throw DataError("checkpoint lacks tensor momentum." + name);
    if (mom->values.size() != rec->values.size())
      throw DataError("momentum size mismatch for " + name);
    velocity_[i] = mom->values;
  }
  epochs_phase1_ = c.epochs_phase1;
  epochs_phase2_ = c.epochs_phase2;
  steps_phase1_ = c.steps_phase1;
  steps_phase2_ = c.steps_phase2;
  std::istringstream is(c.rng_state);
  is >> rng_;
  if (!is) throw DataError("corrupt rng state in checkpoint");
  history_.clear();
}

}  // namespace train
}  // namespace aldr
