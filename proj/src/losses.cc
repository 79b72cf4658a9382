// aldr/losses.cc

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

#include "aldr/losses.h"

#include <algorithm>
#include <cmath>
#include <string>

namespace aldr {
namespace losses {

using autodiff::GradStore;
using autodiff::Graph;
using autodiff::Group;
using autodiff::GroupSet;
using autodiff::Tensor;
using autodiff::shape_str;

namespace {

constexpr double kPi = 3.14159265358979323846;

// T_m(c) = cos(m acos c) by the Chebyshev recurrence.
double chebyshev_t(int m, double c) {
  if (m == 0) return 1.0;
  double prev = 1.0, cur = c;
  for (int n = 1; n < m; ++n) {
    const double next = 2.0 * c * cur - prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

// U_{m}(c) = sin((m+1) acos c) / sin(acos c) by the Chebyshev recurrence.
double chebyshev_u(int m, double c) {
  if (m == 0) return 1.0;
  double prev = 1.0, cur = 2.0 * c;
  for (int n = 1; n < m; ++n) {
    const double next = 2.0 * c * cur - prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

int phi_piece(double cos_theta, int m) {
  const double theta = std::acos(std::clamp(cos_theta, -1.0, 1.0));
  const int k = static_cast<int>(std::floor(theta * m / kPi));
  return std::clamp(k, 0, m - 1);
}

void check_targets(const std::vector<int> &targets, int batch, int classes) {
  if (static_cast<int>(targets.size()) != batch)
    throw DataError("got " + std::to_string(targets.size()) +
                    " targets for a batch of " + std::to_string(batch));
  for (int t : targets)
    if (t < 0 || t >= classes)
      throw DataError("target " + std::to_string(t) + " outside [0, " +
                      std::to_string(classes) + ")");
}

// Row-wise softmax probabilities with max subtraction.
std::vector<double> softmax_rows(const std::vector<double> &logits, int batch,
                                 int classes) {
  std::vector<double> p(logits.size());
  for (int r = 0; r < batch; ++r) {
    const double *row = logits.data() + r * classes;
    double mx = row[0];
    for (int c = 1; c < classes; ++c) mx = std::max(mx, row[c]);
    double z = 0.0;
    double *prow = p.data() + r * classes;
    for (int c = 0; c < classes; ++c) {
      prow[c] = std::exp(row[c] - mx);
      z += prow[c];
    }
    for (int c = 0; c < classes; ++c) prow[c] /= z;
  }
  return p;
}

}  // namespace

double angular_phi(double cos_theta, int m) {
  if (m < 1) throw ConfigError("margin m must be >= 1, got " + std::to_string(m));
  const double c = std::clamp(cos_theta, -1.0, 1.0);
  const int k = phi_piece(c, m);
  const double tm = chebyshev_t(m, c);
  return ((k & 1) ? -tm : tm) - 2.0 * k;
}

double angular_phi_dcos(double cos_theta, int m) {
  if (m < 1) throw ConfigError("margin m must be >= 1, got " + std::to_string(m));
  const double c = std::clamp(cos_theta, -1.0, 1.0);
  const int k = phi_piece(c, m);
  const double u = m * chebyshev_u(m - 1, c);
  return (k & 1) ? -u : u;
}

Tensor softmax_ce(Graph &g, const Tensor &logits,
                  const std::vector<int> &targets) {
  if (logits.rank() != 2)
    throw ShapeError("softmax_ce expects [batch x classes] logits, got " +
                     shape_str(logits.shape()));
  const int batch = logits.dim(0), classes = logits.dim(1);
  check_targets(targets, batch, classes);
  std::vector<double> p = softmax_rows(logits.data(), batch, classes);
  double loss = 0.0;
  for (int r = 0; r < batch; ++r)
    loss -= std::log(p[r * classes + targets[r]]);
  loss /= batch;
  Tensor out = Tensor::from_values({1}, {loss}, logits.requires_grad());
  return g.record(out, [logits, out, targets, p = std::move(p), batch,
                        classes](GradStore &gs) {
    if (!gs.wants(logits)) return;
    const double go = (*gs.find(out))[0];
    auto &gl = gs.of(logits);
    for (int r = 0; r < batch; ++r)
      for (int c = 0; c < classes; ++c) {
        double d = p[r * classes + c] - (c == targets[r] ? 1.0 : 0.0);
        gl[r * classes + c] += go * d / batch;
      }
  });
}

Tensor adv_classifier_loss(Graph &g, const Tensor &logits,
                           const std::vector<int> &targets) {
  return softmax_ce(g, logits, targets);
}

Tensor adv_eliminate_loss(Graph &g, const Tensor &logits) {
  if (logits.rank() != 2)
    throw ShapeError("adv_eliminate_loss expects [batch x classes], got " +
                     shape_str(logits.shape()));
  const int batch = logits.dim(0), classes = logits.dim(1);
  if (classes < 2) throw ConfigError("need at least 2 classes");
  std::vector<double> p = softmax_rows(logits.data(), batch, classes);
  double loss = 0.0;
  for (int r = 0; r < batch; ++r)
    for (int c = 0; c < classes; ++c)
      loss -= std::log(p[r * classes + c]) / classes;
  loss /= batch;
  Tensor out = Tensor::from_values({1}, {loss}, logits.requires_grad());
  return g.record(out, [logits, out, p = std::move(p), batch,
                        classes](GradStore &gs) {
    if (!gs.wants(logits)) return;
    const double go = (*gs.find(out))[0];
    const double u = 1.0 / classes;
    auto &gl = gs.of(logits);
    for (int r = 0; r < batch; ++r)
      for (int c = 0; c < classes; ++c)
        gl[r * classes + c] += go * (p[r * classes + c] - u) / batch;
  });
}

Tensor a_softmax_loss(Graph &g, const Tensor &features, const Tensor &weights,
                      const std::vector<int> &targets,
                      const ASoftmaxConfig &cfg) {
  if (cfg.m < 1)
    throw ConfigError("margin m must be >= 1, got " + std::to_string(cfg.m));
  if (cfg.lambda_cos < 0.0)
    throw ConfigError("lambda_cos must be nonnegative");
  if (features.rank() != 2 || weights.rank() != 2 ||
      features.dim(1) != weights.dim(0))
    throw ShapeError("a_softmax shape mismatch: features " +
                     shape_str(features.shape()) + ", weights " +
                     shape_str(weights.shape()));
  const int batch = features.dim(0), dim = features.dim(1),
            classes = weights.dim(1);
  check_targets(targets, batch, classes);
  const int m = cfg.m;
  const double lam = cfg.lambda_cos;

  // Unit-normalize weight columns.
  std::vector<double> wnorm(classes);
  std::vector<double> what(weights.data().size());
  for (int c = 0; c < classes; ++c) {
    double s = 0.0;
    for (int d = 0; d < dim; ++d) {
      const double v = weights.data()[d * classes + c];
      s += v * v;
    }
    wnorm[c] = std::sqrt(s);
    if (wnorm[c] < 1e-12)
      throw NumericError("classifier weight column " + std::to_string(c) +
                         " has zero norm");
    for (int d = 0; d < dim; ++d)
      what[d * classes + c] = weights.data()[d * classes + c] / wnorm[c];
  }

  // Per-row modified logits.
  std::vector<double> logits(static_cast<size_t>(batch) * classes);
  std::vector<double> fnorm(batch), cos_t(batch);
  for (int r = 0; r < batch; ++r) {
    const double *f = features.data().data() + r * dim;
    double nf = 0.0;
    for (int d = 0; d < dim; ++d) nf += f[d] * f[d];
    nf = std::sqrt(nf);
    if (nf < 1e-12)
      throw NumericError("feature row " + std::to_string(r) +
                         " has zero norm");
    fnorm[r] = nf;
    double *lrow = logits.data() + r * classes;
    for (int c = 0; c < classes; ++c) {
      double dot = 0.0;
      for (int d = 0; d < dim; ++d) dot += f[d] * what[d * classes + c];
      lrow[c] = dot;
    }
    const int t = targets[r];
    const double c_t = std::clamp(lrow[t] / nf, -1.0, 1.0);
    cos_t[r] = c_t;
    const double phi = angular_phi(c_t, m);
    lrow[t] = (lam * nf * c_t + nf * phi) / (lam + 1.0);
  }

  std::vector<double> p = softmax_rows(logits, batch, classes);
  double loss = 0.0;
  for (int r = 0; r < batch; ++r)
    loss -= std::log(p[r * classes + targets[r]]);
  loss /= batch;

  Tensor out = Tensor::from_values(
      {1}, {loss}, features.requires_grad() || weights.requires_grad());
  return g.record(out, [features, weights, out, targets, m, lam, batch, dim,
                        classes, wnorm = std::move(wnorm),
                        what = std::move(what), fnorm = std::move(fnorm),
                        cos_t = std::move(cos_t),
                        p = std::move(p)](GradStore &gs) {
    const bool want_f = gs.wants(features), want_w = gs.wants(weights);
    if (!want_f && !want_w) return;
    const double go = (*gs.find(out))[0];
    // d loss / d what accumulates here, then maps through the column
    // normalization onto the raw weights.
    std::vector<double> gwhat(want_w ? what.size() : 0, 0.0);
    std::vector<double> gfeat(want_f ? features.data().size() : 0, 0.0);
    for (int r = 0; r < batch; ++r) {
      const double *f = features.data().data() + r * dim;
      const int t = targets[r];
      const double nf = fnorm[r], c_t = cos_t[r];
      const double phi = angular_phi(c_t, m);
      const double dphi = angular_phi_dcos(c_t, m);
      for (int c = 0; c < classes; ++c) {
        const double gz = go * (p[r * classes + c] -
                                (c == targets[r] ? 1.0 : 0.0)) / batch;
        if (gz == 0.0) continue;
        if (c != t) {
          // z = f . what_c
          if (want_f)
            for (int d = 0; d < dim; ++d)
              gfeat[r * dim + d] += gz * what[d * classes + c];
          if (want_w)
            for (int d = 0; d < dim; ++d)
              gwhat[d * classes + c] += gz * f[d];
        } else {
          // z = (lam nf c + nf phi(c)) / (lam + 1), c = (f . what_t) / nf.
          const double a = (lam + dphi) / (lam + 1.0);
          const double b = (phi - dphi * c_t) / (lam + 1.0);
          // dz/df = a what_t + b f/nf ; dz/dwhat_t = a f.
          if (want_f)
            for (int d = 0; d < dim; ++d)
              gfeat[r * dim + d] +=
                  gz * (a * what[d * classes + t] + b * f[d] / nf);
          if (want_w)
            for (int d = 0; d < dim; ++d)
              gwhat[d * classes + t] += gz * a * f[d];
        }
      }
    }
    if (want_f) {
      auto &gf = gs.of(features);
      for (size_t i = 0; i < gf.size(); ++i) gf[i] += gfeat[i];
    }
    if (want_w) {
      // what = w / |w| columnwise: dL/dw = (g - (g . what) what) / |w|.
      auto &gw = gs.of(weights);
      for (int c = 0; c < classes; ++c) {
        double dot = 0.0;
        for (int d = 0; d < dim; ++d)
          dot += gwhat[d * classes + c] * what[d * classes + c];
        for (int d = 0; d < dim; ++d)
          gw[d * classes + c] +=
              (gwhat[d * classes + c] - dot * what[d * classes + c]) /
              wnorm[c];
      }
    }
  });
}

Tensor reconstruction_loss(Graph &g, const Tensor &s_hat, const Tensor &s) {
  if (s_hat.shape() != s.shape())
    throw ShapeError("reconstruction shape mismatch: " +
                     shape_str(s_hat.shape()) + " vs " + shape_str(s.shape()));
  const int batch = s_hat.dim(0);
  double loss = 0.0;
  for (int i = 0; i < s_hat.size(); ++i) {
    const double d = s_hat.data()[i] - s.data()[i];
    loss += d * d;
  }
  loss = 0.5 * loss / batch;
  Tensor out = Tensor::from_values(
      {1}, {loss}, s_hat.requires_grad() || s.requires_grad());
  return g.record(out, [s_hat, s, out, batch](GradStore &gs) {
    const double go = (*gs.find(out))[0];
    if (gs.wants(s_hat)) {
      auto &gh = gs.of(s_hat);
      for (size_t i = 0; i < gh.size(); ++i)
        gh[i] += go * (s_hat.data()[i] - s.data()[i]) / batch;
    }
    if (gs.wants(s)) {
      auto &gs2 = gs.of(s);
      for (size_t i = 0; i < gs2.size(); ++i)
        gs2[i] -= go * (s_hat.data()[i] - s.data()[i]) / batch;
    }
  });
}

Tensor total_loss(Graph &g, const Tensor &l_p, const Tensor &l_adv_s,
                  const Tensor &l_adv_e, const Tensor &l_r,
                  const LossWeights &w) {
  const struct {
    const char *name;
    const Tensor *t;
  } parts[] = {{"L_p", &l_p},
               {"L_adv_s", &l_adv_s},
               {"L_adv_e", &l_adv_e},
               {"L_r", &l_r}};
  for (const auto &part : parts)
    if (!std::isfinite(part.t->value()))
      throw NumericError(std::string(part.name) + " is not finite");
  Tensor adv = g.add(l_adv_s, l_adv_e);
  return g.add(g.add(g.scale(l_p, w.lambda_p), g.scale(adv, w.lambda_adv)),
               g.scale(l_r, w.lambda_r));
}

const GroupSet &route_p() {
  static const GroupSet s{Group::kEncoderP, Group::kClassifierSpeaker};
  return s;
}
const GroupSet &route_adv_s() {
  static const GroupSet s{Group::kClassifierAdv};
  return s;
}
const GroupSet &route_adv_e() {
  static const GroupSet s{Group::kEncoderE};
  return s;
}
const GroupSet &route_r() {
  static const GroupSet s{Group::kDecoder, Group::kEncoderP, Group::kEncoderE};
  return s;
}

}  // namespace losses
}  // namespace aldr
