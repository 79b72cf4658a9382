// aldr/losses.h

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

#ifndef ALDR_LOSSES_H_
#define ALDR_LOSSES_H_

#include <vector>

#include "aldr/tensor.h"

namespace aldr {
namespace losses {

struct ASoftmaxConfig {
  int m = 4;               // angular margin factor
  double lambda_cos = 5.0; // annealing weight, held constant
};

// phi(theta) = (-1)^k cos(m theta) - 2k with k = floor(theta m / pi) clamped
// to [0, m-1]. Takes cos(theta) so callers avoid a needless acos/cos round
// trip; cos(m theta) is evaluated as the Chebyshev polynomial T_m(cos theta).
double angular_phi(double cos_theta, int m);
// d phi / d cos(theta) = (-1)^k m U_{m-1}(cos theta) on the k-th piece.
double angular_phi_dcos(double cos_theta, int m);

// Mean over the batch of -log softmax(logits)[target], max-stabilized.
autodiff::Tensor softmax_ce(autodiff::Graph &g, const autodiff::Tensor &logits,
                            const std::vector<int> &targets);

// Angular-margin cross entropy. The target logit becomes
// (lambda_cos |f| cos(theta_t) + |f| phi(theta_t)) / (lambda_cos + 1); other
// logits stay |f| cos(theta_i). Columns of `weights` are renormalized to unit
// length inside the op, with backward through the normalization.
autodiff::Tensor a_softmax_loss(autodiff::Graph &g,
                                const autodiff::Tensor &features,
                                const autodiff::Tensor &weights,
                                const std::vector<int> &targets,
                                const ASoftmaxConfig &cfg);

// Same value as softmax_ce; kept distinct because its gradient is routed to
// the adversarial classifier only.
autodiff::Tensor adv_classifier_loss(autodiff::Graph &g,
                                     const autodiff::Tensor &logits,
                                     const std::vector<int> &targets);

// Cross entropy between softmax(logits) and the uniform distribution,
// -(1/N) sum_j log y_j averaged over the batch. Minimum log N at uniform.
autodiff::Tensor adv_eliminate_loss(autodiff::Graph &g,
                                    const autodiff::Tensor &logits);

// (1/B) * 1/2 |S_hat - S|^2 where B is dim 0 of S_hat.
autodiff::Tensor reconstruction_loss(autodiff::Graph &g,
                                     const autodiff::Tensor &s_hat,
                                     const autodiff::Tensor &s);

struct LossWeights {
  double lambda_p = 1.0;
  double lambda_adv = 0.1;
  double lambda_r = 0.02;
};

struct LossBundle {
  double l_p = 0.0;
  double l_adv_s = 0.0;
  double l_adv_e = 0.0;
  double l_r = 0.0;
  double l_total = 0.0;
};

// lambda_p L_p + lambda_adv (L_adv_s + L_adv_e) + lambda_r L_r. Throws a
// numeric fault naming the offending component if any input is not finite.
autodiff::Tensor total_loss(autodiff::Graph &g, const autodiff::Tensor &l_p,
                            const autodiff::Tensor &l_adv_s,
                            const autodiff::Tensor &l_adv_e,
                            const autodiff::Tensor &l_r,
                            const LossWeights &w);

// Gradient routing, one set per objective.
const autodiff::GroupSet &route_p();      // {E_p, C_speaker}
const autodiff::GroupSet &route_adv_s();  // {C_adv}
const autodiff::GroupSet &route_adv_e();  // {E_e}
const autodiff::GroupSet &route_r();      // {D_r, E_p, E_e}

}  // namespace losses
}  // namespace aldr

#endif  // ALDR_LOSSES_H_
