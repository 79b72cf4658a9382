// aldr/networks.h

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

#ifndef ALDR_NETWORKS_H_
#define ALDR_NETWORKS_H_

#include <random>
#include <string>
#include <utility>
#include <vector>

#include "aldr/audio.h"
#include "aldr/tensor.h"

namespace aldr {
namespace net {

struct ModelConfig {
  std::string kind = "conv";  // conv | mlp; both encoders share this
  int frames = audio::kSegmentFrames;
  int bins = audio::kNumBins;
  int embedding_dim = 64;
  int n_speakers = 0;
  int conv_c1 = 8;     // channels after the first conv layer
  int conv_c2 = 16;    // channels after the second
  int mlp_hidden = 128;
  int adv_hidden = 128;  // width of the three hidden adversary layers
  int dec_hidden = 128;  // mlp decoder hidden width
};

// The five learnable components: twin encoders E_p/E_e, the speaker
// classifier (a unit-norm weight matrix consumed by the angular loss), the
// deeper adversarial classifier, and the reconstruction decoder. Parameters
// are created in a fixed order from the provided rng (Glorot-uniform weights,
// zero biases) and each belongs to exactly one routing group.
class Model {
 public:
  Model(const ModelConfig &cfg, std::mt19937_64 &rng);

  const ModelConfig &config() const { return cfg_; }

  // Batches segments into the encoder input layout: [B,1,T,F] for conv,
  // [B,T,F] for mlp. Every segment must match the configured shape.
  autodiff::Tensor make_input(
      const std::vector<const audio::Spectrogram *> &segments) const;

  autodiff::Tensor encode_p(autodiff::Graph &g, const autodiff::Tensor &x) const;
  autodiff::Tensor encode_e(autodiff::Graph &g, const autodiff::Tensor &x) const;
  // [f_p || f_e], f_p first.
  autodiff::Tensor fuse(autodiff::Graph &g, const autodiff::Tensor &f_p,
                        const autodiff::Tensor &f_e);
  autodiff::Tensor classify_adv(autodiff::Graph &g, const autodiff::Tensor &f);
  autodiff::Tensor decode(autodiff::Graph &g, const autodiff::Tensor &f_s);

  // Raw [D x N_s] speaker classifier weights (columns are normalized inside
  // the angular loss).
  autodiff::Tensor speaker_weights() { return w_speaker_; }
  // Margin-free angular logits f . w_hat, for accuracy measurements.
  std::vector<double> speaker_logits_values(const autodiff::Tensor &f) const;

  // Copies every E_p parameter into its E_e twin.
  void init_eliminating_from_purifying();

  const std::vector<std::pair<std::string, autodiff::Tensor>> &named_params()
      const {
    return params_;
  }
  std::vector<autodiff::Tensor> group_params(autodiff::Group g) const;

 private:
  struct Encoder {
    // conv: k1 b1 k2 b2 w b; mlp: w1 b1 w2 b2 (stored in w1_/... slots).
    autodiff::Tensor k1, b1, k2, b2, w, b;
  };

  autodiff::Tensor encode(autodiff::Graph &g, const autodiff::Tensor &x,
                          const Encoder &e) const;
  autodiff::Tensor add_param(const std::string &name, autodiff::Group group,
                             std::vector<int> shape, int fan_in, int fan_out,
                             std::mt19937_64 &rng);

  ModelConfig cfg_;
  int h1_ = 0, w1_ = 0, h2_ = 0, w2_ = 0;  // conv feature map sizes
  Encoder enc_p_, enc_e_;
  autodiff::Tensor w_speaker_;
  autodiff::Tensor a1_, ab1_, a2_, ab2_, a3_, ab3_, a4_, ab4_;
  // Decoder: conv kind uses dw/db + two transposed convs; mlp uses dw/db +
  // dw2/db2.
  autodiff::Tensor dw_, db_, dk1_, dbk1_, dk2_, dbk2_, dw2_, db2_;
  std::vector<std::pair<std::string, autodiff::Tensor>> params_;
};

}  // namespace net
}  // namespace aldr

#endif  // ALDR_NETWORKS_H_
