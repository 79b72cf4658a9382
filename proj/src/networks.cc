// aldr/networks.cc

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

#include "aldr/networks.h"

#include <cmath>

namespace aldr {
namespace net {

using autodiff::Graph;
using autodiff::Group;
using autodiff::Tensor;
using autodiff::shape_str;

namespace {
int conv_out(int in, int kernel, int stride) {
  return (in - kernel) / stride + 1;
}
}  // namespace

Tensor Model::add_param(const std::string &name, Group group,
                        std::vector<int> shape, int fan_in, int fan_out,
                        std::mt19937_64 &rng) {
  Tensor t = Tensor::zeros(std::move(shape), true);
  if (fan_in > 0) {  // fan_in 0 marks a zero-initialized bias
    const double s = std::sqrt(6.0 / (fan_in + fan_out));
    for (double &v : t.data()) {
      const double u = (rng() >> 11) * 0x1.0p-53;  // [0, 1)
      v = (2.0 * u - 1.0) * s;
    }
  }
  t.assign_group(group);
  params_.emplace_back(name, t);
  return t;
}

Model::Model(const ModelConfig &cfg, std::mt19937_64 &rng) : cfg_(cfg) {
  if (cfg_.kind != "conv" && cfg_.kind != "mlp")
    throw ConfigError("unknown encoder kind `" + cfg_.kind +
                      "` (conv or mlp)");
  if (cfg_.embedding_dim < 2)
    throw ConfigError("embedding_dim must be >= 2");
  if (cfg_.n_speakers < 2)
    throw ConfigError("model needs n_speakers >= 2, got " +
                      std::to_string(cfg_.n_speakers));
  if (cfg_.frames < 8 || cfg_.bins < 8)
    throw ConfigError("segment shape too small: " +
                      std::to_string(cfg_.frames) + "x" +
                      std::to_string(cfg_.bins));

  const int d = cfg_.embedding_dim;
  const int ns = cfg_.n_speakers;

  auto build_encoder = [&](const std::string &prefix, Group group) {
    Encoder e;
    if (cfg_.kind == "conv") {
      h1_ = conv_out(cfg_.frames, 3, 2);
      w1_ = conv_out(cfg_.bins, 3, 2);
      h2_ = conv_out(h1_, 3, 2);
      w2_ = conv_out(w1_, 3, 2);
      e.k1 = add_param(prefix + ".conv1.k", group, {cfg_.conv_c1, 1, 3, 3},
                       1 * 9, cfg_.conv_c1 * 9, rng);
      e.b1 = add_param(prefix + ".conv1.b", group, {cfg_.conv_c1}, 0, 0, rng);
      e.k2 = add_param(prefix + ".conv2.k", group,
                       {cfg_.conv_c2, cfg_.conv_c1, 3, 3}, cfg_.conv_c1 * 9,
                       cfg_.conv_c2 * 9, rng);
      e.b2 = add_param(prefix + ".conv2.b", group, {cfg_.conv_c2}, 0, 0, rng);
      const int pooled = cfg_.conv_c2 * w2_;
      e.w = add_param(prefix + ".proj.w", group, {pooled, d}, pooled, d, rng);
      e.b = add_param(prefix + ".proj.b", group, {d}, 0, 0, rng);
    } else {
      e.k1 = add_param(prefix + ".fc1.w", group, {cfg_.bins, cfg_.mlp_hidden},
                       cfg_.bins, cfg_.mlp_hidden, rng);
      e.b1 = add_param(prefix + ".fc1.b", group, {cfg_.mlp_hidden}, 0, 0, rng);
      e.k2 = add_param(prefix + ".fc2.w", group, {cfg_.mlp_hidden, d},
                       cfg_.mlp_hidden, d, rng);
      e.b2 = add_param(prefix + ".fc2.b", group, {d}, 0, 0, rng);
    }
    return e;
  };

  enc_p_ = build_encoder("E_p", Group::kEncoderP);
  enc_e_ = build_encoder("E_e", Group::kEncoderE);

  w_speaker_ = add_param("C_speaker.w", Group::kClassifierSpeaker, {d, ns}, d,
                         ns, rng);

  const int ah = cfg_.adv_hidden;
  a1_ = add_param("C_adv.fc1.w", Group::kClassifierAdv, {d, ah}, d, ah, rng);
  ab1_ = add_param("C_adv.fc1.b", Group::kClassifierAdv, {ah}, 0, 0, rng);
  a2_ = add_param("C_adv.fc2.w", Group::kClassifierAdv, {ah, ah}, ah, ah, rng);
  ab2_ = add_param("C_adv.fc2.b", Group::kClassifierAdv, {ah}, 0, 0, rng);
  a3_ = add_param("C_adv.fc3.w", Group::kClassifierAdv, {ah, ah}, ah, ah, rng);
  ab3_ = add_param("C_adv.fc3.b", Group::kClassifierAdv, {ah}, 0, 0, rng);
  a4_ = add_param("C_adv.out.w", Group::kClassifierAdv, {ah, ns}, ah, ns, rng);
  ab4_ = add_param("C_adv.out.b", Group::kClassifierAdv, {ns}, 0, 0, rng);

  if (cfg_.kind == "conv") {
    const int pooled = cfg_.conv_c2 * w2_;
    dw_ = add_param("D_r.proj.w", Group::kDecoder, {2 * d, pooled}, 2 * d,
                    pooled, rng);
    db_ = add_param("D_r.proj.b", Group::kDecoder, {pooled}, 0, 0, rng);
    dk1_ = add_param("D_r.tconv1.k", Group::kDecoder,
                     {cfg_.conv_c2, cfg_.conv_c1, 3, 3}, cfg_.conv_c2 * 9,
                     cfg_.conv_c1 * 9, rng);
    dbk1_ = add_param("D_r.tconv1.b", Group::kDecoder, {cfg_.conv_c1}, 0, 0,
                      rng);
    dk2_ = add_param("D_r.tconv2.k", Group::kDecoder, {cfg_.conv_c1, 1, 3, 3},
                     cfg_.conv_c1 * 9, 1 * 9, rng);
    dbk2_ = add_param("D_r.tconv2.b", Group::kDecoder, {1}, 0, 0, rng);
  } else {
    dw_ = add_param("D_r.fc1.w", Group::kDecoder, {2 * d, cfg_.dec_hidden},
                    2 * d, cfg_.dec_hidden, rng);
    db_ = add_param("D_r.fc1.b", Group::kDecoder, {cfg_.dec_hidden}, 0, 0,
                    rng);
    dw2_ = add_param("D_r.fc2.w", Group::kDecoder,
                     {cfg_.dec_hidden, cfg_.frames * cfg_.bins},
                     cfg_.dec_hidden, cfg_.frames * cfg_.bins, rng);
    db2_ = add_param("D_r.fc2.b", Group::kDecoder, {cfg_.frames * cfg_.bins},
                     0, 0, rng);
  }
}

Tensor Model::make_input(
    const std::vector<const audio::Spectrogram *> &segments) const {
  if (segments.empty()) throw DataError("empty batch");
  const int b = static_cast<int>(segments.size());
  const size_t per = static_cast<size_t>(cfg_.frames) * cfg_.bins;
  std::vector<double> values;
  values.reserve(per * b);
  for (const audio::Spectrogram *s : segments) {
    if (s->frames != cfg_.frames || s->bins != cfg_.bins)
      throw ShapeError("segment " + std::to_string(s->frames) + "x" +
                       std::to_string(s->bins) + " does not match input " +
                       std::to_string(cfg_.frames) + "x" +
                       std::to_string(cfg_.bins));
    values.insert(values.end(), s->data.begin(), s->data.end());
  }
  if (cfg_.kind == "conv")
    return Tensor::from_values({b, 1, cfg_.frames, cfg_.bins},
                               std::move(values));
  return Tensor::from_values({b, cfg_.frames, cfg_.bins}, std::move(values));
}

Tensor Model::encode(Graph &g, const Tensor &x, const Encoder &e) const {
  if (cfg_.kind == "conv") {
    if (x.rank() != 4 || x.dim(1) != 1 || x.dim(2) != cfg_.frames ||
        x.dim(3) != cfg_.bins)
      throw ShapeError("encoder expects [B,1," + std::to_string(cfg_.frames) +
                       "," + std::to_string(cfg_.bins) + "], got " +
                       shape_str(x.shape()));
    Tensor h = g.relu(g.conv2d(x, e.k1, e.b1, 2));
    h = g.relu(g.conv2d(h, e.k2, e.b2, 2));
    Tensor pooled = g.channel_time_pool(h);  // mean over time frames
    return g.affine(pooled, e.w, e.b);
  }
  if (x.rank() != 3 || x.dim(1) != cfg_.frames || x.dim(2) != cfg_.bins)
    throw ShapeError("encoder expects [B," + std::to_string(cfg_.frames) +
                     "," + std::to_string(cfg_.bins) + "], got " +
                     shape_str(x.shape()));
  Tensor pooled = g.time_mean_pool(x);
  Tensor h = g.relu(g.affine(pooled, e.k1, e.b1));
  return g.affine(h, e.k2, e.b2);
}

Tensor Model::encode_p(Graph &g, const Tensor &x) const {
  return encode(g, x, enc_p_);
}

Tensor Model::encode_e(Graph &g, const Tensor &x) const {
  return encode(g, x, enc_e_);
}

Tensor Model::fuse(Graph &g, const Tensor &f_p, const Tensor &f_e) {
  if (f_p.rank() != 2 || f_e.rank() != 2 || f_p.dim(1) != f_e.dim(1))
    throw ShapeError("fuse expects matching [B,D] features, got " +
                     shape_str(f_p.shape()) + " and " +
                     shape_str(f_e.shape()));
  return g.concat(f_p, f_e);
}

Tensor Model::classify_adv(Graph &g, const Tensor &f) {
  Tensor h = g.relu(g.affine(f, a1_, ab1_));
  h = g.relu(g.affine(h, a2_, ab2_));
  h = g.relu(g.affine(h, a3_, ab3_));
  return g.affine(h, a4_, ab4_);
}

Tensor Model::decode(Graph &g, const Tensor &f_s) {
  if (f_s.rank() != 2 || f_s.dim(1) != 2 * cfg_.embedding_dim)
    throw ShapeError("decoder expects [B," +
                     std::to_string(2 * cfg_.embedding_dim) + "], got " +
                     shape_str(f_s.shape()));
  const int b = f_s.dim(0);
  if (cfg_.kind == "conv") {
    Tensor h = g.relu(g.affine(f_s, dw_, db_));
    h = g.reshape(h, {b, cfg_.conv_c2, w2_});
    h = g.tile_time(h, h2_);  // undo the temporal pooling by broadcast
    h = g.crop_pad2d(g.conv_transpose2d(h, dk1_, dbk1_, 2), h1_, w1_);
    h = g.relu(h);
    h = g.conv_transpose2d(h, dk2_, dbk2_, 2);
    return g.crop_pad2d(h, cfg_.frames, cfg_.bins);
  }
  Tensor h = g.relu(g.affine(f_s, dw_, db_));
  h = g.affine(h, dw2_, db2_);
  return g.reshape(h, {b, cfg_.frames, cfg_.bins});
}

std::vector<double> Model::speaker_logits_values(const Tensor &f) const {
  const int b = f.dim(0), d = f.dim(1), ns = cfg_.n_speakers;
  if (d != cfg_.embedding_dim)
    throw ShapeError("speaker logits expect [B," +
                     std::to_string(cfg_.embedding_dim) + "], got " +
                     shape_str(f.shape()));
  std::vector<double> logits(static_cast<size_t>(b) * ns, 0.0);
  const auto &w = w_speaker_.data();
  for (int c = 0; c < ns; ++c) {
    double norm = 0.0;
    for (int k = 0; k < d; ++k) norm += w[k * ns + c] * w[k * ns + c];
    norm = std::sqrt(norm);
    if (norm < 1e-12) norm = 1.0;
    for (int r = 0; r < b; ++r) {
      double dot = 0.0;
      for (int k = 0; k < d; ++k) dot += f.data()[r * d + k] * w[k * ns + c];
      logits[r * ns + c] = dot / norm;
    }
  }
  return logits;
}

void Model::init_eliminating_from_purifying() {
  const Tensor *src[] = {&enc_p_.k1, &enc_p_.b1, &enc_p_.k2,
                         &enc_p_.b2, &enc_p_.w,  &enc_p_.b};
  Tensor *dst[] = {&enc_e_.k1, &enc_e_.b1, &enc_e_.k2,
                   &enc_e_.b2, &enc_e_.w,  &enc_e_.b};
  for (int i = 0; i < 6; ++i) {
    if (!src[i]->defined()) continue;  // mlp uses only the first four slots
    if (src[i]->shape() != dst[i]->shape())
      throw ShapeError("encoder twins disagree: " +
                       shape_str(src[i]->shape()) + " vs " +
                       shape_str(dst[i]->shape()));
    dst[i]->data() = src[i]->data();
  }
}

std::vector<Tensor> Model::group_params(Group g) const {
  std::vector<Tensor> out;
  for (const auto &kv : params_)
    if (kv.second.group() == g) out.push_back(kv.second);
  return out;
}

}  // namespace net
}  // namespace aldr
