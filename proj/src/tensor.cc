// aldr/tensor.cc

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

#include "aldr/tensor.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

namespace aldr {
namespace autodiff {

namespace {

const std::array<std::string, kNumGroups> kGroupNames = {
    "E_p", "E_e", "C_speaker", "C_adv", "D_r"};

int64_t shape_product(const std::vector<int> &shape) {
  int64_t n = 1;
  for (int d : shape) {
    if (d <= 0) throw ShapeError("non-positive dimension in " + shape_str(shape));
    n *= d;
  }
  return n;
}

}  // namespace

const std::string &group_name(Group g) {
  return kGroupNames[static_cast<int>(g)];
}

Group group_from_name(const std::string &name) {
  for (int i = 0; i < kNumGroups; ++i)
    if (kGroupNames[i] == name) return static_cast<Group>(i);
  throw ConfigError("unknown parameter group name: " + name);
}

std::string shape_str(const std::vector<int> &shape) {
  std::ostringstream os;
  os << "[";
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) os << "x";
    os << shape[i];
  }
  os << "]";
  return os.str();
}

Tensor Tensor::zeros(std::vector<int> shape, bool requires_grad) {
  auto impl = std::make_shared<TensorImpl>();
  int64_t n = shape_product(shape);
  impl->shape = std::move(shape);
  impl->data.assign(static_cast<size_t>(n), 0.0);
  impl->requires_grad = requires_grad;
  return Tensor(std::move(impl));
}

Tensor Tensor::from_values(std::vector<int> shape, std::vector<double> values,
                           bool requires_grad) {
  int64_t n = shape_product(shape);
  if (n != static_cast<int64_t>(values.size()))
    throw ShapeError("value count " + std::to_string(values.size()) +
                     " does not fill shape " + shape_str(shape));
  auto impl = std::make_shared<TensorImpl>();
  impl->shape = std::move(shape);
  impl->data = std::move(values);
  impl->requires_grad = requires_grad;
  return Tensor(std::move(impl));
}

Tensor Tensor::scalar(double value, bool requires_grad) {
  return from_values({1}, {value}, requires_grad);
}

double Tensor::value() const {
  if (size() != 1)
    throw ShapeError("value() called on non-scalar tensor " +
                     shape_str(shape()));
  return impl_->data[0];
}

void Tensor::assign_group(Group g) {
  if (impl_->group >= 0 && impl_->group != static_cast<int>(g))
    throw ShapeError("tensor already belongs to group " +
                     group_name(static_cast<Group>(impl_->group)));
  impl_->group = static_cast<int>(g);
}

std::vector<double> &Tensor::grad() {
  if (impl_->grad.empty()) impl_->grad.assign(impl_->data.size(), 0.0);
  return impl_->grad;
}

const std::vector<double> *Tensor::grad_if_any() const {
  return impl_->grad.empty() ? nullptr : &impl_->grad;
}

void Tensor::zero_grad() {
  std::fill(impl_->grad.begin(), impl_->grad.end(), 0.0);
}

std::vector<double> &GradStore::of(const Tensor &t) {
  auto it = entries_.find(t.impl());
  if (it == entries_.end()) {
    Entry e;
    e.tensor = t;
    e.flow.assign(t.data().size(), 0.0);
    it = entries_.emplace(t.impl(), std::move(e)).first;
  }
  return it->second.flow;
}

const std::vector<double> *GradStore::find(const Tensor &t) const {
  auto it = entries_.find(t.impl());
  return it == entries_.end() ? nullptr : &it->second.flow;
}

Tensor Graph::record(const Tensor &output, BackwardFn fn) {
  records_.push_back(Record{output, std::move(fn)});
  return output;
}

void Graph::backward(const Tensor &root, const GroupSet &allowed) {
  if (root.size() != 1)
    throw ShapeError("backward root must be scalar, got " +
                     shape_str(root.shape()));
  GradStore store;
  store.of(root)[0] = 1.0;
  for (auto it = records_.rbegin(); it != records_.rend(); ++it) {
    if (store.find(it->output) == nullptr) continue;  // no flow reached it
    if (it->fn) it->fn(store);
  }
  // Fold flowing gradients into persistent buffers, gated by group.
  for (auto &kv : store.entries_) {
    Tensor t = kv.second.tensor;
    if (!t.requires_grad()) continue;
    if (t.has_group() && !allowed.contains(t.group())) continue;
    auto &g = t.grad();
    const auto &flow = kv.second.flow;
    for (size_t i = 0; i < g.size(); ++i) g[i] += flow[i];
  }
}

Tensor Graph::affine(const Tensor &x, const Tensor &w, const Tensor &b) {
  if (x.rank() != 2 || w.rank() != 2 || b.rank() != 1 ||
      x.dim(1) != w.dim(0) || w.dim(1) != b.dim(0))
    throw ShapeError("affine shape mismatch: x " + shape_str(x.shape()) +
                     ", w " + shape_str(w.shape()) + ", b " +
                     shape_str(b.shape()));
  const int rows = x.dim(0), inner = x.dim(1), cols = w.dim(1);
  Tensor out = Tensor::zeros({rows, cols},
                             x.requires_grad() || w.requires_grad() ||
                                 b.requires_grad());
  const double *xd = x.data().data(), *wd = w.data().data(),
               *bd = b.data().data();
  double *od = out.data().data();
  for (int r = 0; r < rows; ++r) {
    double *orow = od + r * cols;
    for (int c = 0; c < cols; ++c) orow[c] = bd[c];
    const double *xrow = xd + r * inner;
    for (int k = 0; k < inner; ++k) {
      const double xv = xrow[k];
      const double *wrow = wd + k * cols;
      for (int c = 0; c < cols; ++c) orow[c] += xv * wrow[c];
    }
  }
  return record(out, [x, w, b, out, rows, inner, cols](GradStore &gs) {
    const auto &go = *gs.find(out);
    if (gs.wants(x)) {
      auto &gx = gs.of(x);
      const double *wd = w.data().data();
      for (int r = 0; r < rows; ++r)
        for (int k = 0; k < inner; ++k) {
          const double *wrow = wd + k * cols;
          const double *gorow = go.data() + r * cols;
          double acc = 0.0;
          for (int c = 0; c < cols; ++c) acc += gorow[c] * wrow[c];
          gx[r * inner + k] += acc;
        }
    }
    if (gs.wants(w)) {
      auto &gw = gs.of(w);
      const double *xd = x.data().data();
      for (int r = 0; r < rows; ++r)
        for (int k = 0; k < inner; ++k) {
          const double xv = xd[r * inner + k];
          const double *gorow = go.data() + r * cols;
          double *gwrow = gw.data() + k * cols;
          for (int c = 0; c < cols; ++c) gwrow[c] += xv * gorow[c];
        }
    }
    if (gs.wants(b)) {
      auto &gb = gs.of(b);
      for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) gb[c] += go[r * cols + c];
    }
  });
}

Tensor Graph::conv2d(const Tensor &x, const Tensor &kernel, int stride) {
  return conv2d(x, kernel, Tensor(), stride);
}

Tensor Graph::conv2d(const Tensor &x, const Tensor &kernel, const Tensor &bias,
                     int stride) {
  if (x.rank() != 4 || kernel.rank() != 4 || x.dim(1) != kernel.dim(1))
    throw ShapeError("conv2d shape mismatch: x " + shape_str(x.shape()) +
                     ", kernel " + shape_str(kernel.shape()));
  if (stride < 1) throw ShapeError("conv2d stride must be positive");
  const int batch = x.dim(0), cin = x.dim(1), h = x.dim(2), w = x.dim(3);
  const int cout = kernel.dim(0), kh = kernel.dim(2), kw = kernel.dim(3);
  if (kh > h || kw > w)
    throw ShapeError("conv2d kernel " + shape_str(kernel.shape()) +
                     " larger than input " + shape_str(x.shape()));
  if (bias.defined() && (bias.rank() != 1 || bias.dim(0) != cout))
    throw ShapeError("conv2d bias shape " + shape_str(bias.shape()) +
                     " does not match " + std::to_string(cout) + " filters");
  const int oh = (h - kh) / stride + 1, ow = (w - kw) / stride + 1;
  bool needs = x.requires_grad() || kernel.requires_grad() ||
               (bias.defined() && bias.requires_grad());
  Tensor out = Tensor::zeros({batch, cout, oh, ow}, needs);
  const double *xd = x.data().data(), *kd = kernel.data().data();
  double *od = out.data().data();
  for (int b = 0; b < batch; ++b) {
    for (int f = 0; f < cout; ++f) {
      double *oplane = od + ((b * cout) + f) * oh * ow;
      if (bias.defined()) {
        const double bv = bias.data()[f];
        for (int i = 0; i < oh * ow; ++i) oplane[i] = bv;
      }
      for (int c = 0; c < cin; ++c) {
        const double *xplane = xd + ((b * cin) + c) * h * w;
        const double *kplane = kd + ((f * cin) + c) * kh * kw;
        for (int ky = 0; ky < kh; ++ky)
          for (int kx = 0; kx < kw; ++kx) {
            const double kv = kplane[ky * kw + kx];
            for (int oy = 0; oy < oh; ++oy) {
              const double *xrow = xplane + (oy * stride + ky) * w + kx;
              double *orow = oplane + oy * ow;
              for (int ox = 0; ox < ow; ++ox)
                orow[ox] += kv * xrow[ox * stride];
            }
          }
      }
    }
  }
  return record(out, [x, kernel, bias, out, batch, cin, cout, h, w, kh, kw, oh,
                      ow, stride](GradStore &gs) {
    const auto &go = *gs.find(out);
    const double *kd = kernel.data().data(), *xd = x.data().data();
    if (gs.wants(x)) {
      auto &gx = gs.of(x);
      for (int b = 0; b < batch; ++b)
        for (int f = 0; f < cout; ++f) {
          const double *gplane = go.data() + ((b * cout) + f) * oh * ow;
          for (int c = 0; c < cin; ++c) {
            double *gxplane = gx.data() + ((b * cin) + c) * h * w;
            const double *kplane = kd + ((f * cin) + c) * kh * kw;
            for (int ky = 0; ky < kh; ++ky)
              for (int kx = 0; kx < kw; ++kx) {
                const double kv = kplane[ky * kw + kx];
                for (int oy = 0; oy < oh; ++oy) {
                  double *gxrow = gxplane + (oy * stride + ky) * w + kx;
                  const double *grow = gplane + oy * ow;
                  for (int ox = 0; ox < ow; ++ox)
                    gxrow[ox * stride] += kv * grow[ox];
                }
              }
          }
        }
    }
    if (gs.wants(kernel)) {
      auto &gk = gs.of(kernel);
      for (int b = 0; b < batch; ++b)
        for (int f = 0; f < cout; ++f) {
          const double *gplane = go.data() + ((b * cout) + f) * oh * ow;
          for (int c = 0; c < cin; ++c) {
            const double *xplane = xd + ((b * cin) + c) * h * w;
            double *gkplane = gk.data() + ((f * cin) + c) * kh * kw;
            for (int ky = 0; ky < kh; ++ky)
              for (int kx = 0; kx < kw; ++kx) {
                double acc = 0.0;
                for (int oy = 0; oy < oh; ++oy) {
                  const double *xrow = xplane + (oy * stride + ky) * w + kx;
                  const double *grow = gplane + oy * ow;
                  for (int ox = 0; ox < ow; ++ox)
                    acc += xrow[ox * stride] * grow[ox];
                }
                gkplane[ky * kw + kx] += acc;
              }
          }
        }
    }
    if (bias.defined() && gs.wants(bias)) {
      auto &gb = gs.of(bias);
      for (int b = 0; b < batch; ++b)
        for (int f = 0; f < cout; ++f) {
          const double *gplane = go.data() + ((b * cout) + f) * oh * ow;
          double acc = 0.0;
          for (int i = 0; i < oh * ow; ++i) acc += gplane[i];
          gb[f] += acc;
        }
    }
  });
}

Tensor Graph::conv_transpose2d(const Tensor &x, const Tensor &kernel,
                               const Tensor &bias, int stride) {
  if (x.rank() != 4 || kernel.rank() != 4 || x.dim(1) != kernel.dim(0))
    throw ShapeError("conv_transpose2d shape mismatch: x " +
                     shape_str(x.shape()) + ", kernel " +
                     shape_str(kernel.shape()));
  if (stride < 1) throw ShapeError("conv_transpose2d stride must be positive");
  const int batch = x.dim(0), cin = x.dim(1), h = x.dim(2), w = x.dim(3);
  const int cout = kernel.dim(1), kh = kernel.dim(2), kw = kernel.dim(3);
  if (bias.defined() && (bias.rank() != 1 || bias.dim(0) != cout))
    throw ShapeError("conv_transpose2d bias shape " + shape_str(bias.shape()) +
                     " does not match " + std::to_string(cout) + " filters");
  const int oh = (h - 1) * stride + kh, ow = (w - 1) * stride + kw;
  bool needs = x.requires_grad() || kernel.requires_grad() ||
               (bias.defined() && bias.requires_grad());
  Tensor out = Tensor::zeros({batch, cout, oh, ow}, needs);
  const double *xd = x.data().data(), *kd = kernel.data().data();
  double *od = out.data().data();
  for (int b = 0; b < batch; ++b) {
    if (bias.defined())
      for (int f = 0; f < cout; ++f) {
        double *oplane = od + ((b * cout) + f) * oh * ow;
        const double bv = bias.data()[f];
        for (int i = 0; i < oh * ow; ++i) oplane[i] = bv;
      }
    for (int c = 0; c < cin; ++c) {
      const double *xplane = xd + ((b * cin) + c) * h * w;
      for (int f = 0; f < cout; ++f) {
        double *oplane = od + ((b * cout) + f) * oh * ow;
        const double *kplane = kd + ((c * cout) + f) * kh * kw;
        for (int iy = 0; iy < h; ++iy)
          for (int ix = 0; ix < w; ++ix) {
            const double xv = xplane[iy * w + ix];
            if (xv == 0.0) continue;
            double *obase = oplane + (iy * stride) * ow + ix * stride;
            for (int ky = 0; ky < kh; ++ky) {
              const double *krow = kplane + ky * kw;
              double *orow = obase + ky * ow;
              for (int kx = 0; kx < kw; ++kx) orow[kx] += xv * krow[kx];
            }
          }
      }
    }
  }
  return record(out, [x, kernel, bias, out, batch, cin, cout, h, w, kh, kw, oh,
                      ow, stride](GradStore &gs) {
    const auto &go = *gs.find(out);
    const double *kd = kernel.data().data(), *xd = x.data().data();
    if (gs.wants(x)) {
      auto &gx = gs.of(x);
      for (int b = 0; b < batch; ++b)
        for (int c = 0; c < cin; ++c) {
          double *gxplane = gx.data() + ((b * cin) + c) * h * w;
          for (int f = 0; f < cout; ++f) {
            const double *gplane = go.data() + ((b * cout) + f) * oh * ow;
            const double *kplane = kd + ((c * cout) + f) * kh * kw;
            for (int iy = 0; iy < h; ++iy)
              for (int ix = 0; ix < w; ++ix) {
                const double *gbase =
                    gplane + (iy * stride) * ow + ix * stride;
                double acc = 0.0;
                for (int ky = 0; ky < kh; ++ky) {
                  const double *krow = kplane + ky * kw;
                  const double *grow = gbase + ky * ow;
                  for (int kx = 0; kx < kw; ++kx) acc += krow[kx] * grow[kx];
                }
                gxplane[iy * w + ix] += acc;
              }
          }
        }
    }
    if (gs.wants(kernel)) {
      auto &gk = gs.of(kernel);
      for (int b = 0; b < batch; ++b)
        for (int c = 0; c < cin; ++c) {
          const double *xplane = xd + ((b * cin) + c) * h * w;
          for (int f = 0; f < cout; ++f) {
            const double *gplane = go.data() + ((b * cout) + f) * oh * ow;
            double *gkplane = gk.data() + ((c * cout) + f) * kh * kw;
            for (int iy = 0; iy < h; ++iy)
              for (int ix = 0; ix < w; ++ix) {
                const double xv = xplane[iy * w + ix];
                if (xv == 0.0) continue;
                const double *gbase =
                    gplane + (iy * stride) * ow + ix * stride;
                for (int ky = 0; ky < kh; ++ky) {
                  const double *grow = gbase + ky * ow;
                  double *gkrow = gkplane + ky * kw;
                  for (int kx = 0; kx < kw; ++kx) gkrow[kx] += xv * grow[kx];
                }
              }
          }
        }
    }
    if (bias.defined() && gs.wants(bias)) {
      auto &gb = gs.of(bias);
      for (int b = 0; b < batch; ++b)
        for (int f = 0; f < cout; ++f) {
          const double *gplane = go.data() + ((b * cout) + f) * oh * ow;
          double acc = 0.0;
          for (int i = 0; i < oh * ow; ++i) acc += gplane[i];
          gb[f] += acc;
        }
    }
  });
}

Tensor Graph::relu(const Tensor &x) {
  Tensor out = Tensor::zeros(x.shape(), x.requires_grad());
  const auto &xd = x.data();
  auto &od = out.data();
  for (size_t i = 0; i < xd.size(); ++i) od[i] = xd[i] > 0.0 ? xd[i] : 0.0;
  return record(out, [x, out](GradStore &gs) {
    if (!gs.wants(x)) return;
    const auto &go = *gs.find(out);
    auto &gx = gs.of(x);
    const auto &xd = x.data();
    // Subgradient at exactly 0 is 0.
    for (size_t i = 0; i < gx.size(); ++i)
      if (xd[i] > 0.0) gx[i] += go[i];
  });
}

Tensor Graph::tanh(const Tensor &x) {
  Tensor out = Tensor::zeros(x.shape(), x.requires_grad());
  const auto &xd = x.data();
  auto &od = out.data();
  for (size_t i = 0; i < xd.size(); ++i) od[i] = std::tanh(xd[i]);
  return record(out, [x, out](GradStore &gs) {
    if (!gs.wants(x)) return;
    const auto &go = *gs.find(out);
    auto &gx = gs.of(x);
    const auto &od = out.data();
    for (size_t i = 0; i < gx.size(); ++i)
      gx[i] += go[i] * (1.0 - od[i] * od[i]);
  });
}

Tensor Graph::concat(const Tensor &a, const Tensor &b) {
  if (a.rank() != 2 || b.rank() != 2 || a.dim(0) != b.dim(0))
    throw ShapeError("concat batch mismatch: a " + shape_str(a.shape()) +
                     ", b " + shape_str(b.shape()));
  const int rows = a.dim(0), d1 = a.dim(1), d2 = b.dim(1);
  Tensor out =
      Tensor::zeros({rows, d1 + d2}, a.requires_grad() || b.requires_grad());
  auto &od = out.data();
  for (int r = 0; r < rows; ++r) {
    std::copy_n(a.data().begin() + r * d1, d1, od.begin() + r * (d1 + d2));
    std::copy_n(b.data().begin() + r * d2, d2,
                od.begin() + r * (d1 + d2) + d1);
  }
  return record(out, [a, b, out, rows, d1, d2](GradStore &gs) {
    const auto &go = *gs.find(out);
    if (gs.wants(a)) {
      auto &ga = gs.of(a);
      for (int r = 0; r < rows; ++r)
        for (int c = 0; c < d1; ++c)
          ga[r * d1 + c] += go[r * (d1 + d2) + c];
    }
    if (gs.wants(b)) {
      auto &gb = gs.of(b);
      for (int r = 0; r < rows; ++r)
        for (int c = 0; c < d2; ++c)
          gb[r * d2 + c] += go[r * (d1 + d2) + d1 + c];
    }
  });
}

Tensor Graph::detach(const Tensor &x) {
  // Copies values and drops the edge; no record is added.
  return Tensor::from_values(x.shape(), x.data(), false);
}

Tensor Graph::reshape(const Tensor &x, std::vector<int> shape) {
  Tensor out = Tensor::zeros(shape, x.requires_grad());
  if (out.size() != x.size())
    throw ShapeError("reshape " + shape_str(x.shape()) + " -> " +
                     shape_str(shape) + " changes element count");
  out.data() = x.data();
  return record(out, [x, out](GradStore &gs) {
    if (!gs.wants(x)) return;
    const auto &go = *gs.find(out);
    auto &gx = gs.of(x);
    for (size_t i = 0; i < gx.size(); ++i) gx[i] += go[i];
  });
}

Tensor Graph::crop_pad2d(const Tensor &x, int h, int w) {
  if (x.rank() != 4)
    throw ShapeError("crop_pad2d expects rank-4 input, got " +
                     shape_str(x.shape()));
  if (h < 1 || w < 1) throw ShapeError("crop_pad2d target must be positive");
  const int batch = x.dim(0), ch = x.dim(1), ih = x.dim(2), iw = x.dim(3);
  const int ch_copy = std::min(ih, h), cw = std::min(iw, w);
  Tensor out = Tensor::zeros({batch, ch, h, w}, x.requires_grad());
  for (int b = 0; b < batch; ++b)
    for (int c = 0; c < ch; ++c)
      for (int y = 0; y < ch_copy; ++y)
        std::copy_n(x.data().begin() + (((b * ch) + c) * ih + y) * iw, cw,
                    out.data().begin() + (((b * ch) + c) * h + y) * w);
  return record(out, [x, out, batch, ch, ih, iw, h, w, ch_copy,
                      cw](GradStore &gs) {
    if (!gs.wants(x)) return;
    const auto &go = *gs.find(out);
    auto &gx = gs.of(x);
    for (int b = 0; b < batch; ++b)
      for (int c = 0; c < ch; ++c)
        for (int y = 0; y < ch_copy; ++y) {
          const double *grow = go.data() + (((b * ch) + c) * h + y) * w;
          double *gxrow = gx.data() + (((b * ch) + c) * ih + y) * iw;
          for (int xval = 0; xval < cw; ++xval) gxrow[xval] += grow[xval];
        }
  });
}

Tensor Graph::tile_time(const Tensor &x, int t) {
  if (x.rank() != 3)
    throw ShapeError("tile_time expects rank-3 input, got " +
                     shape_str(x.shape()));
  if (t < 1) throw ShapeError("tile_time length must be positive");
  const int batch = x.dim(0), ch = x.dim(1), w = x.dim(2);
  Tensor out = Tensor::zeros({batch, ch, t, w}, x.requires_grad());
  for (int b = 0; b < batch; ++b)
    for (int c = 0; c < ch; ++c) {
      const double *src = x.data().data() + ((b * ch) + c) * w;
      double *dst = out.data().data() + ((b * ch) + c) * t * w;
      for (int tau = 0; tau < t; ++tau)
        std::copy_n(src, w, dst + tau * w);
    }
  return record(out, [x, out, batch, ch, t, w](GradStore &gs) {
    if (!gs.wants(x)) return;
    const auto &go = *gs.find(out);
    auto &gx = gs.of(x);
    for (int b = 0; b < batch; ++b)
      for (int c = 0; c < ch; ++c) {
        double *dst = gx.data() + ((b * ch) + c) * w;
        const double *src = go.data() + ((b * ch) + c) * t * w;
        for (int tau = 0; tau < t; ++tau)
          for (int i = 0; i < w; ++i) dst[i] += src[tau * w + i];
      }
  });
}

Tensor Graph::time_mean_pool(const Tensor &x) {
  if (x.rank() != 3)
    throw ShapeError("time_mean_pool expects rank-3 input, got " +
                     shape_str(x.shape()));
  const int batch = x.dim(0), t = x.dim(1), f = x.dim(2);
  Tensor out = Tensor::zeros({batch, f}, x.requires_grad());
  const double inv = 1.0 / t;
  for (int b = 0; b < batch; ++b) {
    double *orow = out.data().data() + b * f;
    const double *xbase = x.data().data() + b * t * f;
    for (int tau = 0; tau < t; ++tau)
      for (int i = 0; i < f; ++i) orow[i] += xbase[tau * f + i] * inv;
  }
  return record(out, [x, out, batch, t, f, inv](GradStore &gs) {
    if (!gs.wants(x)) return;
    const auto &go = *gs.find(out);
    auto &gx = gs.of(x);
    for (int b = 0; b < batch; ++b) {
      const double *grow = go.data() + b * f;
      double *gxbase = gx.data() + b * t * f;
      for (int tau = 0; tau < t; ++tau)
        for (int i = 0; i < f; ++i) gxbase[tau * f + i] += grow[i] * inv;
    }
  });
}

Tensor Graph::channel_time_pool(const Tensor &x) {
  if (x.rank() != 4)
    throw ShapeError("channel_time_pool expects rank-4 input, got " +
                     shape_str(x.shape()));
  const int batch = x.dim(0), ch = x.dim(1), h = x.dim(2), w = x.dim(3);
  Tensor out = Tensor::zeros({batch, ch * w}, x.requires_grad());
  const double inv = 1.0 / h;
  for (int b = 0; b < batch; ++b)
    for (int c = 0; c < ch; ++c) {
      const double *plane = x.data().data() + ((b * ch) + c) * h * w;
      double *orow = out.data().data() + b * ch * w + c * w;
      for (int y = 0; y < h; ++y)
        for (int i = 0; i < w; ++i) orow[i] += plane[y * w + i] * inv;
    }
  return record(out, [x, out, batch, ch, h, w, inv](GradStore &gs) {
    if (!gs.wants(x)) return;
    const auto &go = *gs.find(out);
    auto &gx = gs.of(x);
    for (int b = 0; b < batch; ++b)
      for (int c = 0; c < ch; ++c) {
        double *plane = gx.data() + ((b * ch) + c) * h * w;
        const double *grow = go.data() + b * ch * w + c * w;
        for (int y = 0; y < h; ++y)
          for (int i = 0; i < w; ++i) plane[y * w + i] += grow[i] * inv;
      }
  });
}

Tensor Graph::add(const Tensor &a, const Tensor &b) {
  if (a.shape() != b.shape())
    throw ShapeError("add shape mismatch: " + shape_str(a.shape()) + " vs " +
                     shape_str(b.shape()));
  Tensor out =
      Tensor::zeros(a.shape(), a.requires_grad() || b.requires_grad());
  for (int i = 0; i < out.size(); ++i)
    out.data()[i] = a.data()[i] + b.data()[i];
  return record(out, [a, b, out](GradStore &gs) {
    const auto &go = *gs.find(out);
    if (gs.wants(a)) {
      auto &ga = gs.of(a);
      for (size_t i = 0; i < ga.size(); ++i) ga[i] += go[i];
    }
    if (gs.wants(b)) {
      auto &gb = gs.of(b);
      for (size_t i = 0; i < gb.size(); ++i) gb[i] += go[i];
    }
  });
}

Tensor Graph::sum(const Tensor &x) {
  Tensor out = Tensor::zeros({1}, x.requires_grad());
  double acc = 0.0;
  for (double v : x.data()) acc += v;
  out.data()[0] = acc;
  return record(out, [x, out](GradStore &gs) {
    if (!gs.wants(x)) return;
    const double g = (*gs.find(out))[0];
    auto &gx = gs.of(x);
    for (size_t i = 0; i < gx.size(); ++i) gx[i] += g;
  });
}

Tensor Graph::scale(const Tensor &x, double c) {
  Tensor out = Tensor::zeros(x.shape(), x.requires_grad());
  for (int i = 0; i < out.size(); ++i) out.data()[i] = c * x.data()[i];
  return record(out, [x, out, c](GradStore &gs) {
    if (!gs.wants(x)) return;
    const auto &go = *gs.find(out);
    auto &gx = gs.of(x);
    for (size_t i = 0; i < gx.size(); ++i) gx[i] += c * go[i];
  });
}

}  // namespace autodiff
}  // namespace aldr
