// aldr/tensor.h

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

#ifndef ALDR_TENSOR_H_
#define ALDR_TENSOR_H_

#include <cstdint>
#include <functional>
#include <initializer_list>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "aldr/error.h"

namespace aldr {
namespace autodiff {

// The five trainable components of the model; the unit of gradient routing.
enum class Group : int {
  kEncoderP = 0,          // purifying encoder
  kEncoderE = 1,          // eliminating encoder
  kClassifierSpeaker = 2,
  kClassifierAdv = 3,     // adversarial classifier
  kDecoder = 4,           // reconstruction decoder
};
inline constexpr int kNumGroups = 5;

const std::string &group_name(Group g);
Group group_from_name(const std::string &name);

// Small set of Groups, used as the `allowed` argument of a gated backward.
class GroupSet {
 public:
  GroupSet() = default;
  GroupSet(std::initializer_list<Group> groups) {
    for (Group g : groups) add(g);
  }
  static GroupSet all() {
    GroupSet s;
    s.mask_ = (1u << kNumGroups) - 1;
    return s;
  }
  GroupSet &add(Group g) {
    mask_ |= 1u << static_cast<int>(g);
    return *this;
  }
  bool contains(Group g) const {
    return (mask_ >> static_cast<int>(g)) & 1u;
  }
  GroupSet united(const GroupSet &other) const {
    GroupSet s;
    s.mask_ = mask_ | other.mask_;
    return s;
  }
  bool operator==(const GroupSet &other) const { return mask_ == other.mask_; }

 private:
  uint32_t mask_ = 0;
};

struct TensorImpl {
  std::vector<int> shape;
  std::vector<double> data;
  bool requires_grad = false;
  int group = -1;            // -1 means "not in any parameter group"
  std::vector<double> grad;  // empty until the first accumulation
};

// Shared handle to an n-dimensional double array. Values are immutable once
// the tensor participates in a graph; only grad buffers (and raw parameter
// updates between graphs) mutate.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(std::vector<int> shape, bool requires_grad = false);
  static Tensor from_values(std::vector<int> shape, std::vector<double> values,
                            bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);

  bool defined() const { return impl_ != nullptr; }
  const std::vector<int> &shape() const { return impl_->shape; }
  int rank() const { return static_cast<int>(impl_->shape.size()); }
  int dim(int axis) const { return impl_->shape[axis]; }
  int size() const { return static_cast<int>(impl_->data.size()); }

  std::vector<double> &data() { return impl_->data; }
  const std::vector<double> &data() const { return impl_->data; }
  double value() const;  // scalar tensors only

  bool requires_grad() const { return impl_->requires_grad; }
  bool has_group() const { return impl_->group >= 0; }
  Group group() const { return static_cast<Group>(impl_->group); }
  void assign_group(Group g);

  // Allocates a zero grad buffer on first access.
  std::vector<double> &grad();
  const std::vector<double> *grad_if_any() const;
  void zero_grad();

  TensorImpl *impl() const { return impl_.get(); }
  bool same_storage(const Tensor &other) const {
    return impl_.get() == other.impl_.get();
  }

 private:
  explicit Tensor(std::shared_ptr<TensorImpl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<TensorImpl> impl_;
};

std::string shape_str(const std::vector<int> &shape);

// Per-backward scratch of flowing gradients, keyed by tensor identity.
// Backward rules read the output's flow and accumulate into their inputs'.
class GradStore {
 public:
  // Returns the flow buffer for t, creating a zero buffer on first use.
  std::vector<double> &of(const Tensor &t);
  const std::vector<double> *find(const Tensor &t) const;
  // True if a backward rule should bother computing t's gradient.
  bool wants(const Tensor &t) const { return t.requires_grad(); }

 private:
  friend class Graph;
  struct Entry {
    Tensor tensor;  // keeps the impl alive
    std::vector<double> flow;
  };
  std::unordered_map<const TensorImpl *, Entry> entries_;
};

// Tape of operation records in insertion order. backward() replays them in
// reverse exactly once, then folds the flowing gradients into persistent
// grad buffers, filtered by the allowed parameter groups.
class Graph {
 public:
  using BackwardFn = std::function<void(GradStore &)>;

  // Registers a custom node. `fn` is invoked during backward with the
  // output's flow already populated.
  Tensor record(const Tensor &output, BackwardFn fn);

  // x:[B,I] w:[I,O] b:[O] -> [B,O]
  Tensor affine(const Tensor &x, const Tensor &w, const Tensor &b);
  // x:[B,C,H,W] kernel:[F,C,kh,kw], valid padding -> [B,F,H',W']
  Tensor conv2d(const Tensor &x, const Tensor &kernel, int stride);
  Tensor conv2d(const Tensor &x, const Tensor &kernel, const Tensor &bias,
                int stride);
  // x:[B,C,H,W] kernel:[C,F,kh,kw] -> [B,F,(H-1)s+kh,(W-1)s+kw]
  Tensor conv_transpose2d(const Tensor &x, const Tensor &kernel,
                          const Tensor &bias, int stride);
  Tensor relu(const Tensor &x);
  Tensor tanh(const Tensor &x);
  // a:[B,D1] b:[B,D2] -> [B,D1+D2], rows are [a_row || b_row]
  Tensor concat(const Tensor &a, const Tensor &b);
  // Value-identical tensor with no backward edge.
  Tensor detach(const Tensor &x);
  Tensor reshape(const Tensor &x, std::vector<int> shape);
  // x:[B,C,H,W] -> [B,C,h,w]; crops or zero-pads bottom/right per axis.
  Tensor crop_pad2d(const Tensor &x, int h, int w);
  // x:[B,C,W] -> [B,C,t,W]; repeats along a new time axis.
  Tensor tile_time(const Tensor &x, int t);
  // x:[B,T,F] -> [B,F]; mean over the frame axis.
  Tensor time_mean_pool(const Tensor &x);
  // x:[B,C,H,W] -> [B,C*W]; mean over H (time), flattened.
  Tensor channel_time_pool(const Tensor &x);
  Tensor add(const Tensor &a, const Tensor &b);
  Tensor scale(const Tensor &x, double c);
  // Sum of all elements -> scalar [1].
  Tensor sum(const Tensor &x);

  void backward(const Tensor &root) { backward(root, GroupSet::all()); }
  void backward(const Tensor &root, const GroupSet &allowed);

  size_t num_records() const { return records_.size(); }

 private:
  struct Record {
    Tensor output;
    BackwardFn fn;
  };
  std::vector<Record> records_;
};

}  // namespace autodiff
}  // namespace aldr

#endif  // ALDR_TENSOR_H_
