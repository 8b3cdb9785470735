// Copyright 2026 The cmgan Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CMGAN_NN_TENSOR_HPP_
#define CMGAN_NN_TENSOR_HPP_

#include <Eigen/Dense>

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace cmgan {

using Index = Eigen::Index;
using Shape = std::vector<Index>;

template <typename Scalar>
using RowMatrix =
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename Scalar>
using MatrixMap = Eigen::Map<RowMatrix<Scalar>>;
template <typename Scalar>
using ConstMatrixMap = Eigen::Map<const RowMatrix<Scalar>>;
template <typename Scalar>
using VectorMap = Eigen::Map<Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>;
template <typename Scalar>
using ConstVectorMap = Eigen::Map<const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>;

inline Index shape_size(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), Index{1},
                         std::multiplies<>());
}

inline std::string to_string(const Shape& shape) {
  std::ostringstream os;
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << "x";
    os << shape[i];
  }
  return os.str();
}

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Dense row-major n-dimensional array. Activations use channel-last layout
// (B x T x F x C), so the trailing axis is always contiguous and any tensor
// can be viewed as a (positions x channels) matrix.
template <typename Scalar>
class Tensor {
 public:
  using value_type = Scalar;

  Tensor() = default;
  explicit Tensor(Shape shape, Scalar fill = Scalar(0))
      : shape_(std::move(shape)),
        data_(static_cast<std::size_t>(shape_size(shape_)), fill) {
    for (Index d : shape_)
      if (d < 0) throw ShapeError("negative tensor dimension");
  }

  static Tensor zeros_like(const Tensor& other) { return Tensor(other.shape_); }

  const Shape& shape() const { return shape_; }
  Index rank() const { return static_cast<Index>(shape_.size()); }
  Index dim(Index axis) const {
    if (axis < 0) axis += rank();
    return shape_.at(static_cast<std::size_t>(axis));
  }
  Index size() const { return static_cast<Index>(data_.size()); }
  bool empty() const { return data_.empty(); }

  Scalar* data() { return data_.data(); }
  const Scalar* data() const { return data_.data(); }
  Scalar& operator[](Index i) { return data_[static_cast<std::size_t>(i)]; }
  const Scalar& operator[](Index i) const {
    return data_[static_cast<std::size_t>(i)];
  }

  template <typename... Ix>
  Scalar& operator()(Ix... ix) {
    return data_[static_cast<std::size_t>(offset({static_cast<Index>(ix)...}))];
  }
  template <typename... Ix>
  const Scalar& operator()(Ix... ix) const {
    return data_[static_cast<std::size_t>(offset({static_cast<Index>(ix)...}))];
  }

  // (size / last_dim) x last_dim view.
  MatrixMap<Scalar> matrix() {
    const Index cols = rank() ? shape_.back() : 1;
    return MatrixMap<Scalar>(data(), cols ? size() / cols : 0, cols);
  }
  ConstMatrixMap<Scalar> matrix() const {
    const Index cols = rank() ? shape_.back() : 1;
    return ConstMatrixMap<Scalar>(data(), cols ? size() / cols : 0, cols);
  }
  VectorMap<Scalar> flat() { return VectorMap<Scalar>(data(), size()); }
  ConstVectorMap<Scalar> flat() const {
    return ConstVectorMap<Scalar>(data(), size());
  }

  Tensor& reshape(Shape shape) {
    if (shape_size(shape) != size())
      throw ShapeError("cannot reshape " + to_string(shape_) + " to " +
                       to_string(shape));
    shape_ = std::move(shape);
    return *this;
  }
  Tensor reshaped(Shape shape) const& {
    Tensor out = *this;
    out.reshape(std::move(shape));
    return out;
  }
  Tensor reshaped(Shape shape) && {
    reshape(std::move(shape));
    return std::move(*this);
  }

  void set_zero() { std::fill(data_.begin(), data_.end(), Scalar(0)); }

  template <typename To>
  Tensor<To> cast() const {
    Tensor<To> out(shape_);
    std::transform(data_.begin(), data_.end(), out.data(),
                   [](Scalar v) { return static_cast<To>(v); });
    return out;
  }

  bool operator==(const Tensor& other) const = default;

 private:
  Index offset(std::initializer_list<Index> ix) const {
    Index off = 0;
    std::size_t axis = 0;
    for (Index i : ix) off = off * shape_[axis++] + i;
    return off;
  }

  Shape shape_;
  std::vector<Scalar, Eigen::aligned_allocator<Scalar>> data_;
};

template <typename Scalar>
void require_shape(const Tensor<Scalar>& t, const Shape& expected,
                   const char* what) {
  if (t.shape() != expected)
    throw ShapeError(std::string(what) + ": expected shape " +
                     to_string(expected) + ", got " + to_string(t.shape()));
}

template <typename Scalar>
void require_rank(const Tensor<Scalar>& t, Index rank, const char* what) {
  if (t.rank() != rank)
    throw ShapeError(std::string(what) + ": expected rank " +
                     std::to_string(rank) + ", got shape " +
                     to_string(t.shape()));
}

// Swaps axes 1 and 2 of a rank-4 tensor: B x T x F x C -> B x F x T x C.
template <typename Scalar>
Tensor<Scalar> swap_middle_axes(const Tensor<Scalar>& x) {
  require_rank(x, 4, "swap_middle_axes");
  const Index b = x.dim(0), n1 = x.dim(1), n2 = x.dim(2), c = x.dim(3);
  Tensor<Scalar> y({b, n2, n1, c});
  for (Index i = 0; i < b; ++i)
    for (Index j = 0; j < n1; ++j)
      for (Index k = 0; k < n2; ++k) {
        const Scalar* src = x.data() + ((i * n1 + j) * n2 + k) * c;
        std::copy(src, src + c, y.data() + ((i * n2 + k) * n1 + j) * c);
      }
  return y;
}

// Channel-axis concatenation of equally shaped (except last axis) tensors.
template <typename Scalar>
Tensor<Scalar> concat_channels(const std::vector<const Tensor<Scalar>*>& parts) {
  if (parts.empty()) throw ShapeError("concat_channels: no inputs");
  Shape shape = parts.front()->shape();
  Index total = 0;
  for (const auto* p : parts) {
    Shape lead = p->shape();
    lead.back() = shape.back();
    if (lead != shape) throw ShapeError("concat_channels: shape mismatch");
    total += p->dim(-1);
  }
  shape.back() = total;
  Tensor<Scalar> out(shape);
  auto dst = out.matrix();
  Index col = 0;
  for (const auto* p : parts) {
    dst.middleCols(col, p->dim(-1)) = p->matrix();
    col += p->dim(-1);
  }
  return out;
}

// Splits the channel axis at `widths`; inverse of concat_channels.
template <typename Scalar>
std::vector<Tensor<Scalar>> split_channels(const Tensor<Scalar>& x,
                                           const std::vector<Index>& widths) {
  std::vector<Tensor<Scalar>> out;
  Index col = 0;
  for (Index w : widths) {
    Shape s = x.shape();
    s.back() = w;
    Tensor<Scalar> part(s);
    part.matrix() = x.matrix().middleCols(col, w);
    out.push_back(std::move(part));
    col += w;
  }
  if (col != x.dim(-1)) throw ShapeError("split_channels: widths mismatch");
  return out;
}

}  // namespace cmgan

#endif  // CMGAN_NN_TENSOR_HPP_
