#pragma once

// Dense N-order tensors and the Einstein-product algebra.
//
// Storage follows the ivec order (first index fastest), which is also
// Eigen's column-major layout. Unfolding a tensor with split j is therefore
// a zero-copy reinterpretation of the buffer as a matrix whose rows index
// the first j modes and whose columns index the remaining ones.
//
// Multi-indices, modes and frontal-slice indices are 1-based, matching the
// usual tensor notation. Sample index lists (gather) are 0-based.

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace edr {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using MatrixMap = Eigen::Map<Matrix>;
using ConstMatrixMap = Eigen::Map<const Matrix>;

class Shape {
 public:
  Shape() = default;
  Shape(std::initializer_list<std::size_t> dims);
  explicit Shape(std::vector<std::size_t> dims);

  std::size_t order() const noexcept { return dims_.size(); }
  std::size_t operator[](std::size_t k) const { return dims_[k]; }
  const std::vector<std::size_t>& dims() const noexcept { return dims_; }

  /// Product of extents; 1 for the order-0 (scalar) shape.
  std::size_t numel() const noexcept { return numel_; }

  /// First `count` modes.
  Shape head(std::size_t count) const;
  /// Modes `from` .. order-1 (0-based position).
  Shape tail(std::size_t from) const;
  Shape concat(const Shape& other) const;
  Shape with_extent(std::size_t pos, std::size_t extent) const;

  std::string str() const;

  friend bool operator==(const Shape& a, const Shape& b) { return a.dims_ == b.dims_; }

 private:
  std::vector<std::size_t> dims_;
  std::size_t numel_ = 1;
};

/// Split point j for the unfolding Psi_j: the first j modes become rows.
struct SplitSpec {
  std::size_t j;
};

class Tensor {
 public:
  Tensor() : Tensor(Shape{}) {}
  explicit Tensor(Shape shape);
  Tensor(Shape shape, std::vector<double> data);

  const Shape& shape() const noexcept { return shape_; }
  std::size_t order() const noexcept { return shape_.order(); }
  std::size_t size() const noexcept { return data_.size(); }
  std::size_t extent(std::size_t k) const { return shape_[k]; }

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }

  double operator[](std::size_t flat) const { return data_[flat]; }
  double& operator[](std::size_t flat) { return data_[flat]; }

  /// Element access by 1-based multi-index, bounds checked.
  double at(std::span<const std::size_t> index) const;
  double& at(std::span<const std::size_t> index);
  double at(std::initializer_list<std::size_t> index) const;
  double& at(std::initializer_list<std::size_t> index);

  /// Zero-copy view of Psi_split. `split` may range over 0..order.
  ConstMatrixMap matrix(std::size_t split) const;
  MatrixMap matrix(std::size_t split);

  /// Same data, new shape with equal element count.
  Tensor reshaped(Shape shape) const&;
  Tensor reshaped(Shape shape) &&;

 private:
  Shape shape_;
  std::vector<double> data_;
};

/// 1-based linear index of a 1-based multi-index.
std::size_t ivec(std::span<const std::size_t> index, const Shape& shape);
std::size_t ivec(std::initializer_list<std::size_t> index, const Shape& shape);

Matrix unfold(const Tensor& x, SplitSpec split);
Tensor fold(const Matrix& a, const Shape& shape, SplitSpec split);

/// Contract the last `n` modes of `a` with the first `n` modes of `b`.
Tensor einstein_product(const Tensor& a, const Tensor& b, std::size_t n);

/// X x_m U, with `mode` 1-based and U of size J x I_m.
Tensor m_mode_product(const Tensor& x, const Matrix& u, std::size_t mode);

/// Swap the leading `n` modes with the trailing ones.
Tensor block_transpose(const Tensor& a, std::size_t n);

double inner(const Tensor& x, const Tensor& y);
double frob_norm(const Tensor& x);
/// Trace of a square tensor of order 2N.
double trace(const Tensor& a);

/// Identity of shape I x I.
Tensor identity_tensor(const Shape& shape);
/// Diagonal tensor of shape S x S carrying `values` (shape S) on its diagonal.
Tensor diag_tensor(const Tensor& values);

/// Tensor with mode `mode` fixed at `index` (both 1-based); order drops by one.
Tensor fix_mode(const Tensor& x, std::size_t mode, std::size_t index);
/// X(:, ..., :, i) with i 1-based.
Tensor frontal_slice(const Tensor& x, std::size_t i);

/// Frontal slices listed in `indices` (0-based), in that order.
Tensor gather_frontal(const Tensor& x, std::span<const std::size_t> indices);
/// Concatenate along the last mode; leading extents must match.
Tensor concat_frontal(const Tensor& a, const Tensor& b);
/// Stack equally shaped tensors along a new trailing mode.
Tensor stack(std::span<const Tensor> parts);

}  // namespace edr
