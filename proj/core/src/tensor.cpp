#include "edr/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <utility>

#include "edr/error.hpp"

namespace edr {

namespace {

std::size_t checked_numel(const std::vector<std::size_t>& dims) {
  std::size_t n = 1;
  for (std::size_t e : dims) {
    if (e == 0) throw ShapeError("tensor extents must be >= 1");
    if (n > std::numeric_limits<std::size_t>::max() / e) throw ShapeError("tensor element count overflows");
    n *= e;
  }
  if (n > static_cast<std::size_t>(std::numeric_limits<Eigen::Index>::max()))
    throw ShapeError("tensor element count overflows");
  return n;
}

std::size_t prod(const std::vector<std::size_t>& dims, std::size_t from, std::size_t to) {
  std::size_t n = 1;
  for (std::size_t k = from; k < to; ++k) n *= dims[k];
  return n;
}

void check_split(const Tensor& x, std::size_t j) {
  if (j < 1 || j >= x.order())
    throw RangeError("split point " + std::to_string(j) + " invalid for order " + std::to_string(x.order()));
}

}  // namespace

Shape::Shape(std::initializer_list<std::size_t> dims) : Shape(std::vector<std::size_t>(dims)) {}

Shape::Shape(std::vector<std::size_t> dims) : dims_(std::move(dims)), numel_(checked_numel(dims_)) {}

Shape Shape::head(std::size_t count) const {
  if (count > dims_.size()) throw RangeError("Shape::head past order");
  return Shape(std::vector<std::size_t>(dims_.begin(), dims_.begin() + static_cast<std::ptrdiff_t>(count)));
}

Shape Shape::tail(std::size_t from) const {
  if (from > dims_.size()) throw RangeError("Shape::tail past order");
  return Shape(std::vector<std::size_t>(dims_.begin() + static_cast<std::ptrdiff_t>(from), dims_.end()));
}

Shape Shape::concat(const Shape& other) const {
  std::vector<std::size_t> d = dims_;
  d.insert(d.end(), other.dims_.begin(), other.dims_.end());
  return Shape(std::move(d));
}

Shape Shape::with_extent(std::size_t pos, std::size_t extent) const {
  if (pos >= dims_.size()) throw RangeError("Shape::with_extent past order");
  std::vector<std::size_t> d = dims_;
  d[pos] = extent;
  return Shape(std::move(d));
}

std::string Shape::str() const {
  std::ostringstream os;
  os << '(';
  for (std::size_t k = 0; k < dims_.size(); ++k) os << (k ? "," : "") << dims_[k];
  os << ')';
  return os.str();
}

Tensor::Tensor(Shape shape) : shape_(std::move(shape)), data_(shape_.numel(), 0.0) {}

Tensor::Tensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data)) {
  if (data_.size() != shape_.numel())
    throw ShapeError("data length " + std::to_string(data_.size()) + " does not match shape " + shape_.str());
}

double Tensor::at(std::span<const std::size_t> index) const { return data_[ivec(index, shape_) - 1]; }
double& Tensor::at(std::span<const std::size_t> index) { return data_[ivec(index, shape_) - 1]; }
double Tensor::at(std::initializer_list<std::size_t> index) const {
  return at(std::span<const std::size_t>(index.begin(), index.size()));
}
double& Tensor::at(std::initializer_list<std::size_t> index) {
  return at(std::span<const std::size_t>(index.begin(), index.size()));
}

ConstMatrixMap Tensor::matrix(std::size_t split) const {
  if (split > order()) throw RangeError("split point past order");
  auto r = static_cast<Eigen::Index>(prod(shape_.dims(), 0, split));
  auto c = static_cast<Eigen::Index>(prod(shape_.dims(), split, order()));
  return ConstMatrixMap(data_.data(), r, c);
}

MatrixMap Tensor::matrix(std::size_t split) {
  if (split > order()) throw RangeError("split point past order");
  auto r = static_cast<Eigen::Index>(prod(shape_.dims(), 0, split));
  auto c = static_cast<Eigen::Index>(prod(shape_.dims(), split, order()));
  return MatrixMap(data_.data(), r, c);
}

Tensor Tensor::reshaped(Shape shape) const& { return Tensor(std::move(shape), data_); }

Tensor Tensor::reshaped(Shape shape) && { return Tensor(std::move(shape), std::move(data_)); }

std::size_t ivec(std::span<const std::size_t> index, const Shape& shape) {
  if (index.size() != shape.order())
    throw RangeError("multi-index has " + std::to_string(index.size()) + " entries for order " +
                     std::to_string(shape.order()));
  std::size_t lin = 0;
  std::size_t stride = 1;
  for (std::size_t k = 0; k < index.size(); ++k) {
    if (index[k] < 1 || index[k] > shape[k])
      throw RangeError("index " + std::to_string(index[k]) + " out of bounds at mode " + std::to_string(k + 1));
    lin += (index[k] - 1) * stride;
    stride *= shape[k];
  }
  return lin + 1;
}

std::size_t ivec(std::initializer_list<std::size_t> index, const Shape& shape) {
  return ivec(std::span<const std::size_t>(index.begin(), index.size()), shape);
}

Matrix unfold(const Tensor& x, SplitSpec split) {
  check_split(x, split.j);
  return x.matrix(split.j);
}

Tensor fold(const Matrix& a, const Shape& shape, SplitSpec split) {
  if (split.j < 1 || split.j >= shape.order()) throw RangeError("split point invalid for fold");
  auto r = prod(shape.dims(), 0, split.j);
  auto c = prod(shape.dims(), split.j, shape.order());
  if (static_cast<std::size_t>(a.rows()) != r || static_cast<std::size_t>(a.cols()) != c)
    throw ShapeError("matrix of size " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                     " cannot fold into " + shape.str());
  return Tensor(shape, std::vector<double>(a.data(), a.data() + a.size()));
}

Tensor einstein_product(const Tensor& a, const Tensor& b, std::size_t n) {
  if (n > a.order() || n > b.order()) throw ShapeError("contraction count exceeds operand order");
  std::size_t ka = a.order() - n;
  for (std::size_t k = 0; k < n; ++k)
    if (a.extent(ka + k) != b.extent(k))
      throw ShapeError("contracted modes differ: " + a.shape().str() + " vs " + b.shape().str());
  Tensor c(a.shape().head(ka).concat(b.shape().tail(n)));
  c.matrix(ka).noalias() = a.matrix(ka) * b.matrix(n);
  return c;
}

Tensor m_mode_product(const Tensor& x, const Matrix& u, std::size_t mode) {
  if (mode < 1 || mode > x.order()) throw RangeError("mode " + std::to_string(mode) + " out of range");
  std::size_t m = mode - 1;
  if (static_cast<std::size_t>(u.cols()) != x.extent(m))
    throw ShapeError("m-mode product: U has " + std::to_string(u.cols()) + " columns, mode extent is " +
                     std::to_string(x.extent(m)));
  const auto& dims = x.shape().dims();
  auto left = static_cast<Eigen::Index>(prod(dims, 0, m));
  auto right = prod(dims, m + 1, dims.size());
  auto im = static_cast<Eigen::Index>(x.extent(m));
  auto j = u.rows();
  Tensor y(x.shape().with_extent(m, static_cast<std::size_t>(j)));
  // Each right-slab is a left x I_m matrix; the product acts on its columns.
  for (std::size_t s = 0; s < right; ++s) {
    ConstMatrixMap xs(x.data().data() + s * static_cast<std::size_t>(left * im), left, im);
    MatrixMap ys(y.data().data() + s * static_cast<std::size_t>(left * j), left, j);
    ys.noalias() = xs * u.transpose();
  }
  return y;
}

Tensor block_transpose(const Tensor& a, std::size_t n) {
  if (n > a.order()) throw RangeError("block transpose: row group larger than order");
  Tensor t(a.shape().tail(n).concat(a.shape().head(n)));
  t.matrix(a.order() - n) = a.matrix(n).transpose();
  return t;
}

double inner(const Tensor& x, const Tensor& y) {
  if (!(x.shape() == y.shape())) throw ShapeError("inner: shapes " + x.shape().str() + " and " + y.shape().str());
  return x.matrix(0).cwiseProduct(y.matrix(0)).sum();
}

double frob_norm(const Tensor& x) { return x.matrix(0).norm(); }

double trace(const Tensor& a) {
  if (a.order() % 2 != 0) throw ShapeError("trace needs an even-order tensor");
  std::size_t n = a.order() / 2;
  for (std::size_t k = 0; k < n; ++k)
    if (a.extent(k) != a.extent(n + k)) throw ShapeError("trace needs a square tensor, got " + a.shape().str());
  return a.matrix(n).trace();
}

Tensor identity_tensor(const Shape& shape) {
  Tensor t(shape.concat(shape));
  t.matrix(shape.order()).setIdentity();
  return t;
}

Tensor diag_tensor(const Tensor& values) {
  Tensor t(values.shape().concat(values.shape()));
  auto m = t.matrix(values.order());
  for (std::size_t i = 0; i < values.size(); ++i) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = values[i];
  return t;
}

Tensor fix_mode(const Tensor& x, std::size_t mode, std::size_t index) {
  if (mode < 1 || mode > x.order()) throw RangeError("mode " + std::to_string(mode) + " out of range");
  std::size_t m = mode - 1;
  if (index < 1 || index > x.extent(m)) throw RangeError("index " + std::to_string(index) + " out of range");
  const auto& dims = x.shape().dims();
  std::size_t left = prod(dims, 0, m);
  std::size_t right = prod(dims, m + 1, dims.size());
  std::vector<std::size_t> nd;
  for (std::size_t k = 0; k < dims.size(); ++k)
    if (k != m) nd.push_back(dims[k]);
  Tensor y{Shape(nd)};
  std::size_t im = dims[m];
  for (std::size_t s = 0; s < right; ++s)
    for (std::size_t l = 0; l < left; ++l) y[s * left + l] = x[(s * im + index - 1) * left + l];
  return y;
}

Tensor frontal_slice(const Tensor& x, std::size_t i) {
  if (x.order() == 0) throw RangeError("frontal slice of a scalar");
  return fix_mode(x, x.order(), i);
}

Tensor gather_frontal(const Tensor& x, std::span<const std::size_t> indices) {
  if (x.order() == 0) throw RangeError("gather on a scalar");
  std::size_t last = x.order() - 1;
  std::size_t block = x.shape().head(last).numel();
  if (indices.empty()) throw RangeError("gather with no indices");
  Tensor y(x.shape().with_extent(last, indices.size()));
  auto src = x.data();
  auto dst = y.data();
  for (std::size_t k = 0; k < indices.size(); ++k) {
    if (indices[k] >= x.extent(last)) throw RangeError("sample index " + std::to_string(indices[k]) + " out of range");
    std::copy_n(src.begin() + static_cast<std::ptrdiff_t>(indices[k] * block), block,
                dst.begin() + static_cast<std::ptrdiff_t>(k * block));
  }
  return y;
}

Tensor concat_frontal(const Tensor& a, const Tensor& b) {
  if (a.order() == 0 || a.order() != b.order()) throw ShapeError("concat: order mismatch");
  std::size_t last = a.order() - 1;
  if (!(a.shape().head(last) == b.shape().head(last)))
    throw ShapeError("concat: leading extents differ: " + a.shape().str() + " vs " + b.shape().str());
  std::vector<double> data(a.data().begin(), a.data().end());
  data.insert(data.end(), b.data().begin(), b.data().end());
  return Tensor(a.shape().with_extent(last, a.extent(last) + b.extent(last)), std::move(data));
}

Tensor stack(std::span<const Tensor> parts) {
  if (parts.empty()) throw RangeError("stack of nothing");
  const Shape& s = parts.front().shape();
  std::vector<double> data;
  data.reserve(s.numel() * parts.size());
  for (const Tensor& p : parts) {
    if (!(p.shape() == s)) throw ShapeError("stack: shapes differ");
    data.insert(data.end(), p.data().begin(), p.data().end());
  }
  return Tensor(s.concat(Shape{parts.size()}), std::move(data));
}

}  // namespace edr
