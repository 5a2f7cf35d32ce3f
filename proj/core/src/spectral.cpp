#include "edr/spectral.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include "edr/error.hpp"

namespace edr {

namespace {

void require_square(const Matrix& a, const char* what) {
  if (a.rows() != a.cols())
    throw ShapeError(std::string(what) + ": matrix is " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()));
}

}  // namespace

void normalize_signs(Matrix& v) {
  for (Eigen::Index j = 0; j < v.cols(); ++j) {
    Eigen::Index at = 0;
    double best = -1.0;
    for (Eigen::Index i = 0; i < v.rows(); ++i) {
      double m = std::abs(v(i, j));
      if (m > best) {
        best = m;
        at = i;
      }
    }
    if (v.rows() > 0 && v(at, j) < 0.0) v.col(j) = -v.col(j);
  }
}

EigResult sym_eig(const Matrix& a) {
  require_square(a, "sym_eig");
  if (a.rows() == 0) return {Vector(0), Matrix(0, 0)};
  Matrix s = (a + a.transpose()) * 0.5;
  Eigen::SelfAdjointEigenSolver<Matrix> es(s);
  if (es.info() != Eigen::Success) throw NumericalError("symmetric eigensolver did not converge");
  EigResult r{es.eigenvalues(), es.eigenvectors()};
  normalize_signs(r.vectors);
  return r;
}

double min_eigenvalue(const Matrix& a) {
  require_square(a, "min_eigenvalue");
  Matrix s = (a + a.transpose()) * 0.5;
  Eigen::SelfAdjointEigenSolver<Matrix> es(s, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("symmetric eigensolver did not converge");
  return es.eigenvalues()(0);
}

EigResult gen_sym_eig(const Matrix& a, const Matrix& b, double ridge) {
  require_square(a, "gen_sym_eig");
  require_square(b, "gen_sym_eig");
  if (a.rows() != b.rows()) throw ShapeError("gen_sym_eig: A and B differ in size");
  const Eigen::Index n = a.rows();
  if (n == 0) return {Vector(0), Matrix(0, 0)};

  Matrix bs = (b + b.transpose()) * 0.5;
  double scale = bs.trace() / static_cast<double>(n);
  if (!(scale > 0.0)) throw DefinitenessError("right-hand matrix has non-positive trace");
  double floor = ridge * scale;
  if (min_eigenvalue(bs) < floor) bs.diagonal().array() += floor;

  Eigen::LLT<Matrix> llt(bs);
  if (llt.info() != Eigen::Success) throw DefinitenessError("right-hand matrix is not positive definite after ridge");

  // C = R^{-T} A R^{-1} with B = R^T R, R = L^T.
  Matrix c = (a + a.transpose()) * 0.5;
  llt.matrixL().solveInPlace(c);
  c.transposeInPlace();
  llt.matrixL().solveInPlace(c);
  c = (c + c.transpose()) * 0.5;

  Eigen::SelfAdjointEigenSolver<Matrix> es(c);
  if (es.info() != Eigen::Success) throw NumericalError("generalized eigensolver did not converge");
  Matrix v = es.eigenvectors();
  llt.matrixU().solveInPlace(v);
  normalize_signs(v);
  return {es.eigenvalues(), std::move(v)};
}

ESvd esvd(const Tensor& x, SplitSpec split, SvdMode mode) {
  if (split.j < 1 || split.j >= x.order()) throw RangeError("esvd: invalid split point");
  auto a = x.matrix(split.j);
  unsigned opts = mode == SvdMode::thin ? (Eigen::ComputeThinU | Eigen::ComputeThinV)
                                        : (Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::BDCSVD<Matrix> svd(a, opts);
  Matrix u = svd.matrixU();
  Matrix v = svd.matrixV();
  const Shape& s = x.shape();
  Tensor tu(s.head(split.j).concat(Shape{static_cast<std::size_t>(u.cols())}));
  Tensor tv(s.tail(split.j).concat(Shape{static_cast<std::size_t>(v.cols())}));
  tu.matrix(split.j) = u;
  tv.matrix(s.order() - split.j) = v;
  return {std::move(tu), svd.singularValues(), std::move(tv)};
}

EigResult select(const EigResult& res, const SelectSpec& spec) {
  const auto avail = static_cast<std::size_t>(res.values.size());
  const std::size_t skip = spec.skip_first ? 1 : 0;
  if (spec.d < 1) throw RangeError("select: d must be >= 1");
  if (spec.d + skip > avail)
    throw RankError("requested " + std::to_string(spec.d) + (skip ? " (+1 skipped)" : "") + " eigenpairs, only " +
                    std::to_string(avail) + " available");
  const auto d = static_cast<Eigen::Index>(spec.d);
  EigResult out{Vector(d), Matrix(res.vectors.rows(), d)};
  for (Eigen::Index k = 0; k < d; ++k) {
    Eigen::Index src = spec.side == Side::smallest ? k + static_cast<Eigen::Index>(skip)
                                                   : static_cast<Eigen::Index>(avail - 1 - skip) - k;
    out.values(k) = res.values(src);
    out.vectors.col(k) = res.vectors.col(src);
  }
  return out;
}

Matrix range_basis(const Matrix& x, double tol) {
  const Eigen::Index m = x.rows(), n = x.cols();
  if (m == 0 || n == 0) return Matrix(m, 0);
  // Tall inputs are compressed by QR first so the SVD runs on an n x n core.
  Matrix q_left;
  Matrix core;
  if (m > n) {
    Eigen::HouseholderQR<Matrix> qr(x);
    q_left = qr.householderQ() * Matrix::Identity(m, n);
    core = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();
  } else {
    core = x;
  }
  Eigen::BDCSVD<Matrix> svd(core, Eigen::ComputeThinU);
  const Vector& s = svd.singularValues();
  if (s.size() == 0 || !(s(0) > 0.0)) return Matrix(m, 0);
  Eigen::Index r = 0;
  while (r < s.size() && s(r) > tol * s(0)) ++r;
  Matrix u = svd.matrixU().leftCols(r);
  Matrix q = m > n ? Matrix(q_left * u) : u;
  normalize_signs(q);
  return q;
}

}  // namespace edr
