#include "edr/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "edr/error.hpp"

namespace edr::oracle {

namespace {

struct Pairs {
  Vector values;
  Matrix vectors;
};

// Ascending eigenpairs picked by position.
Pairs pick(const Vector& values, const Matrix& vectors, std::size_t first, std::size_t d, bool largest) {
  const auto n = static_cast<std::size_t>(values.size());
  if (first + d > n)
    throw RankError("oracle: need " + std::to_string(first + d) + " eigenpairs, problem has " + std::to_string(n));
  Pairs p{Vector(static_cast<Eigen::Index>(d)), Matrix(vectors.rows(), static_cast<Eigen::Index>(d))};
  for (std::size_t j = 0; j < d; ++j) {
    const auto src = static_cast<Eigen::Index>(largest ? n - 1 - first - j : first + j);
    p.values(static_cast<Eigen::Index>(j)) = values(src);
    p.vectors.col(static_cast<Eigen::Index>(j)) = vectors.col(src);
  }
  return p;
}

Pairs smallest(const Matrix& a, std::size_t d, bool skip) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (a + a.transpose()));
  return pick(es.eigenvalues(), es.eigenvectors(), skip ? 1 : 0, d, false);
}

Pairs smallest_general(const Matrix& a, const Matrix& b, std::size_t d, bool skip) {
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(0.5 * (a + a.transpose()), 0.5 * (b + b.transpose()));
  if (es.info() != Eigen::Success) throw DefinitenessError("oracle: constraint matrix is not positive definite");
  return pick(es.eigenvalues(), es.eigenvectors(), skip ? 1 : 0, d, false);
}

double residual(const Matrix& a, const Matrix* b, const Pairs& p) {
  double r = 0.0;
  for (Eigen::Index j = 0; j < p.vectors.cols(); ++j) {
    Vector bv = b ? Vector(*b * p.vectors.col(j)) : Vector(p.vectors.col(j));
    r = std::max(r, (a * p.vectors.col(j) - p.values(j) * bv).norm());
  }
  return r;
}

Matrix column_space(const Matrix& x, double tol) {
  Eigen::JacobiSVD<Matrix> svd(x, Eigen::ComputeThinU);
  const Vector& s = svd.singularValues();
  Eigen::Index r = 0;
  while (r < s.size() && s(r) > tol * s(0)) ++r;
  return svd.matrixU().leftCols(r);
}

Matrix laplacian_of(const Matrix& w) {
  Matrix l = -w;
  l.diagonal() += w.rowwise().sum();
  return l;
}

Matrix nbr_operator(const Matrix& w) {
  Matrix e = Matrix::Identity(w.rows(), w.cols()) - w;
  return e.transpose() * e;
}

Matrix orthonormal_columns(const Matrix& p) {
  if (p.cols() == 0) return p;
  Eigen::JacobiSVD<Matrix> svd(p, Eigen::ComputeThinU);
  const Vector& s = svd.singularValues();
  Eigen::Index r = 0;
  while (r < s.size() && s(r) > 1e-12 * std::max(1.0, s(0))) ++r;
  return svd.matrixU().leftCols(r);
}

}  // namespace

MatrixResult matrix_method(const std::string& name, const Matrix& x, const Matrix& w, std::size_t d,
                           const MatrixOptions& opt) {
  const Eigen::Index n = x.cols();
  const bool needs_w = name != "pca";
  if (needs_w && (w.rows() != n || w.cols() != n)) throw ShapeError("oracle: weight matrix must be n x n");
  if (d < 1) throw RangeError("oracle: d must be at least 1");
  MatrixResult out;
  out.method = name;

  if (name == "pca") {
    Matrix xh = x.colwise() - x.rowwise().mean();
    Eigen::JacobiSVD<Matrix> svd(xh, Eigen::ComputeThinU);
    if (static_cast<Eigen::Index>(d) > svd.singularValues().size()) throw RankError("oracle pca: d too large");
    out.basis = svd.matrixU().leftCols(static_cast<Eigen::Index>(d));
    out.eigenvalues = svd.singularValues().head(static_cast<Eigen::Index>(d)).array().square();
    out.embedding = out.basis.transpose() * x;
    Matrix cov = xh * xh.transpose();
    Pairs p{out.eigenvalues, out.basis};
    out.residual = residual(cov, nullptr, p);
    return out;
  }

  if (name == "le" || name == "lle") {
    Pairs p;
    if (name == "le") {
      Matrix dm = w.rowwise().sum().asDiagonal();
      Matrix l = laplacian_of(w);
      p = smallest_general(l, dm, d, true);
      out.residual = residual(l, &dm, p);
    } else {
      Matrix m = nbr_operator(w);
      p = smallest(m, d, true);
      out.residual = residual(m, nullptr, p);
    }
    out.embedding = p.vectors.transpose();
    out.eigenvalues = p.values;
    return out;
  }

  Matrix q = column_space(x, opt.restrict_tol);
  Matrix c = q.transpose() * x;
  Pairs p;
  if (name == "olpp") {
    Matrix a = c * laplacian_of(w) * c.transpose();
    p = smallest(a, d, opt.skip_first);
    out.residual = residual(a, nullptr, p);
  } else if (name == "onpp") {
    Matrix a = c * nbr_operator(w) * c.transpose();
    p = smallest(a, d, opt.skip_first);
    out.residual = residual(a, nullptr, p);
  } else if (name == "lpp") {
    Vector deg = w.rowwise().sum();
    Matrix xh = c * deg.cwiseSqrt().asDiagonal();
    Vector inv = deg.unaryExpr([](double v) { return v > 0.0 ? 1.0 / std::sqrt(v) : 0.0; });
    Matrix wh = inv.asDiagonal() * w * inv.asDiagonal();
    Matrix a = xh * (Matrix::Identity(n, n) - wh) * xh.transpose();
    Matrix b = xh * xh.transpose();
    p = smallest_general(a, b, d, opt.skip_first);
    out.residual = residual(a, &b, p);
  } else if (name == "npp") {
    Matrix a = c * nbr_operator(w) * c.transpose();
    Matrix b = c * c.transpose();
    p = smallest_general(a, b, d, opt.skip_first);
    out.residual = residual(a, &b, p);
  } else {
    throw ConfigError("oracle: unknown method '" + name + "'");
  }
  out.basis = q * p.vectors;
  out.eigenvalues = p.values;
  out.embedding = out.basis.transpose() * x;
  return out;
}

double objective(const std::string& name, const Matrix& x, const Matrix& w, const MatrixResult& r) {
  if (name == "pca") {
    Matrix xh = x.colwise() - x.rowwise().mean();
    return (r.basis.transpose() * xh).squaredNorm();
  }
  if (name == "le") return (r.embedding * laplacian_of(w) * r.embedding.transpose()).trace();
  if (name == "lle") return (r.embedding * nbr_operator(w) * r.embedding.transpose()).trace();
  if (name == "olpp" || name == "lpp") return (r.basis.transpose() * x * laplacian_of(w) * x.transpose() * r.basis).trace();
  if (name == "onpp" || name == "npp") return (r.basis.transpose() * x * nbr_operator(w) * x.transpose() * r.basis).trace();
  throw ConfigError("oracle: unknown method '" + name + "'");
}

Tensor brute_contract(const Tensor& a, const Tensor& b, std::size_t n) {
  if (n > a.order() || n > b.order()) throw RangeError("brute_contract: contraction order exceeds an operand");
  const std::size_t ka = a.order() - n;
  const Shape si = a.shape().head(ka), sk = b.shape().head(n), sj = b.shape().tail(n);
  if (!(a.shape().tail(ka) == sk)) throw ShapeError("brute_contract: contracted extents differ");
  const Shape sc = si.concat(sj);
  if (a.size() + b.size() + sc.numel() > 1000000) throw RangeError("brute_contract: operands too large");

  auto advance = [](std::vector<std::size_t>& idx, const Shape& s) {
    for (std::size_t m = 0; m < idx.size(); ++m) {
      if (++idx[m] <= s[m]) return true;
      idx[m] = 1;
    }
    return false;
  };

  Tensor c(sc);
  std::vector<std::size_t> i(si.order(), 1), j, k, ia, ib, ic;
  do {
    j.assign(sj.order(), 1);
    do {
      double sum = 0.0;
      k.assign(sk.order(), 1);
      do {
        ia = i;
        ia.insert(ia.end(), k.begin(), k.end());
        ib = k;
        ib.insert(ib.end(), j.begin(), j.end());
        sum += a.at(ia) * b.at(ib);
      } while (advance(k, sk));
      ic = i;
      ic.insert(ic.end(), j.begin(), j.end());
      c.at(ic) = sum;
    } while (advance(j, sj));
  } while (advance(i, si));
  return c;
}

double subspace_distance(const Matrix& p1, const Matrix& p2) {
  if (p1.rows() != p2.rows()) throw ShapeError("subspace distance: ambient dimensions differ");
  Matrix q1 = orthonormal_columns(p1), q2 = orthonormal_columns(p2);
  return (q1 * q1.transpose() - q2 * q2.transpose()).norm();
}

double procrustes_distance(const Matrix& y1, const Matrix& y2) {
  if (y1.rows() != y2.rows() || y1.cols() != y2.cols()) throw ShapeError("procrustes: embedding shapes differ");
  if (y1.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(y2 * y1.transpose(), Eigen::ComputeFullU | Eigen::ComputeFullV);
  Matrix r = svd.matrixU() * svd.matrixV().transpose();
  return (r * y1 - y2).colwise().norm().maxCoeff();
}

OracleReport compare(const std::string& id, const Output& first, const Output& second) {
  OracleReport rep;
  rep.id = id;
  if (first.embedding.rows() != second.embedding.rows() || first.embedding.cols() != second.embedding.cols())
    throw ShapeError("compare " + id + ": embeddings have different shapes");
  if (first.basis.size() && second.basis.size())
    rep.subspace_distance = subspace_distance(first.basis, second.basis);
  else
    rep.subspace_distance = subspace_distance(first.embedding.transpose(), second.embedding.transpose());
  rep.embedding_distance = procrustes_distance(first.embedding, second.embedding);
  if (std::isfinite(first.ir) && std::isfinite(second.ir)) rep.ir_delta = std::abs(first.ir - second.ir);
  rep.residual = std::max(first.residual, second.residual);
  return rep;
}

}  // namespace edr::oracle
