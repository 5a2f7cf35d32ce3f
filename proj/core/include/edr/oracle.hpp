#pragma once

// Reference implementations on plain matrices, used to check the tensor
// code paths. These are written for clarity, not speed.

#include <cstddef>
#include <limits>
#include <string>

#include "edr/pipeline.hpp"
#include "edr/tensor.hpp"

namespace edr::oracle {

struct MatrixOptions {
  bool skip_first = false;  // linear methods; le/lle always skip the trivial pair
  double restrict_tol = 1e-10;
};

struct MatrixResult {
  std::string method;
  Matrix basis;       // features x d for linear methods, empty for le/lle
  Matrix embedding;   // d x n
  Vector eigenvalues;
  double residual = 0.0;  // max eigen-residual of the solved problem
};

/// Classical method on a features x n data matrix.
///   pca   largest left singular vectors of X H
///   olpp  smallest eigenvectors of X L X^T
///   onpp  smallest eigenvectors of X M X^T, M = (I - W)^T (I - W)
///   lpp   Xh (I - Wh) Xh^T u = lambda Xh Xh^T u, Xh = X D^{1/2}, Wh = D^{-1/2} W D^{-1/2}
///   npp   X M X^T u = lambda X X^T u
///   lle   smallest eigenvectors of M
///   le    L u = lambda D u
/// Linear problems are restricted to the column space of X first.
MatrixResult matrix_method(const std::string& name, const Matrix& x, const Matrix& w, std::size_t d,
                           const MatrixOptions& opt = {});

/// Trace objective of `result` under the method's own operator (for pca the
/// retained variance, otherwise the quantity being minimised).
double objective(const std::string& name, const Matrix& x, const Matrix& w, const MatrixResult& result);

/// Einstein product by literal nested summation. Throws RangeError when the
/// operands and result together exceed one million entries.
Tensor brute_contract(const Tensor& a, const Tensor& b, std::size_t n);

struct OracleReport {
  std::string id;
  double subspace_distance = 0.0;
  double embedding_distance = 0.0;  // largest per-sample gap after Procrustes alignment
  double ir_delta = 0.0;
  double residual = 0.0;
};

struct Output {
  Matrix basis;      // may be empty
  Matrix embedding;  // d x n
  double ir = std::numeric_limits<double>::quiet_NaN();
  double residual = 0.0;
};

/// Compares two results for the same data and configuration. Subspaces come
/// from the bases when both have one, otherwise from the embedding rows.
OracleReport compare(const std::string& id, const Output& first, const Output& second);

/// |P1 P1^T - P2 P2^T|_F after orthonormalising the columns of each.
double subspace_distance(const Matrix& p1, const Matrix& p2);

/// Largest column gap |R Y1 - Y2| over samples, R the best orthogonal map.
double procrustes_distance(const Matrix& y1, const Matrix& y2);

/// Fits `m` (pca, olpp, onpp, lpp, npp, le or lle, single weight) on the
/// training set both through the tensor pipeline and through the matrix
/// reference on the same weight graph, classifies `test` with each, and
/// compares. Out-of-sample coordinates on the reference side are computed
/// from the reference spectrum.
OracleReport check_method(const MethodConfig& m, const DataSet& train, const DataSet& test, std::size_t d);

}  // namespace edr::oracle
