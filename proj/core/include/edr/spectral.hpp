#pragma once

// Dense symmetric eigensolvers, E-SVD and eigenpair selection.
//
// Every returned eigenvector is sign-normalised: its largest-magnitude entry
// is positive (first such entry on exact ties).

#include <cstddef>

#include "edr/tensor.hpp"

namespace edr {

struct EigResult {
  Vector values;   // ascending
  Matrix vectors;  // column i pairs with values(i)
};

enum class Side { smallest, largest };

struct SelectSpec {
  std::size_t d = 1;
  Side side = Side::smallest;
  bool skip_first = false;
};

/// Full spectrum of a symmetric matrix. The input is symmetrised by
/// averaging with its transpose first.
EigResult sym_eig(const Matrix& a);

/// A v = lambda B v with B-orthonormal vectors, via Cholesky reduction.
/// When lambda_min(B) < ridge * tr(B)/n the same amount is added to the
/// diagonal of B before factorising.
EigResult gen_sym_eig(const Matrix& a, const Matrix& b, double ridge = 1e-10);

/// Smallest eigenvalue of a symmetric matrix.
double min_eigenvalue(const Matrix& a);

enum class SvdMode { thin, full };

struct ESvd {
  Tensor u;  // head(j) x r
  Vector s;  // descending
  Tensor v;  // tail(j) x r
};

/// Einstein SVD of X with respect to the split j; U and V carry the
/// singular tensors along their trailing mode.
ESvd esvd(const Tensor& x, SplitSpec split, SvdMode mode = SvdMode::thin);

/// Pick d eigenpairs from one end of the spectrum. With `largest` the
/// result is ordered by decreasing eigenvalue.
EigResult select(const EigResult& res, const SelectSpec& spec);

/// Orthonormal basis of the column space of X; singular directions with
/// sigma <= tol * sigma_max are dropped. A zero matrix gives zero columns.
Matrix range_basis(const Matrix& x, double tol = 1e-10);

/// Flip each column so its largest-magnitude entry is positive.
void normalize_signs(Matrix& v);

}  // namespace edr
