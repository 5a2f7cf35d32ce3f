#pragma once

// Linear projections computed directly on tensor samples.
//
// Every method works on the unfolding A = Psi_M(X) (features x n). Before
// solving, A is restricted to its column space: Q = range_basis(A) and the
// reduced coordinates C = Q^T A have full row rank, so the smallest
// eigenpairs are not swamped by the null space of A. Projections are mapped
// back as P = Q V.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "edr/graph.hpp"
#include "edr/tensor.hpp"

namespace edr {

enum class LinearMethod { pca, spca, onpp, olpp, lpp, npp };

std::string to_string(LinearMethod m);
LinearMethod parse_linear_method(const std::string& name);

enum class PcaRoute { automatic, primal, dual };

struct LinearOptions {
  bool skip_first = false;
  double restrict_tol = 1e-10;
  double ridge = 1e-10;
  PcaRoute pca_route = PcaRoute::automatic;
};

struct Reduction {
  Matrix q;  // features x r, orthonormal
  Matrix c;  // r x n
};

/// Column-space restriction of the sample unfolding.
Reduction reduce(const Tensor& x, double tol = 1e-10);

struct ProjectionModel {
  LinearMethod method = LinearMethod::pca;
  Shape feature_shape;
  bool multiweight = false;
  bool skip_first = false;
  // One projection (features x d) or, for multi-weight models, one per
  // slice of the last feature mode (remaining features x d).
  std::vector<Tensor> projections;
  std::vector<Vector> eigenvalues;

  std::size_t d() const;
};

struct Embedding {
  Tensor y;  // d x n, or d x I_M x n for multi-weight models

  std::size_t size() const { return y.extent(y.order() - 1); }
  /// One column per sample; multi-weight coordinates are flattened.
  ConstMatrixMap flat() const { return y.matrix(y.order() - 1); }
};

/// Delta label kernel: K(i,j) = 1 when samples i and j share a class.
Matrix delta_label_kernel(std::span<const int> labels);

ProjectionModel fit_pca(const Tensor& x, std::size_t d, const LinearOptions& opt = {});
ProjectionModel fit_spca(const Tensor& x, const Matrix& label_kernel, std::size_t d, const LinearOptions& opt = {},
                         const Reduction* pre = nullptr);
ProjectionModel fit_onpp(const Tensor& x, const WeightGraph& w, std::size_t d, const LinearOptions& opt = {},
                         const Reduction* pre = nullptr);
ProjectionModel fit_olpp(const Tensor& x, const WeightGraph& w, std::size_t d, const LinearOptions& opt = {},
                         const Reduction* pre = nullptr);
ProjectionModel fit_lpp(const Tensor& x, const WeightGraph& w, std::size_t d, const LinearOptions& opt = {},
                        const Reduction* pre = nullptr);
ProjectionModel fit_npp(const Tensor& x, const WeightGraph& w, std::size_t d, const LinearOptions& opt = {},
                        const Reduction* pre = nullptr);

/// Graph-based fit dispatched on `method` (onpp, olpp, lpp or npp).
ProjectionModel fit_graph_method(LinearMethod method, const Tensor& x, const WeightGraph& w, std::size_t d,
                                 const LinearOptions& opt = {}, const Reduction* pre = nullptr);

/// Independent per-slice solves along the last feature mode, one weight
/// graph per slice.
ProjectionModel fit_multiweight(const Tensor& x, std::span<const WeightGraph> graphs, std::size_t d,
                                LinearMethod method, const LinearOptions& opt = {});

/// Samples of slice r (1-based) of the last feature mode.
Tensor feature_slice(const Tensor& x, std::size_t r);

/// Y = P^T *_M X, or per-slice for multi-weight models.
Embedding transform(const ProjectionModel& model, const Tensor& x);

/// Keep the leading d components.
ProjectionModel truncate(const ProjectionModel& model, std::size_t d);

/// Psi(P) of a single-weight model (features x d).
Matrix projection_matrix(const ProjectionModel& model, std::size_t slice = 0);

}  // namespace edr
