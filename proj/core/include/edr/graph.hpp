#pragma once

// Affinity graphs over samples and the matrices derived from them.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "edr/tensor.hpp"

namespace edr {

struct GraphMeta {
  std::string kind;
  double sigma = 0.0;
  std::size_t k = 0;
  double beta = 0.0;
};

struct WeightGraph {
  Matrix w;
  bool symmetric = true;
  GraphMeta meta;

  std::size_t size() const noexcept { return static_cast<std::size_t>(w.rows()); }
};

struct LaplacianForms {
  Vector degree;
  Matrix l;   // D - W
  Matrix ln;  // D^{-1/2} L D^{-1/2}
  Matrix m;   // (I - W)^T (I - W)
  Matrix h;   // I - 11^T / n
};

using NeighborLists = std::vector<std::vector<std::size_t>>;

/// Squared Frobenius distances between the frontal slices of `x`,
/// computed from explicit differences (duplicates give exact zeros).
Matrix pairwise_sq_dists(const Tensor& x);
/// Squared distances between every slice of `a` (rows) and of `b` (columns).
Matrix cross_sq_dists(const Tensor& a, const Tensor& b);

/// Half the median of the pairwise distances (upper triangle, not squared).
/// When that median is zero the nonzero distances are used instead, and 1
/// is returned if all samples coincide.
double auto_sigma(const Matrix& d2);

/// exp(-d2 / sigma^2); sigma defaults to auto_sigma(d2). Entries below
/// `threshold` are zeroed (0 keeps everything).
WeightGraph gaussian_weights(const Matrix& d2, std::optional<double> sigma = std::nullopt, double threshold = 0.0);

/// The k nearest other samples of each row of d2, nearest first; ties go
/// to the smaller index.
NeighborLists knn_lists(const Matrix& d2, std::size_t k);

enum class KnnMode { union_of, mutual };

/// Keep W_ij only where j is among the k nearest of i. The diagonal is kept.
WeightGraph knn_sparsify(const WeightGraph& g, const Matrix& d2, std::size_t k, KnnMode mode = KnnMode::union_of);

/// Zero every weight between samples of different classes.
WeightGraph supervised_weights(const WeightGraph& g, std::span<const int> labels);

/// Unit weights on edges joining different classes. Without `edges` the
/// graph is fully connected; otherwise an edge exists when either endpoint
/// lists the other.
WeightGraph repulsion_weights(std::span<const int> labels, const NeighborLists* edges = nullptr);

/// W + beta * Wr.
WeightGraph combine_repulsion(const WeightGraph& g, const WeightGraph& wr, double beta);

Vector degrees(const Matrix& w);
/// D - W; throws on negative weights.
Matrix laplacian(const Matrix& w);
/// D^{-1/2} L D^{-1/2}, with zero-degree entries of D^{-1/2} set to 0.
Matrix normalized_laplacian(const Matrix& w);
/// (I - W)^T (I - W).
Matrix reconstruction_operator(const Matrix& w);
Matrix centering_matrix(std::size_t n);

LaplacianForms laplacian_forms(const WeightGraph& g);

/// d2 + mu * [c_i != c_j] * max(d2): pushes other-class points outward
/// before neighbours are chosen.
Matrix class_separated_sq_dists(const Matrix& d2, std::span<const int> labels, double mu);

/// Sum-to-one weights minimising ||x - sum_j w_j n_j||, given the
/// differences x - n_j as columns. A multiple `reg` of tr(G)/k is added to
/// the local Gram matrix when it is singular or its condition number
/// exceeds 1e12.
Vector local_weights(const Matrix& diffs, double reg = 1e-3);

/// LLE reconstruction weights: row i holds the weights of sample i's k
/// neighbours (chosen from `d2` when given, else Euclidean).
WeightGraph lle_weights(const Tensor& x, std::size_t k, double reg = 1e-3, const Matrix* d2 = nullptr);

/// Row-normalised copy with a zero diagonal; used to feed affinity graphs
/// to the reconstruction-based methods.
WeightGraph row_normalized(const WeightGraph& g);

/// "i,j,w" triplets of the nonzero weights.
void write_graph_csv(const WeightGraph& g, const std::string& path);

}  // namespace edr
