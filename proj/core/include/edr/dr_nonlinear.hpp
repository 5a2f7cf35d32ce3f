#pragma once

// Laplacian eigenmaps and locally linear embedding, with out-of-sample
// extensions.
//
// LE out-of-sample uses the normalised affinity
//   k~(t, i) = w(t, i) / sqrt(d_t d_i)
// as kernel. Its eigenvectors are those of the normalised Laplacian with
// eigenvalues 1 - lambda, so a training sample's own affinity row maps back
// exactly onto its (pre-rescale) embedding column.

#include <cstddef>

#include "edr/dr_linear.hpp"
#include "edr/graph.hpp"
#include "edr/tensor.hpp"

namespace edr {

enum class EmbeddingKind { le, lle };

struct EmbeddingModel {
  EmbeddingKind kind = EmbeddingKind::le;
  Tensor y;             // d x n training embedding
  Matrix y_hat;         // LE: selected eigenvectors of L_n as rows (before the D^{-1/2} rescale)
  Vector eigenvalues;   // LE: of L_n; LLE: of (I - W)^T (I - W)
  Vector degrees;       // LE
  Tensor train;         // training samples, needed to build test affinities / neighbourhoods
  double sigma = 0.0;   // LE affinity width
  std::size_t k = 0;    // LE: test affinities keep the k nearest (0 = dense); LLE: neighbours
  double reg = 1e-3;    // LLE
  bool skip_first = true;

  std::size_t d() const { return y.extent(0); }
};

/// Number of connected components of the graph with edges W_ij > 0.
std::size_t connected_components(const Matrix& w);

EmbeddingModel fit_le(const Tensor& x, const WeightGraph& w, std::size_t d, bool skip_first = true);

/// Pre-rescale coordinates of a point from its raw affinity row to the
/// training samples.
Vector oos_le(const EmbeddingModel& model, const Vector& affinity);

/// Raw Gaussian affinities of each test sample (columns) to the training
/// samples, with the model's sigma and neighbour rule.
Matrix le_test_affinities(const EmbeddingModel& model, const Tensor& xt);

/// Embeds test samples on the same scale as the training embedding
/// (pre-rescale coordinates divided by sqrt of the test degree).
Embedding transform_le(const EmbeddingModel& model, const Tensor& xt);

EmbeddingModel fit_lle(const Tensor& x, std::size_t k, std::size_t d, double reg = 1e-3, const Matrix* d2 = nullptr);
/// LLE embedding from precomputed reconstruction weights.
EmbeddingModel fit_lle(const Tensor& x, const WeightGraph& w, std::size_t d, double reg = 1e-3);

/// Reconstruction weights of each test sample (rows) over the training
/// samples, using its k nearest training neighbours.
Matrix oos_lle_weights(const EmbeddingModel& model, const Tensor& xt);

/// y_t = sum_j w_tj Y_j for every test sample.
Embedding oos_lle(const EmbeddingModel& model, const Tensor& xt);

/// Keep the leading d coordinates.
EmbeddingModel truncate(const EmbeddingModel& model, std::size_t d);

inline Embedding training_embedding(const EmbeddingModel& m) { return {m.y}; }

}  // namespace edr
