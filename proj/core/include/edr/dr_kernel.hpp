#pragma once

// Kernel PCA, LPP, ONPP and OLPP on a Gram matrix of sample slices. The
// fits see the data only through K, so they produce training embeddings
// and no projection.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "edr/dr_linear.hpp"
#include "edr/graph.hpp"
#include "edr/tensor.hpp"

namespace edr {

enum class KernelKind { gaussian, polynomial, linear, laplacian, sigmoid };

std::string to_string(KernelKind k);
KernelKind parse_kernel_kind(const std::string& name);

struct KernelSpec {
  KernelKind kind = KernelKind::gaussian;
  std::optional<double> sigma;  // gaussian/laplacian width; unset = auto_sigma
  int degree = 2;               // polynomial
  double offset = 1.0;          // polynomial, sigmoid
  double slope = 1.0;           // polynomial, sigmoid
};

struct Gram {
  Matrix k;
  bool centered = false;

  std::size_t size() const { return static_cast<std::size_t>(k.rows()); }
};

/// Kernel values over Frobenius inner products / distances of the samples.
///   gaussian    exp(-|x - y|^2 / sigma^2)
///   laplacian   exp(-|x - y| / sigma)
///   polynomial  (slope <x, y> + offset)^degree
///   linear      <x, y>
///   sigmoid     tanh(slope <x, y> + offset)
Gram gram(const Tensor& x, const KernelSpec& spec);

/// J K J with J = I - 11^T / n.
Gram center_gram(const Gram& k);

struct KernelFit {
  Embedding embedding;  // d x n
  Vector eigenvalues;
  std::vector<std::string> warnings;
};

/// Rows sqrt(lambda_j) v_j^T from the largest eigenpairs of the centred Gram
/// matrix, i.e. coefficients v_j / sqrt(lambda_j) on the centred feature map.
KernelFit fit_kpca(const Gram& k, std::size_t d);

/// L z = lambda D z; K only enters through an invertibility check.
KernelFit fit_klpp(const Gram& k, const WeightGraph& w, std::size_t d, bool skip_first = false);

/// K M z = lambda z with M = (I - W)^T (I - W), solved as the congruent
/// symmetric problem K^{1/2} M K^{1/2} u = lambda u, z = K^{1/2} u.
KernelFit fit_konpp(const Gram& k, const WeightGraph& w, std::size_t d, bool skip_first = false);

/// Smallest eigenvectors of K.
KernelFit fit_kolpp(const Gram& k, std::size_t d, bool skip_first = false);

/// Dense CSV: first line n, then n rows of n values.
void write_gram_csv(const std::filesystem::path& path, const Gram& k);
Gram read_gram_csv(const std::filesystem::path& path);

}  // namespace edr
