#pragma once

// Turns a method description into a fitted model with training and test
// embeddings. This is the layer shared by the sweep and the CLI.

#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "edr/dataset.hpp"
#include "edr/dr_kernel.hpp"
#include "edr/dr_linear.hpp"
#include "edr/dr_nonlinear.hpp"
#include "edr/graph.hpp"

namespace edr {

enum class WeightKind { gaussian, lle };

struct GraphConfig {
  // unset: reconstruction weights for onpp, npp, lle and konpp, Gaussian otherwise
  std::optional<WeightKind> weights;
  std::optional<double> sigma;  // unset: half the median distance
  std::size_t k = 7;            // neighbours; 0 keeps Gaussian graphs dense
  bool mutual = false;          // mutual instead of union kNN
  double threshold = 0.0;
  bool supervised = false;
  bool repulsion = false;
  double beta = 1.0;            // repulsion strength
  std::size_t repulsion_k = 0;  // 0: repulsion between every pair of classes
  double mu = 0.2;              // class separation for supervised lle weights
  double reg = 1e-3;
};

struct MethodConfig {
  std::string method = "pca";  // pca spca olpp onpp lpp npp le lle kpca klpp konpp kolpp baseline
  bool multiweight = false;
  std::optional<bool> skip_first;
  GraphConfig graph;
  KernelSpec kernel;
  LinearOptions linear;
};

/// Accepts "olpp", "olpp-e" or "olpp-mw" (the last sets multiweight).
MethodConfig parse_method_id(const std::string& id);
/// "olpp-e", "olpp-mw", "baseline".
std::string method_id(const MethodConfig& m);

bool is_linear(const std::string& method);
bool is_kernel(const std::string& method);
/// Methods built on reconstruction weights: gaussian graphs are row-normalised for them.
bool uses_reconstruction(const std::string& method);

/// Weight kind after applying the per-method default.
WeightKind weight_kind(const MethodConfig& m);

/// The weight graph the method would use on these samples.
WeightGraph build_graph(const MethodConfig& m, const Tensor& x, const std::vector<int>& labels);

struct FittedMethod {
  MethodConfig config;
  std::variant<std::monostate, ProjectionModel, EmbeddingModel> model;  // monostate: baseline or kernel
  Embedding train;
  std::size_t d = 0;
};

/// Fits on `train`. Kernel methods are transductive and need `extra`
/// samples embedded in the same fit; their embeddings are returned in
/// `extra_embedding`.
FittedMethod fit_method(const MethodConfig& m, const DataSet& train, std::size_t d,
                        const DataSet* extra = nullptr, Embedding* extra_embedding = nullptr);

/// Embedding of new samples (linear transform or out-of-sample extension).
Embedding embed(const FittedMethod& f, const DataSet& data);

/// Leading d coordinates.
FittedMethod truncate(const FittedMethod& f, std::size_t d);
Embedding truncate(const Embedding& e, std::size_t d);

}  // namespace edr
