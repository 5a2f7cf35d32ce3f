#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "edr/tensor.hpp"

namespace edr {

/// Samples stacked along the last mode, with optional integer labels.
/// A data set may be empty (n = 0), in which case only the feature shape
/// is known.
class DataSet {
 public:
  DataSet() = default;
  explicit DataSet(Tensor x, std::vector<int> labels = {}, std::string provenance = {});
  static DataSet empty(Shape feature_shape, bool labelled = false);

  std::size_t size() const noexcept { return n_; }
  bool empty() const noexcept { return n_ == 0; }
  const Shape& feature_shape() const noexcept { return features_; }
  std::size_t feature_count() const noexcept { return features_.numel(); }

  /// Sample tensor; throws RangeError when the set is empty.
  const Tensor& x() const;

  bool has_labels() const noexcept { return labelled_; }
  const std::vector<int>& labels() const noexcept { return labels_; }
  /// Labels, or ConfigError naming `what` when the set is unlabelled.
  const std::vector<int>& require_labels(const std::string& what) const;

  /// Features x n view of the samples.
  ConstMatrixMap flat() const { return x().matrix(features_.order()); }

  /// Samples at the given 0-based positions, in that order.
  DataSet subset(std::span<const std::size_t> indices) const;

  const std::string& provenance() const noexcept { return provenance_; }
  void set_provenance(std::string p) { provenance_ = std::move(p); }

 private:
  Shape features_;
  std::size_t n_ = 0;
  std::optional<Tensor> x_;
  std::vector<int> labels_;
  bool labelled_ = false;
  std::string provenance_;
};

/// Samples of `a` followed by those of `b`.
DataSet concat(const DataSet& a, const DataSet& b);

}  // namespace edr
