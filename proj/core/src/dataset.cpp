#include "edr/dataset.hpp"

#include <cmath>

#include "edr/error.hpp"

namespace edr {

DataSet::DataSet(Tensor x, std::vector<int> labels, std::string provenance)
    : provenance_(std::move(provenance)) {
  if (x.order() < 2) throw ShapeError("a data set needs at least one feature mode and a sample mode");
  for (double v : x.data())
    if (!std::isfinite(v)) throw FormatError("data set contains a non-finite value");
  features_ = x.shape().head(x.order() - 1);
  n_ = x.extent(x.order() - 1);
  if (!labels.empty() && labels.size() != n_)
    throw ShapeError("label count " + std::to_string(labels.size()) + " differs from sample count " +
                     std::to_string(n_));
  labelled_ = !labels.empty();
  labels_ = std::move(labels);
  x_ = std::move(x);
}

DataSet DataSet::empty(Shape feature_shape, bool labelled) {
  DataSet d;
  d.features_ = std::move(feature_shape);
  d.labelled_ = labelled;
  return d;
}

const Tensor& DataSet::x() const {
  if (!x_) throw RangeError("data set is empty");
  return *x_;
}

const std::vector<int>& DataSet::require_labels(const std::string& what) const {
  if (!labelled_) throw ConfigError(what + " needs class labels but the data set has none");
  return labels_;
}

DataSet DataSet::subset(std::span<const std::size_t> indices) const {
  if (indices.empty()) {
    DataSet d = empty(features_, labelled_);
    d.provenance_ = provenance_;
    return d;
  }
  std::vector<int> lab;
  if (labelled_) {
    lab.reserve(indices.size());
    for (std::size_t i : indices) {
      if (i >= n_) throw RangeError("sample index out of range");
      lab.push_back(labels_[i]);
    }
  }
  return DataSet(gather_frontal(x(), indices), std::move(lab), provenance_);
}

DataSet concat(const DataSet& a, const DataSet& b) {
  if (!(a.feature_shape() == b.feature_shape())) throw ShapeError("concat: feature shapes differ");
  if (a.empty()) return b;
  if (b.empty()) return a;
  if (a.has_labels() != b.has_labels()) throw ShapeError("concat: only one side is labelled");
  std::vector<int> lab = a.labels();
  lab.insert(lab.end(), b.labels().begin(), b.labels().end());
  return DataSet(concat_frontal(a.x(), b.x()), std::move(lab), a.provenance());
}

}  // namespace edr
