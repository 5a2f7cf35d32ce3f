#include "edr/dr_nonlinear.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "edr/error.hpp"
#include "edr/spectral.hpp"

namespace edr {

namespace {

std::size_t sample_count(const Tensor& x) {
  if (x.order() < 2) throw ShapeError("expected feature modes followed by a sample mode");
  return x.extent(x.order() - 1);
}

void check_features(const EmbeddingModel& m, const Tensor& xt) {
  if (xt.order() != m.train.order() ||
      !(xt.shape().head(xt.order() - 1) == m.train.shape().head(m.train.order() - 1)))
    throw ShapeError("test samples " + xt.shape().str() + " do not match training samples " + m.train.shape().str());
}

Tensor rows_as_tensor(const Matrix& rows) {
  Tensor y(Shape{static_cast<std::size_t>(rows.rows()), static_cast<std::size_t>(rows.cols())});
  y.matrix(1) = rows;
  return y;
}

}  // namespace

std::size_t connected_components(const Matrix& w) {
  const Eigen::Index n = w.rows();
  std::vector<int> seen(static_cast<std::size_t>(n), 0);
  std::vector<Eigen::Index> stack;
  std::size_t count = 0;
  for (Eigen::Index s = 0; s < n; ++s) {
    if (seen[static_cast<std::size_t>(s)]) continue;
    ++count;
    seen[static_cast<std::size_t>(s)] = 1;
    stack.push_back(s);
    while (!stack.empty()) {
      Eigen::Index v = stack.back();
      stack.pop_back();
      for (Eigen::Index u = 0; u < n; ++u)
        if (!seen[static_cast<std::size_t>(u)] && (w(v, u) > 0.0 || w(u, v) > 0.0)) {
          seen[static_cast<std::size_t>(u)] = 1;
          stack.push_back(u);
        }
    }
  }
  return count;
}

EmbeddingModel fit_le(const Tensor& x, const WeightGraph& w, std::size_t d, bool skip_first) {
  const std::size_t n = sample_count(x);
  if (w.size() != n) throw ShapeError("le: weight matrix does not match the sample count");
  if ((w.w - w.w.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, w.w.cwiseAbs().maxCoeff()))
    throw ShapeError("le needs a symmetric weight matrix");
  const std::size_t comps = connected_components(w.w);
  if (skip_first && comps >= d + 1)
    throw RankError("le: graph has " + std::to_string(comps) + " components, so eigenvalue 0 covers all " +
                    std::to_string(d) + " requested coordinates");

  EmbeddingModel m;
  m.kind = EmbeddingKind::le;
  m.skip_first = skip_first;
  m.degrees = degrees(w.w);
  EigResult sel = select(sym_eig(normalized_laplacian(w.w)), {d, Side::smallest, skip_first});
  m.eigenvalues = sel.values;
  m.y_hat = sel.vectors.transpose();
  Vector s = m.degrees.unaryExpr([](double v) { return v > 0.0 ? 1.0 / std::sqrt(v) : 0.0; });
  m.y = rows_as_tensor(m.y_hat * s.asDiagonal());
  m.train = x;
  m.sigma = w.meta.sigma;
  m.k = w.meta.k;
  return m;
}

Vector oos_le(const EmbeddingModel& model, const Vector& affinity) {
  if (model.kind != EmbeddingKind::le) throw ConfigError("oos_le needs a Laplacian-eigenmap model");
  if (affinity.size() != model.degrees.size()) throw ShapeError("oos_le: affinity length differs from training size");
  const double dt = affinity.sum();
  const Eigen::Index d = model.y_hat.rows();
  Vector out = Vector::Zero(d);
  if (!(dt > 0.0)) return out;
  Vector kn(affinity.size());
  for (Eigen::Index i = 0; i < affinity.size(); ++i) {
    const double di = model.degrees(i);
    kn(i) = di > 0.0 ? affinity(i) / std::sqrt(dt * di) : 0.0;
  }
  for (Eigen::Index j = 0; j < d; ++j) {
    const double kappa = 1.0 - model.eigenvalues(j);
    if (std::abs(kappa) < 1e-12)
      throw NumericalError("oos_le: kernel eigenvalue vanishes for coordinate " + std::to_string(j + 1));
    out(j) = model.y_hat.row(j).dot(kn) / kappa;
  }
  return out;
}

Matrix le_test_affinities(const EmbeddingModel& model, const Tensor& xt) {
  check_features(model, xt);
  if (!(model.sigma > 0.0)) throw ConfigError("le model carries no affinity width for test samples");
  Matrix d2 = cross_sq_dists(model.train, xt);  // n_train x n_test
  Matrix a = (-d2.array() / (model.sigma * model.sigma)).exp().matrix();
  const auto n = static_cast<std::size_t>(d2.rows());
  if (model.k > 0 && model.k < n) {
    std::vector<Eigen::Index> idx(n);
    for (Eigen::Index t = 0; t < d2.cols(); ++t) {
      for (std::size_t i = 0; i < n; ++i) idx[i] = static_cast<Eigen::Index>(i);
      std::nth_element(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(model.k), idx.end(),
                       [&](Eigen::Index p, Eigen::Index q) {
                         return d2(p, t) < d2(q, t) || (d2(p, t) == d2(q, t) && p < q);
                       });
      for (std::size_t r = model.k; r < n; ++r) a(idx[r], t) = 0.0;
    }
  }
  return a;
}

Embedding transform_le(const EmbeddingModel& model, const Tensor& xt) {
  Matrix aff = le_test_affinities(model, xt);
  Matrix y(model.y_hat.rows(), aff.cols());
  for (Eigen::Index t = 0; t < aff.cols(); ++t) {
    const double dt = aff.col(t).sum();
    y.col(t) = dt > 0.0 ? Vector(oos_le(model, aff.col(t)) / std::sqrt(dt)) : Vector::Zero(y.rows());
  }
  return {rows_as_tensor(y)};
}

EmbeddingModel fit_lle(const Tensor& x, const WeightGraph& w, std::size_t d, double reg) {
  const std::size_t n = sample_count(x);
  if (w.size() != n) throw ShapeError("lle: weight matrix does not match the sample count");
  if (d + 1 > n) throw RankError("lle: d + 1 = " + std::to_string(d + 1) + " exceeds n = " + std::to_string(n));
  EmbeddingModel m;
  m.kind = EmbeddingKind::lle;
  EigResult sel = select(sym_eig(reconstruction_operator(w.w)), {d, Side::smallest, true});
  m.eigenvalues = sel.values;
  m.y = rows_as_tensor(sel.vectors.transpose());
  m.train = x;
  m.k = w.meta.k;
  m.reg = reg;
  return m;
}

EmbeddingModel fit_lle(const Tensor& x, std::size_t k, std::size_t d, double reg, const Matrix* d2) {
  const std::size_t n = sample_count(x);
  if (d + 1 > n) throw RankError("lle: d + 1 = " + std::to_string(d + 1) + " exceeds n = " + std::to_string(n));
  return fit_lle(x, lle_weights(x, k, reg, d2), d, reg);
}

Matrix oos_lle_weights(const EmbeddingModel& model, const Tensor& xt) {
  if (model.kind != EmbeddingKind::lle) throw ConfigError("oos_lle needs an LLE model");
  check_features(model, xt);
  auto tr = model.train.matrix(model.train.order() - 1);
  auto te = xt.matrix(xt.order() - 1);
  const auto n = static_cast<std::size_t>(tr.cols());
  const std::size_t k = model.k;
  if (k < 1 || k > n) throw RangeError("oos_lle: k out of range");
  Matrix d2 = cross_sq_dists(model.train, xt);
  Matrix w = Matrix::Zero(te.cols(), tr.cols());
  std::vector<Eigen::Index> idx(n);
  Matrix diffs(tr.rows(), static_cast<Eigen::Index>(k));
  for (Eigen::Index t = 0; t < te.cols(); ++t) {
    for (std::size_t i = 0; i < n; ++i) idx[i] = static_cast<Eigen::Index>(i);
    std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(),
                      [&](Eigen::Index p, Eigen::Index q) {
                        return d2(p, t) < d2(q, t) || (d2(p, t) == d2(q, t) && p < q);
                      });
    for (std::size_t j = 0; j < k; ++j) diffs.col(static_cast<Eigen::Index>(j)) = te.col(t) - tr.col(idx[j]);
    Vector wt = local_weights(diffs, model.reg);
    for (std::size_t j = 0; j < k; ++j) w(t, idx[j]) = wt(static_cast<Eigen::Index>(j));
  }
  return w;
}

Embedding oos_lle(const EmbeddingModel& model, const Tensor& xt) {
  Matrix w = oos_lle_weights(model, xt);
  return {rows_as_tensor(model.y.matrix(1) * w.transpose())};
}

EmbeddingModel truncate(const EmbeddingModel& model, std::size_t d) {
  if (d < 1 || d > model.d()) throw RangeError("truncate: d = " + std::to_string(d) + " out of range");
  const auto dd = static_cast<Eigen::Index>(d);
  EmbeddingModel out = model;
  out.y = rows_as_tensor(model.y.matrix(1).topRows(dd));
  if (model.y_hat.size()) out.y_hat = model.y_hat.topRows(dd);
  out.eigenvalues = model.eigenvalues.head(dd);
  return out;
}

}  // namespace edr
