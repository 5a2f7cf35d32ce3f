#include "edr/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "edr/error.hpp"

namespace edr {

namespace {

ConstMatrixMap samples(const Tensor& x) {
  if (x.order() < 1) throw ShapeError("sample tensor needs a sample mode");
  return x.matrix(x.order() - 1);
}

void require_labels_for(std::size_t n, std::span<const int> labels) {
  if (labels.size() != n)
    throw ConfigError("expected " + std::to_string(n) + " labels, got " + std::to_string(labels.size()));
}

}  // namespace

Matrix pairwise_sq_dists(const Tensor& x) {
  auto a = samples(x);
  const Eigen::Index n = a.cols();
  Matrix d2 = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    const Eigen::Index rest = n - i - 1;
    Eigen::RowVectorXd row = (a.rightCols(rest).colwise() - a.col(i)).colwise().squaredNorm();
    d2.row(i).tail(rest) = row;
    d2.col(i).tail(rest) = row.transpose();
  }
  return d2;
}

Matrix cross_sq_dists(const Tensor& a, const Tensor& b) {
  auto ma = samples(a);
  auto mb = samples(b);
  if (ma.rows() != mb.rows()) throw ShapeError("cross distances: feature counts differ");
  Matrix d2(ma.cols(), mb.cols());
  for (Eigen::Index j = 0; j < mb.cols(); ++j) d2.col(j) = (ma.colwise() - mb.col(j)).colwise().squaredNorm().transpose();
  return d2;
}

double auto_sigma(const Matrix& d2) {
  const Eigen::Index n = d2.rows();
  if (n < 2) throw RangeError("auto sigma needs at least two samples");
  std::vector<double> dist;
  dist.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Eigen::Index j = 1; j < n; ++j)
    for (Eigen::Index i = 0; i < j; ++i) dist.push_back(std::sqrt(std::max(d2(i, j), 0.0)));
  auto median = [](std::vector<double>& v) {
    const std::size_t m = v.size();
    auto mid = v.begin() + static_cast<std::ptrdiff_t>(m / 2);
    std::nth_element(v.begin(), mid, v.end());
    double med = *mid;
    if (m % 2 == 0) med = (med + *std::max_element(v.begin(), mid)) / 2.0;
    return med;
  };
  double med = median(dist);
  if (med > 0.0) return med / 2.0;
  // Mostly coincident samples (e.g. constant border pixels in one slice).
  std::erase(dist, 0.0);
  if (dist.empty()) return 1.0;  // every weight is 1 whatever the width
  return median(dist) / 2.0;
}

WeightGraph gaussian_weights(const Matrix& d2, std::optional<double> sigma, double threshold) {
  if (d2.rows() != d2.cols()) throw ShapeError("gaussian weights need a square distance matrix");
  double s = sigma ? *sigma : auto_sigma(d2);
  if (!(s > 0.0)) throw RangeError("gaussian sigma must be positive, got " + std::to_string(s));
  WeightGraph g;
  g.w = (-d2.array() / (s * s)).exp().matrix();
  if (threshold > 0.0) g.w = (g.w.array() < threshold).select(0.0, g.w);
  g.meta.kind = "gaussian";
  g.meta.sigma = s;
  return g;
}

NeighborLists knn_lists(const Matrix& d2, std::size_t k) {
  const auto n = static_cast<std::size_t>(d2.rows());
  if (k < 1 || k >= n) throw RangeError("k = " + std::to_string(k) + " out of range for n = " + std::to_string(n));
  NeighborLists out(n);
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) {
    idx.clear();
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) idx.push_back(j);
    auto less = [&](std::size_t a, std::size_t b) {
      double da = d2(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(a));
      double db = d2(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(b));
      return da < db || (da == db && a < b);
    };
    std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(), less);
    out[i].assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k));
  }
  return out;
}

WeightGraph knn_sparsify(const WeightGraph& g, const Matrix& d2, std::size_t k, KnnMode mode) {
  if (d2.rows() != g.w.rows()) throw ShapeError("knn sparsify: distance and weight sizes differ");
  const Eigen::Index n = g.w.rows();
  NeighborLists nb = knn_lists(d2, k);
  Matrix keep = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    keep(i, i) = 1.0;
    for (std::size_t j : nb[static_cast<std::size_t>(i)]) keep(i, static_cast<Eigen::Index>(j)) = 1.0;
  }
  Matrix sym = mode == KnnMode::union_of ? Matrix(keep.cwiseMax(keep.transpose())) : Matrix(keep.cwiseMin(keep.transpose()));
  WeightGraph out = g;
  out.w = g.w.cwiseProduct(sym);
  out.symmetric = g.symmetric;
  out.meta.k = k;
  out.meta.kind += mode == KnnMode::union_of ? "+knn" : "+mutual-knn";
  return out;
}

WeightGraph supervised_weights(const WeightGraph& g, std::span<const int> labels) {
  require_labels_for(g.size(), labels);
  WeightGraph out = g;
  const Eigen::Index n = g.w.rows();
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i)
      if (labels[static_cast<std::size_t>(i)] != labels[static_cast<std::size_t>(j)]) out.w(i, j) = 0.0;
  out.meta.kind += "+supervised";
  return out;
}

WeightGraph repulsion_weights(std::span<const int> labels, const NeighborLists* edges) {
  const auto n = static_cast<Eigen::Index>(labels.size());
  WeightGraph g;
  g.w = Matrix::Zero(n, n);
  auto differ = [&](std::size_t i, std::size_t j) { return i != j && labels[i] != labels[j]; };
  if (!edges) {
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index i = 0; i < n; ++i)
        if (differ(static_cast<std::size_t>(i), static_cast<std::size_t>(j))) g.w(i, j) = 1.0;
    g.meta.kind = "repulsion-full";
  } else {
    if (edges->size() != labels.size()) throw ShapeError("repulsion: neighbour lists and labels differ in size");
    for (std::size_t i = 0; i < edges->size(); ++i)
      for (std::size_t j : (*edges)[i])
        if (differ(i, j)) {
          g.w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = 1.0;
          g.w(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = 1.0;
        }
    g.meta.kind = "repulsion-knn";
  }
  return g;
}

WeightGraph combine_repulsion(const WeightGraph& g, const WeightGraph& wr, double beta) {
  if (g.w.rows() != wr.w.rows() || g.w.cols() != wr.w.cols()) throw ShapeError("repulsion: graph sizes differ");
  WeightGraph out = g;
  out.w = g.w + beta * wr.w;
  out.symmetric = g.symmetric && wr.symmetric;
  out.meta.beta = beta;
  out.meta.kind += "+repulsion";
  return out;
}

Vector degrees(const Matrix& w) { return w.rowwise().sum(); }

Matrix laplacian(const Matrix& w) {
  if (w.rows() != w.cols()) throw ShapeError("laplacian needs a square weight matrix");
  if (w.size() && w.minCoeff() < 0.0) throw RangeError("laplacian: negative weights");
  Matrix l = -w;
  l.diagonal() += degrees(w);
  return l;
}

Matrix normalized_laplacian(const Matrix& w) {
  Matrix l = laplacian(w);
  Vector d = degrees(w);
  Vector s = d.unaryExpr([](double v) { return v > 0.0 ? 1.0 / std::sqrt(v) : 0.0; });
  return s.asDiagonal() * l * s.asDiagonal();
}

Matrix reconstruction_operator(const Matrix& w) {
  if (w.rows() != w.cols()) throw ShapeError("reconstruction operator needs a square weight matrix");
  Matrix a = -w;
  a.diagonal().array() += 1.0;
  return a.transpose() * a;
}

Matrix centering_matrix(std::size_t n) {
  const auto m = static_cast<Eigen::Index>(n);
  return Matrix::Identity(m, m) - Matrix::Constant(m, m, 1.0 / static_cast<double>(n));
}

LaplacianForms laplacian_forms(const WeightGraph& g) {
  if (g.w.size() && g.w.minCoeff() < 0.0) throw RangeError("laplacian: negative weights");
  LaplacianForms f;
  f.degree = degrees(g.w);
  f.l = laplacian(g.w);
  f.ln = normalized_laplacian(g.w);
  f.m = reconstruction_operator(g.w);
  f.h = centering_matrix(g.size());
  return f;
}

Matrix class_separated_sq_dists(const Matrix& d2, std::span<const int> labels, double mu) {
  require_labels_for(static_cast<std::size_t>(d2.rows()), labels);
  const double big = d2.size() ? d2.maxCoeff() : 0.0;
  Matrix out = d2;
  for (Eigen::Index j = 0; j < d2.cols(); ++j)
    for (Eigen::Index i = 0; i < d2.rows(); ++i)
      if (labels[static_cast<std::size_t>(i)] != labels[static_cast<std::size_t>(j)]) out(i, j) += mu * big;
  return out;
}

Vector local_weights(const Matrix& diffs, double reg) {
  const Eigen::Index k = diffs.cols();
  if (k < 1) throw RangeError("local weights need at least one neighbour");
  Matrix g = diffs.transpose() * diffs;
  Eigen::SelfAdjointEigenSolver<Matrix> es(g, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues()(0), hi = es.eigenvalues()(k - 1);
  if (!(lo > 0.0) || hi > 1e12 * lo) {
    double tr = g.trace();
    g.diagonal().array() += tr > 0.0 ? reg * tr / static_cast<double>(k) : reg;
  }
  Vector w = g.ldlt().solve(Vector::Ones(k));
  double s = w.sum();
  if (!std::isfinite(s) || std::abs(s) <= 1e-300)
    throw DegenerateError("local Gram system has a vanishing constraint sum");
  return w / s;
}

WeightGraph lle_weights(const Tensor& x, std::size_t k, double reg, const Matrix* d2) {
  auto a = samples(x);
  const Eigen::Index n = a.cols();
  Matrix own;
  if (!d2) {
    own = pairwise_sq_dists(x);
    d2 = &own;
  }
  if (d2->rows() != n) throw ShapeError("lle weights: distance matrix does not match sample count");
  NeighborLists nb = knn_lists(*d2, k);
  WeightGraph g;
  g.w = Matrix::Zero(n, n);
  g.symmetric = false;
  Matrix diffs(a.rows(), static_cast<Eigen::Index>(k));
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& ni = nb[static_cast<std::size_t>(i)];
    for (std::size_t j = 0; j < k; ++j) diffs.col(static_cast<Eigen::Index>(j)) = a.col(i) - a.col(static_cast<Eigen::Index>(ni[j]));
    Vector w = local_weights(diffs, reg);
    for (std::size_t j = 0; j < k; ++j) g.w(i, static_cast<Eigen::Index>(ni[j])) = w(static_cast<Eigen::Index>(j));
  }
  g.meta.kind = "lle";
  g.meta.k = k;
  return g;
}

WeightGraph row_normalized(const WeightGraph& g) {
  WeightGraph out = g;
  out.w.diagonal().setZero();
  Vector s = degrees(out.w);
  for (Eigen::Index i = 0; i < out.w.rows(); ++i)
    if (s(i) > 0.0) out.w.row(i) /= s(i);
  out.symmetric = false;
  out.meta.kind += "+rownorm";
  return out;
}

void write_graph_csv(const WeightGraph& g, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw FormatError("cannot write graph dump to " + path);
  os.precision(17);
  os << "i,j,w\n";
  for (Eigen::Index i = 0; i < g.w.rows(); ++i)
    for (Eigen::Index j = 0; j < g.w.cols(); ++j)
      if (g.w(i, j) != 0.0) os << i << ',' << j << ',' << g.w(i, j) << '\n';
  if (!os) throw FormatError("failed writing graph dump to " + path);
}

}  // namespace edr
