#include "edr/dr_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <Eigen/SVD>

#include "edr/error.hpp"
#include "edr/log.hpp"
#include "edr/spectral.hpp"

namespace edr {

namespace {

constexpr double kPsdTol = 1e-8;

void require_symmetric(const Matrix& k, const char* what) {
  if (k.rows() != k.cols()) throw ShapeError(std::string(what) + ": Gram matrix is not square");
  const double scale = std::max(1.0, k.cwiseAbs().maxCoeff());
  if ((k - k.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw ShapeError(std::string(what) + ": Gram matrix is not symmetric");
}

void require_d(std::size_t d, std::size_t n, const char* what) {
  if (d < 1 || d > n)
    throw RangeError(std::string(what) + ": d = " + std::to_string(d) + " outside [1, " + std::to_string(n) + "]");
}

KernelFit from_vectors(const Matrix& rows, const Vector& values) {
  Tensor y(Shape{static_cast<std::size_t>(rows.rows()), static_cast<std::size_t>(rows.cols())});
  y.matrix(1) = rows;
  return {{std::move(y)}, values, {}};
}

}  // namespace

std::string to_string(KernelKind k) {
  switch (k) {
    case KernelKind::gaussian: return "gaussian";
    case KernelKind::polynomial: return "polynomial";
    case KernelKind::linear: return "linear";
    case KernelKind::laplacian: return "laplacian";
    case KernelKind::sigmoid: return "sigmoid";
  }
  return "?";
}

KernelKind parse_kernel_kind(const std::string& name) {
  for (auto k : {KernelKind::gaussian, KernelKind::polynomial, KernelKind::linear, KernelKind::laplacian,
                 KernelKind::sigmoid})
    if (to_string(k) == name) return k;
  throw ConfigError("unknown kernel '" + name + "'");
}

Gram gram(const Tensor& x, const KernelSpec& spec) {
  if (x.order() < 2) throw ShapeError("gram: expected feature modes followed by a sample mode");
  auto a = x.matrix(x.order() - 1);
  Matrix ip = a.transpose() * a;
  const Eigen::Index n = ip.rows();
  Gram g;
  switch (spec.kind) {
    case KernelKind::linear:
      g.k = ip;
      break;
    case KernelKind::polynomial:
      if (spec.degree < 1) throw RangeError("polynomial kernel degree must be at least 1");
      g.k = (spec.slope * ip.array() + spec.offset).pow(static_cast<double>(spec.degree)).matrix();
      break;
    case KernelKind::sigmoid:
      g.k = (spec.slope * ip.array() + spec.offset).tanh().matrix();
      break;
    case KernelKind::gaussian:
    case KernelKind::laplacian: {
      Matrix d2 = pairwise_sq_dists(x);
      const double s = spec.sigma ? *spec.sigma : auto_sigma(d2);
      if (!(s > 0.0) || !std::isfinite(s)) throw RangeError("kernel width must be positive, got " + std::to_string(s));
      if (spec.kind == KernelKind::gaussian)
        g.k = (-d2.array() / (s * s)).exp().matrix();
      else
        g.k = (-d2.array().sqrt() / s).exp().matrix();
      break;
    }
  }
  // Symmetrise away rounding in the products.
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) g.k(j, i) = g.k(i, j);
  return g;
}

Gram center_gram(const Gram& k) {
  require_symmetric(k.k, "center_gram");
  Matrix c = k.k;
  Vector rm = c.rowwise().mean();
  c.colwise() -= rm;
  Eigen::RowVectorXd cm = c.colwise().mean();
  c.rowwise() -= cm;
  Matrix s = 0.5 * (c + c.transpose());
  return {s, true};
}

KernelFit fit_kpca(const Gram& k, std::size_t d) {
  require_symmetric(k.k, "kpca");
  require_d(d, k.size(), "kpca");
  Gram c = k.centered ? k : center_gram(k);
  EigResult eig = sym_eig(c.k);
  const double top = std::max(0.0, eig.values.maxCoeff());
  std::size_t positive = 0;
  for (Eigen::Index i = 0; i < eig.values.size(); ++i)
    if (eig.values(i) > 1e-10 * top && top > 0.0) ++positive;
  if (d > positive)
    throw RankError("kpca: d = " + std::to_string(d) + " exceeds the " + std::to_string(positive) +
                    " positive eigenvalues of the centred Gram matrix");
  EigResult sel = select(eig, {d, Side::largest, false});
  Matrix rows = (sel.vectors * sel.values.cwiseSqrt().asDiagonal()).transpose();
  return from_vectors(rows, sel.values);
}

KernelFit fit_klpp(const Gram& k, const WeightGraph& w, std::size_t d, bool skip_first) {
  require_symmetric(k.k, "klpp");
  if (w.size() != k.size()) throw ShapeError("klpp: weight matrix and Gram matrix sizes differ");
  require_d(d + (skip_first ? 1 : 0), k.size(), "klpp");
  std::vector<std::string> warnings;
  Eigen::JacobiSVD<Matrix> svd(k.k);
  const Vector& sv = svd.singularValues();
  const double cond = sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1) : INFINITY;
  if (cond > 1e12) {
    std::ostringstream msg;
    msg << "klpp: Gram matrix condition number " << cond << " exceeds 1e12";
    warnings.push_back(msg.str());
    log::warn(msg.str());
  }
  Vector deg = degrees(w.w);
  if ((deg.array() <= 0.0).any()) throw DefinitenessError("klpp: degree matrix is singular (isolated sample)");
  Matrix l = laplacian(w.w);
  if (l.cwiseAbs().maxCoeff() == 0.0)
    throw DegenerateError("klpp: Laplacian vanishes, every eigenvalue is 0");
  EigResult sel = select(gen_sym_eig(l, Matrix(deg.asDiagonal())), {d, Side::smallest, skip_first});
  KernelFit out = from_vectors(sel.vectors.transpose(), sel.values);
  out.warnings = std::move(warnings);
  return out;
}

KernelFit fit_konpp(const Gram& k, const WeightGraph& w, std::size_t d, bool skip_first) {
  require_symmetric(k.k, "konpp");
  if (w.size() != k.size()) throw ShapeError("konpp: weight matrix and Gram matrix sizes differ");
  require_d(d + (skip_first ? 1 : 0), k.size(), "konpp");
  EigResult ke = sym_eig(k.k);
  const double scale = std::max(1.0, ke.values.cwiseAbs().maxCoeff());
  if (ke.values.minCoeff() < -kPsdTol * scale)
    throw DefinitenessError("konpp: Gram matrix is indefinite (min eigenvalue " + std::to_string(ke.values.minCoeff()) +
                            ")");
  Vector root = ke.values.cwiseMax(0.0).cwiseSqrt();
  Matrix half = ke.vectors * root.asDiagonal() * ke.vectors.transpose();
  Matrix s = half * reconstruction_operator(w.w) * half;
  EigResult sel = select(sym_eig(s), {d, Side::smallest, skip_first});
  Matrix z = half * sel.vectors;
  return from_vectors(z.transpose(), sel.values);
}

KernelFit fit_kolpp(const Gram& k, std::size_t d, bool skip_first) {
  require_symmetric(k.k, "kolpp");
  require_d(d + (skip_first ? 1 : 0), k.size(), "kolpp");
  EigResult sel = select(sym_eig(k.k), {d, Side::smallest, skip_first});
  return from_vectors(sel.vectors.transpose(), sel.values);
}

void write_gram_csv(const std::filesystem::path& path, const Gram& k) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path.string());
  out << k.size() << '\n' << std::setprecision(17);
  for (Eigen::Index i = 0; i < k.k.rows(); ++i) {
    for (Eigen::Index j = 0; j < k.k.cols(); ++j) out << (j ? "," : "") << k.k(i, j);
    out << '\n';
  }
  if (!out) throw FormatError("write failed for " + path.string());
}

Gram read_gram_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw FormatError(path.string() + ": empty file");
  long long n = 0;
  try {
    std::size_t used = 0;
    n = std::stoll(line, &used);
    if (used != line.size() && line.find_first_not_of(" \r", used) != std::string::npos) throw std::invalid_argument("");
  } catch (const std::exception&) {
    throw FormatError(path.string() + ": first line must hold the matrix size");
  }
  if (n < 1) throw FormatError(path.string() + ": matrix size must be positive");
  Gram g;
  g.k.resize(n, n);
  for (long long i = 0; i < n; ++i) {
    if (!std::getline(in, line)) throw FormatError(path.string() + ": expected " + std::to_string(n) + " rows");
    std::stringstream row(line);
    std::string cell;
    long long j = 0;
    while (std::getline(row, cell, ',')) {
      if (j >= n) throw FormatError(path.string() + ": row " + std::to_string(i + 1) + " has too many values");
      try {
        std::size_t used = 0;
        g.k(i, j) = std::stod(cell, &used);
      } catch (const std::exception&) {
        throw FormatError(path.string() + ": bad value '" + cell + "' in row " + std::to_string(i + 1));
      }
      if (!std::isfinite(g.k(i, j))) throw FormatError(path.string() + ": non-finite value in row " + std::to_string(i + 1));
      ++j;
    }
    if (j != n) throw FormatError(path.string() + ": row " + std::to_string(i + 1) + " has " + std::to_string(j) + " values");
  }
  require_symmetric(g.k, "read_gram_csv");
  return g;
}

}  // namespace edr
