#include "edr/dr_linear.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include "edr/error.hpp"
#include "edr/log.hpp"
#include "edr/spectral.hpp"

namespace edr {

namespace {

std::size_t feature_order(const Tensor& x) {
  if (x.order() < 2) throw ShapeError("expected a tensor with feature modes followed by a sample mode");
  return x.order() - 1;
}

ProjectionModel make_model(LinearMethod method, const Shape& features, Matrix p, Vector evals, bool skip) {
  normalize_signs(p);
  ProjectionModel m;
  m.method = method;
  m.feature_shape = features;
  m.skip_first = skip;
  const auto d = static_cast<std::size_t>(p.cols());
  m.projections.emplace_back(features.concat(Shape{d}), std::vector<double>(p.data(), p.data() + p.size()));
  m.eigenvalues.push_back(std::move(evals));
  return m;
}

Matrix sandwich(const Matrix& c, const Matrix& a) {
  Matrix s = c * a * c.transpose();
  return (s + s.transpose()) * 0.5;
}

void require_square_graph(const WeightGraph& w, Eigen::Index n, const char* who) {
  if (w.w.rows() != n || w.w.cols() != n)
    throw ShapeError(std::string(who) + ": weight matrix is " + std::to_string(w.w.rows()) + "x" +
                     std::to_string(w.w.cols()) + " for " + std::to_string(n) + " samples");
}

void require_symmetric(const Matrix& w, const char* who) {
  const double scale = w.size() ? w.cwiseAbs().maxCoeff() : 0.0;
  if ((w - w.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw ShapeError(std::string(who) + " needs a symmetric weight matrix");
}

void require_nonzero(const Matrix& op, const char* who) {
  if (op.size() == 0 || op.cwiseAbs().maxCoeff() == 0.0)
    throw RankError(std::string(who) + ": the graph operator vanishes, no informative eigenpairs");
}

const Reduction& reduced_or(const Tensor& x, const Reduction* pre, double tol, Reduction& storage) {
  if (pre) {
    if (pre->c.cols() != static_cast<Eigen::Index>(x.extent(x.order() - 1)))
      throw ShapeError("precomputed reduction does not match the sample count");
    return *pre;
  }
  storage = reduce(x, tol);
  return storage;
}

ProjectionModel finish_smallest(LinearMethod method, const Tensor& x, const Reduction& red, const EigResult& full,
                                std::size_t d, const LinearOptions& opt) {
  EigResult sel = select(full, {d, Side::smallest, opt.skip_first});
  return make_model(method, x.shape().head(feature_order(x)), red.q * sel.vectors, sel.values, opt.skip_first);
}

// I - W as a dense matrix.
Matrix identity_minus(const Matrix& w) {
  Matrix a = -w;
  a.diagonal().array() += 1.0;
  return a;
}

template <class F>
ProjectionModel with_slice_context(std::size_t r, F&& f) {
  auto tag = [r](const std::exception& e) { return "slice " + std::to_string(r) + ": " + e.what(); };
  try {
    return f();
  } catch (const DefinitenessError& e) {
    throw DefinitenessError(tag(e));
  } catch (const RankError& e) {
    throw RankError(tag(e));
  } catch (const DegenerateError& e) {
    throw DegenerateError(tag(e));
  } catch (const NumericalError& e) {
    throw NumericalError(tag(e));
  } catch (const ShapeError& e) {
    throw ShapeError(tag(e));
  } catch (const RangeError& e) {
    throw RangeError(tag(e));
  } catch (const ConfigError& e) {
    throw ConfigError(tag(e));
  }
}

}  // namespace

std::string to_string(LinearMethod m) {
  switch (m) {
    case LinearMethod::pca: return "pca";
    case LinearMethod::spca: return "spca";
    case LinearMethod::onpp: return "onpp";
    case LinearMethod::olpp: return "olpp";
    case LinearMethod::lpp: return "lpp";
    case LinearMethod::npp: return "npp";
  }
  return "?";
}

LinearMethod parse_linear_method(const std::string& name) {
  for (LinearMethod m : {LinearMethod::pca, LinearMethod::spca, LinearMethod::onpp, LinearMethod::olpp,
                         LinearMethod::lpp, LinearMethod::npp})
    if (to_string(m) == name) return m;
  throw ConfigError("unknown linear method '" + name + "'");
}

std::size_t ProjectionModel::d() const {
  if (projections.empty()) return 0;
  const Tensor& p = projections.front();
  return p.extent(p.order() - 1);
}

Reduction reduce(const Tensor& x, double tol) {
  auto a = x.matrix(feature_order(x));
  Reduction r;
  r.q = range_basis(a, tol);
  r.c = r.q.transpose() * a;
  return r;
}

Matrix delta_label_kernel(std::span<const int> labels) {
  const auto n = static_cast<Eigen::Index>(labels.size());
  Matrix k(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i)
      k(i, j) = labels[static_cast<std::size_t>(i)] == labels[static_cast<std::size_t>(j)] ? 1.0 : 0.0;
  return k;
}

ProjectionModel fit_pca(const Tensor& x, std::size_t d, const LinearOptions& opt) {
  const std::size_t mo = feature_order(x);
  auto a = x.matrix(mo);
  const Eigen::Index m = a.rows(), n = a.cols();
  if (d < 1 || static_cast<Eigen::Index>(d) > n - 1 || static_cast<Eigen::Index>(d) > m)
    throw RankError("pca: d = " + std::to_string(d) + " exceeds the available components");
  const auto dd = static_cast<Eigen::Index>(d);
  Matrix z = a.colwise() - a.rowwise().mean();

  const bool primal = opt.pca_route == PcaRoute::primal || (opt.pca_route == PcaRoute::automatic && m <= n);
  Matrix p(m, dd);
  Vector ev(dd);
  if (primal) {
    Eigen::BDCSVD<Matrix> svd(z, Eigen::ComputeThinU);
    const Vector& s = svd.singularValues();
    if (!(s(dd - 1) > opt.restrict_tol * s(0)))
      throw RankError("pca: centred data has rank below d = " + std::to_string(d));
    p = svd.matrixU().leftCols(dd);
    ev = s.head(dd).cwiseAbs2();
  } else {
    EigResult g = select(sym_eig(z.transpose() * z), {d, Side::largest, false});
    const double top = g.values(0);
    for (Eigen::Index j = 0; j < dd; ++j) {
      if (!(g.values(j) > opt.restrict_tol * opt.restrict_tol * top))
        throw RankError("pca: centred data has rank below d = " + std::to_string(d));
      Vector col = z * g.vectors.col(j);
      p.col(j) = col / col.norm();
    }
    ev = g.values;
  }
  return make_model(LinearMethod::pca, x.shape().head(mo), std::move(p), std::move(ev), false);
}

ProjectionModel fit_spca(const Tensor& x, const Matrix& label_kernel, std::size_t d, const LinearOptions& opt,
                         const Reduction* pre) {
  const auto n = static_cast<Eigen::Index>(x.extent(x.order() - 1));
  if (label_kernel.rows() != n || label_kernel.cols() != n) throw ShapeError("spca: label kernel size mismatch");
  Reduction own;
  const Reduction& red = reduced_or(x, pre, opt.restrict_tol, own);
  // H K H by explicit row/column mean removal
  Matrix k = label_kernel;
  Vector rm = k.rowwise().mean();
  Eigen::RowVectorXd cm = k.colwise().mean();
  double all = k.mean();
  k.colwise() -= rm;
  k.rowwise() -= cm;
  k.array() += all;
  EigResult sel = select(sym_eig(sandwich(red.c, k)), {d, Side::largest, opt.skip_first});
  return make_model(LinearMethod::spca, x.shape().head(feature_order(x)), red.q * sel.vectors, sel.values,
                    opt.skip_first);
}

ProjectionModel fit_onpp(const Tensor& x, const WeightGraph& w, std::size_t d, const LinearOptions& opt,
                         const Reduction* pre) {
  const auto n = static_cast<Eigen::Index>(x.extent(x.order() - 1));
  require_square_graph(w, n, "onpp");
  Matrix iw = identity_minus(w.w);
  require_nonzero(iw, "onpp");
  Reduction own;
  const Reduction& red = reduced_or(x, pre, opt.restrict_tol, own);
  // left singular vectors of Z = C (I - W)^T, smallest first
  Matrix z = red.c * iw.transpose();
  Eigen::BDCSVD<Matrix> svd(z, Eigen::ComputeThinU);
  const Eigen::Index r = z.rows();
  EigResult full{Vector(r), Matrix(r, r)};
  const Vector& s = svd.singularValues();
  for (Eigen::Index i = 0; i < r; ++i) {
    full.values(i) = i < s.size() ? s(r - 1 - i) * s(r - 1 - i) : 0.0;
    full.vectors.col(i) = svd.matrixU().col(r - 1 - i);
  }
  return finish_smallest(LinearMethod::onpp, x, red, full, d, opt);
}

ProjectionModel fit_olpp(const Tensor& x, const WeightGraph& w, std::size_t d, const LinearOptions& opt,
                         const Reduction* pre) {
  const auto n = static_cast<Eigen::Index>(x.extent(x.order() - 1));
  require_square_graph(w, n, "olpp");
  require_symmetric(w.w, "olpp");
  Matrix l = laplacian(w.w);
  require_nonzero(l, "olpp");
  Reduction own;
  const Reduction& red = reduced_or(x, pre, opt.restrict_tol, own);
  return finish_smallest(LinearMethod::olpp, x, red, sym_eig(sandwich(red.c, l)), d, opt);
}

ProjectionModel fit_lpp(const Tensor& x, const WeightGraph& w, std::size_t d, const LinearOptions& opt,
                        const Reduction* pre) {
  const auto n = static_cast<Eigen::Index>(x.extent(x.order() - 1));
  require_square_graph(w, n, "lpp");
  require_symmetric(w.w, "lpp");
  Matrix l = laplacian(w.w);
  Vector deg = degrees(w.w);
  Reduction own;
  const Reduction& red = reduced_or(x, pre, opt.restrict_tol, own);
  Matrix b = red.c * deg.asDiagonal() * red.c.transpose();
  return finish_smallest(LinearMethod::lpp, x, red, gen_sym_eig(sandwich(red.c, l), b, opt.ridge), d, opt);
}

ProjectionModel fit_npp(const Tensor& x, const WeightGraph& w, std::size_t d, const LinearOptions& opt,
                        const Reduction* pre) {
  const auto n = static_cast<Eigen::Index>(x.extent(x.order() - 1));
  require_square_graph(w, n, "npp");
  Reduction own;
  const Reduction& red = reduced_or(x, pre, opt.restrict_tol, own);
  Matrix z = red.c * identity_minus(w.w).transpose();
  Matrix a = z * z.transpose();
  a = (a + a.transpose()) * 0.5;
  Matrix b = red.c * red.c.transpose();
  return finish_smallest(LinearMethod::npp, x, red, gen_sym_eig(a, b, opt.ridge), d, opt);
}

ProjectionModel fit_graph_method(LinearMethod method, const Tensor& x, const WeightGraph& w, std::size_t d,
                                 const LinearOptions& opt, const Reduction* pre) {
  switch (method) {
    case LinearMethod::onpp: return fit_onpp(x, w, d, opt, pre);
    case LinearMethod::olpp: return fit_olpp(x, w, d, opt, pre);
    case LinearMethod::lpp: return fit_lpp(x, w, d, opt, pre);
    case LinearMethod::npp: return fit_npp(x, w, d, opt, pre);
    default: throw ConfigError(to_string(method) + " is not a graph-based method");
  }
}

Tensor feature_slice(const Tensor& x, std::size_t r) {
  if (x.order() < 3) throw ShapeError("slicing needs at least two feature modes");
  return fix_mode(x, x.order() - 1, r);
}

ProjectionModel fit_multiweight(const Tensor& x, std::span<const WeightGraph> graphs, std::size_t d,
                                LinearMethod method, const LinearOptions& opt) {
  if (x.order() < 3) throw ShapeError("multi-weight fitting needs at least two feature modes");
  const std::size_t slices = x.extent(x.order() - 2);
  if (graphs.size() != slices)
    throw ShapeError("multi-weight: " + std::to_string(graphs.size()) + " graphs for " + std::to_string(slices) +
                     " slices");
  ProjectionModel out;
  out.method = method;
  out.feature_shape = x.shape().head(x.order() - 1);
  out.multiweight = true;
  out.skip_first = opt.skip_first;
  for (std::size_t r = 1; r <= slices; ++r) {
    const Tensor xs = feature_slice(x, r);
    const Reduction red = reduce(xs, opt.restrict_tol);
    const std::size_t rank = static_cast<std::size_t>(red.q.cols());
    const std::size_t skip = opt.skip_first ? 1 : 0;
    // A slice of rank below d (constant image borders, say) cannot supply d
    // directions inside its sample span. Directions orthogonal to every
    // sample reach objective 0 and leave 1-NN distances unchanged, so the
    // fitted part is completed with those.
    const std::size_t fitted = rank > skip ? std::min(d, rank - skip) : 0;
    Matrix p(static_cast<Eigen::Index>(xs.shape().head(xs.order() - 1).numel()), static_cast<Eigen::Index>(d));
    Vector lambda = Vector::Zero(static_cast<Eigen::Index>(d));
    if (fitted > 0) {
      ProjectionModel m = with_slice_context(
          r, [&] { return fit_graph_method(method, xs, graphs[r - 1], fitted, opt, &red); });
      p.leftCols(static_cast<Eigen::Index>(fitted)) = projection_matrix(m);
      lambda.head(static_cast<Eigen::Index>(fitted)) = m.eigenvalues.front();
    }
    if (fitted < d) {
      const auto f = p.rows();
      const auto need = static_cast<Eigen::Index>(d - fitted);
      if (static_cast<Eigen::Index>(rank) + need > f)
        throw RankError("slice " + std::to_string(r) + ": " + std::to_string(d) + " directions exceed " +
                        std::to_string(f) + " features");
      Matrix full = Matrix::Identity(f, static_cast<Eigen::Index>(rank) + need);
      if (rank > 0) full = Eigen::HouseholderQR<Matrix>(red.q).householderQ() * full;
      p.rightCols(need) = full.rightCols(need);
      log::debug("multi-weight slice " + std::to_string(r) + ": rank " + std::to_string(rank) + ", " +
                 std::to_string(need) + " directions completed outside the sample span");
    }
    out.projections.push_back(Tensor(xs.shape().head(xs.order() - 1).concat(Shape{d}),
                                     std::vector<double>(p.data(), p.data() + p.size())));
    out.eigenvalues.push_back(std::move(lambda));
  }
  return out;
}

Matrix projection_matrix(const ProjectionModel& model, std::size_t slice) {
  if (slice >= model.projections.size()) throw RangeError("projection slice out of range");
  const Tensor& p = model.projections[slice];
  return p.matrix(p.order() - 1);
}

Embedding transform(const ProjectionModel& model, const Tensor& x) {
  const std::size_t mo = feature_order(x);
  if (!(x.shape().head(mo) == model.feature_shape))
    throw ShapeError("transform: data features " + x.shape().head(mo).str() + " do not match model " +
                     model.feature_shape.str());
  const std::size_t n = x.extent(mo);
  const std::size_t d = model.d();
  if (!model.multiweight) {
    Tensor y(Shape{d, n});
    y.matrix(1).noalias() = projection_matrix(model).transpose() * x.matrix(mo);
    return {std::move(y)};
  }
  const std::size_t slices = model.projections.size();
  Tensor y(Shape{d, slices, n});
  for (std::size_t r = 1; r <= slices; ++r) {
    Tensor xs = feature_slice(x, r);
    Matrix yr = projection_matrix(model, r - 1).transpose() * xs.matrix(xs.order() - 1);
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = 0; i < d; ++i)
        y[i + d * ((r - 1) + slices * j)] = yr(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  return {std::move(y)};
}

ProjectionModel truncate(const ProjectionModel& model, std::size_t d) {
  if (d < 1 || d > model.d()) throw RangeError("truncate: d = " + std::to_string(d) + " out of range");
  ProjectionModel out = model;
  for (std::size_t s = 0; s < model.projections.size(); ++s) {
    const Tensor& p = model.projections[s];
    const Shape fs = p.shape().head(p.order() - 1);
    auto pm = p.matrix(p.order() - 1);
    Matrix head = pm.leftCols(static_cast<Eigen::Index>(d));
    out.projections[s] = Tensor(fs.concat(Shape{d}), std::vector<double>(head.data(), head.data() + head.size()));
    out.eigenvalues[s] = model.eigenvalues[s].head(static_cast<Eigen::Index>(d));
  }
  return out;
}

}  // namespace edr
