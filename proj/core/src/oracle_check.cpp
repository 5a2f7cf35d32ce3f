#include <algorithm>
#include <cmath>

#include "edr/error.hpp"
#include "edr/evaluation.hpp"
#include "edr/oracle.hpp"

namespace edr::oracle {

namespace {

double rate(const Matrix& train, const std::vector<int>& labels, const Matrix& test, const std::vector<int>& truth) {
  return recognition_rate(nn_classify(train, labels, test), truth);
}

}  // namespace

OracleReport check_method(const MethodConfig& m, const DataSet& train, const DataSet& test, std::size_t d) {
  static const char* supported[] = {"pca", "olpp", "onpp", "lpp", "npp", "le", "lle"};
  if (m.multiweight || std::none_of(std::begin(supported), std::end(supported), [&](const char* s) { return m.method == s; }))
    throw ConfigError("oracle check does not cover " + method_id(m));
  const auto& labels = train.require_labels("oracle check");
  const auto& truth = test.require_labels("oracle check");

  FittedMethod f = fit_method(m, train, d);
  Output tensor_side;
  tensor_side.embedding = f.train.flat();
  if (const auto* p = std::get_if<ProjectionModel>(&f.model)) tensor_side.basis = projection_matrix(*p);
  tensor_side.ir = rate(tensor_side.embedding, labels, embed(f, test).flat(), truth);

  const Matrix x = train.flat();
  const Matrix xt = test.flat();
  const Matrix w = m.method == "pca" ? Matrix() : Matrix(build_graph(m, train.x(), labels).w);
  MatrixOptions opt;
  opt.skip_first = m.skip_first.value_or(false);
  opt.restrict_tol = m.linear.restrict_tol;
  MatrixResult r = matrix_method(m.method, x, w, d, opt);

  Output ref;
  ref.residual = r.residual;
  Matrix ref_test;
  if (m.method == "le") {
    const auto& em = std::get<EmbeddingModel>(f.model);
    ref.embedding = r.embedding;
    const Vector deg = w.rowwise().sum();
    const Matrix y_hat = r.embedding * deg.cwiseSqrt().asDiagonal();
    const Matrix aff = le_test_affinities(em, test.x());
    ref_test = Matrix::Zero(r.embedding.rows(), aff.cols());
    for (Eigen::Index t = 0; t < aff.cols(); ++t) {
      const double dt = aff.col(t).sum();
      if (!(dt > 0.0)) continue;
      Vector kn = aff.col(t).cwiseQuotient((dt * deg).cwiseSqrt());
      for (Eigen::Index j = 0; j < y_hat.rows(); ++j)
        ref_test(j, t) = y_hat.row(j).dot(kn) / (1.0 - r.eigenvalues(j)) / std::sqrt(dt);
    }
  } else if (m.method == "lle") {
    const auto& em = std::get<EmbeddingModel>(f.model);
    ref.embedding = r.embedding;
    ref_test = r.embedding * oos_lle_weights(em, test.x()).transpose();
  } else {
    ref.basis = r.basis;
    ref.embedding = r.basis.transpose() * x;
    ref_test = r.basis.transpose() * xt;
  }
  ref.ir = rate(ref.embedding, labels, ref_test, truth);
  return compare(method_id(m), tensor_side, ref);
}

}  // namespace edr::oracle
