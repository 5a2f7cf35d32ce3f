#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "edr/dr_kernel.hpp"
#include "edr/dr_nonlinear.hpp"
#include "edr/error.hpp"
#include "edr/spectral.hpp"
#include "oracles.hpp"

using namespace edr;
using edr::testing::max_abs;
using edr::testing::projector_gap;

namespace {

Tensor centred_samples(const Shape& s, std::mt19937_64& rng) {
  Tensor x = edr::testing::random_tensor(s, rng);
  auto a = x.matrix(s.order() - 1);
  Vector mean = a.rowwise().mean();
  a.colwise() -= mean;
  return x;
}

}  // namespace

TEST(Gram, LinearOnOrthonormalSlicesIsIdentity) {
  std::mt19937_64 rng(1);
  Matrix q = edr::testing::random_orthogonal(12, rng).leftCols(5);
  Tensor x(Shape{3, 4, 5});
  x.matrix(2) = q;
  EXPECT_LT(max_abs(gram(x, {KernelKind::linear}).k - Matrix::Identity(5, 5)), 1e-12);
}

TEST(Gram, GaussianDiagonalAndSymmetry) {
  std::mt19937_64 rng(2);
  Tensor x = edr::testing::random_tensor(Shape{2, 3, 2, 9}, rng);
  Gram g = gram(x, {KernelKind::gaussian, 1.5});
  EXPECT_LT((g.k.diagonal().array() - 1.0).abs().maxCoeff(), 1e-15);
  EXPECT_EQ(g.k, g.k.transpose());
  EXPECT_GT(min_eigenvalue(g.k), -1e-8);
  // Entrywise against the definition.
  auto a = x.matrix(3);
  EXPECT_NEAR(g.k(2, 7), std::exp(-(a.col(2) - a.col(7)).squaredNorm() / 2.25), 1e-14);
}

TEST(Gram, PolynomialDegreeOneIsLinear) {
  std::mt19937_64 rng(3);
  Tensor x = edr::testing::random_tensor(Shape{4, 3, 7}, rng);
  KernelSpec p{KernelKind::polynomial};
  p.degree = 1;
  p.offset = 0.0;
  EXPECT_LT(max_abs(gram(x, p).k - gram(x, {KernelKind::linear}).k), 1e-12);
}

TEST(Gram, OtherKernelsEntrywise) {
  std::mt19937_64 rng(4);
  Tensor x = edr::testing::random_tensor(Shape{3, 2, 6}, rng);
  auto a = x.matrix(2);
  const double ip = a.col(1).dot(a.col(4));
  const double dist = (a.col(1) - a.col(4)).norm();
  KernelSpec lap{KernelKind::laplacian, 2.0};
  EXPECT_NEAR(gram(x, lap).k(1, 4), std::exp(-dist / 2.0), 1e-14);
  KernelSpec sig{KernelKind::sigmoid};
  sig.slope = 0.3;
  sig.offset = -0.1;
  EXPECT_NEAR(gram(x, sig).k(1, 4), std::tanh(0.3 * ip - 0.1), 1e-14);
  KernelSpec poly{KernelKind::polynomial};
  poly.degree = 3;
  EXPECT_NEAR(gram(x, poly).k(1, 4), std::pow(ip + 1.0, 3), 1e-10);
}

TEST(Gram, InvalidParameters) {
  std::mt19937_64 rng(5);
  Tensor x = edr::testing::random_tensor(Shape{3, 5}, rng);
  EXPECT_THROW(gram(x, {KernelKind::gaussian, 0.0}), RangeError);
  EXPECT_THROW(gram(x, {KernelKind::laplacian, -1.0}), RangeError);
  KernelSpec p{KernelKind::polynomial};
  p.degree = 0;
  EXPECT_THROW(gram(x, p), RangeError);
  EXPECT_THROW(parse_kernel_kind("rbf"), ConfigError);
  EXPECT_EQ(parse_kernel_kind("sigmoid"), KernelKind::sigmoid);
}

TEST(CenterGram, MatchesFourTermExpansion) {
  std::mt19937_64 rng(6);
  Matrix k = edr::testing::random_symmetric(9, rng);
  const double n = 9;
  Matrix ones = Matrix::Ones(9, 9);
  Matrix ref = k - ones * k / n - k * ones / n + ones * k * ones / (n * n);
  Gram c = center_gram({k});
  EXPECT_TRUE(c.centered);
  EXPECT_LT(max_abs(c.k - ref), 1e-12);
  EXPECT_LT(c.k.rowwise().sum().cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_LT(c.k.colwise().sum().cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_LT(max_abs(center_gram(c).k - c.k), 1e-12);
}

TEST(CenterGram, ConstantVanishes) {
  EXPECT_LT(max_abs(center_gram({Matrix::Ones(5, 5)}).k), 1e-15);
  Matrix bad = Matrix::Zero(3, 3);
  bad(0, 1) = 1;
  EXPECT_THROW(center_gram({bad}), ShapeError);
}

TEST(Kpca, LinearKernelMatchesPca) {
  std::mt19937_64 rng(7);
  Tensor x = centred_samples(Shape{3, 4, 20}, rng);
  KernelFit kf = fit_kpca(gram(x, {KernelKind::linear}), 5);
  ProjectionModel pca = fit_pca(x, 5);
  Matrix ypca = transform(pca, x).flat();
  Matrix ykp = kf.embedding.flat();
  EXPECT_LT(projector_gap(ykp.transpose(), ypca.transpose()), 1e-8);
  // Same coordinates up to sign per component.
  for (Eigen::Index j = 0; j < 5; ++j)
    EXPECT_LT(std::min((ykp.row(j) - ypca.row(j)).norm(), (ykp.row(j) + ypca.row(j)).norm()), 1e-8);
}

TEST(Kpca, EmbeddingGramReproducesDominantPart) {
  std::mt19937_64 rng(8);
  Tensor x = edr::testing::random_tensor(Shape{5, 12}, rng);
  Gram g = center_gram(gram(x, {KernelKind::gaussian}));
  KernelFit kf = fit_kpca(g, 11);
  Matrix y = kf.embedding.flat();
  // All positive eigenpairs kept: Y^T Y recovers the centred Gram matrix.
  EXPECT_LT(max_abs(y.transpose() * y - g.k), 1e-10);
}

TEST(Kpca, RankOneHasOneComponent) {
  Vector v(4);
  v << 1, -2, 3, -2;
  Gram g{v * v.transpose()};
  EXPECT_NO_THROW(fit_kpca(g, 1));
  EXPECT_THROW(fit_kpca(g, 2), RankError);
}

TEST(Kpca, WideGaussianApproachesLinear) {
  // exp(-|x-y|^2/s^2) = 1 - |x-y|^2/s^2 + O(s^-4); after centring the distance
  // term equals 2<x,y>/s^2 of the centred data.
  std::mt19937_64 rng(9);
  Tensor x = centred_samples(Shape{4, 15}, rng);
  KernelFit lin = fit_kpca(gram(x, {KernelKind::linear}), 2);
  KernelFit wide = fit_kpca(gram(x, {KernelKind::gaussian, 1e6}), 2);
  EXPECT_LT(projector_gap(lin.embedding.flat().transpose(), wide.embedding.flat().transpose()), 1e-3);
}

TEST(Klpp, MatchesLeGeneralisedProblem) {
  std::mt19937_64 rng(10);
  Tensor x = edr::testing::random_tensor(Shape{3, 3, 15}, rng);
  WeightGraph w = gaussian_weights(pairwise_sq_dists(x));
  KernelFit kf = fit_klpp(gram(x, {KernelKind::gaussian}), w, 3, true);
  EmbeddingModel le = fit_le(x, w, 3);
  EXPECT_LT(max_abs(kf.eigenvalues - le.eigenvalues), 1e-10);
  EXPECT_LT(projector_gap(kf.embedding.flat().transpose(), le.y.matrix(1).transpose()), 1e-8);
}

TEST(Klpp, CompleteTriangleByHand) {
  // K3 with unit weights: D = 2I, L = 3I - 11^T. Pairs: 0 (constant), 1.5 twice.
  Matrix w = Matrix::Ones(3, 3) - Matrix::Identity(3, 3);
  KernelFit kf = fit_klpp({Matrix::Identity(3, 3)}, {w}, 1);
  EXPECT_NEAR(kf.eigenvalues(0), 0.0, 1e-12);
  Vector z = kf.embedding.flat().row(0).transpose();
  // z^T D z = 1 with z constant gives z = 1/sqrt(6).
  EXPECT_LT((z.array() - 1.0 / std::sqrt(6.0)).abs().maxCoeff(), 1e-12);
  KernelFit second = fit_klpp({Matrix::Identity(3, 3)}, {w}, 1, true);
  EXPECT_NEAR(second.eigenvalues(0), 1.5, 1e-12);
}

TEST(Klpp, DegenerateGraphs) {
  Matrix self = Matrix::Identity(4, 4);
  EXPECT_THROW(fit_klpp({Matrix::Identity(4, 4)}, {self}, 1), DegenerateError);
  Matrix isolated = Matrix::Zero(4, 4);
  isolated(0, 1) = isolated(1, 0) = 1;
  EXPECT_THROW(fit_klpp({Matrix::Identity(4, 4)}, {isolated}, 1), DefinitenessError);
}

TEST(Klpp, WarnsOnIllConditionedGram) {
  Matrix w = Matrix::Ones(3, 3) - Matrix::Identity(3, 3);
  KernelFit kf = fit_klpp({Matrix::Ones(3, 3)}, {w}, 1);
  ASSERT_EQ(kf.warnings.size(), 1u);
}

TEST(Konpp, ZeroWeightsGiveSmallestOfK) {
  std::mt19937_64 rng(11);
  Matrix k = edr::testing::random_spd(8, rng);
  KernelFit kf = fit_konpp({k}, {Matrix::Zero(8, 8)}, 3);
  EigResult ke = sym_eig(k);
  EXPECT_LT(max_abs(kf.eigenvalues - ke.values.head(3)), 1e-10);
  EXPECT_LT(projector_gap(kf.embedding.flat().transpose(), ke.vectors.leftCols(3)), 1e-8);
}

TEST(Konpp, IdentityKernelIsMatrixOnpp) {
  std::mt19937_64 rng(12);
  Tensor x = edr::testing::random_tensor(Shape{4, 10}, rng);
  WeightGraph w = lle_weights(x, 3);
  KernelFit kf = fit_konpp({Matrix::Identity(10, 10)}, w, 4);
  EigResult m = sym_eig(reconstruction_operator(w.w));
  EXPECT_LT(max_abs(kf.eigenvalues - m.values.head(4)), 1e-10);
}

TEST(Konpp, ResidualOfBothForms) {
  std::mt19937_64 rng(13);
  Tensor x = edr::testing::random_tensor(Shape{3, 2, 14}, rng);
  Gram g = gram(x, {KernelKind::gaussian});
  WeightGraph w = lle_weights(x, 4);
  KernelFit kf = fit_konpp(g, w, 3);
  Matrix m = reconstruction_operator(w.w);
  Matrix z = kf.embedding.flat().transpose();
  for (Eigen::Index j = 0; j < 3; ++j) {
    Vector r = g.k * m * z.col(j) - kf.eigenvalues(j) * z.col(j);
    EXPECT_LT(r.norm(), 1e-8);
  }
}

TEST(Konpp, RejectsIndefiniteKernel) {
  Matrix k = Matrix::Identity(4, 4);
  k(3, 3) = -1;
  EXPECT_THROW(fit_konpp({k}, {Matrix::Zero(4, 4)}, 1), DefinitenessError);
}

TEST(Kolpp, DiagonalKernel) {
  Matrix k = Eigen::Vector3d(1, 2, 3).asDiagonal();
  KernelFit kf = fit_kolpp({k}, 1);
  Vector z = kf.embedding.flat().row(0).transpose();
  EXPECT_LT((z - Eigen::Vector3d(1, 0, 0)).norm(), 1e-12);
  KernelFit skipped = fit_kolpp({k}, 1, true);
  EXPECT_NEAR(skipped.eigenvalues(0), 2.0, 1e-12);
}

TEST(Kolpp, IdentityKernelIsDeterministic) {
  KernelFit a = fit_kolpp({Matrix::Identity(5, 5)}, 3);
  KernelFit b = fit_kolpp({Matrix::Identity(5, 5)}, 3);
  EXPECT_EQ(a.embedding.flat(), b.embedding.flat());
  EXPECT_LT((a.eigenvalues.array() - 1.0).abs().maxCoeff(), 1e-14);
}

TEST(Kolpp, Residual) {
  std::mt19937_64 rng(14);
  Matrix k = edr::testing::random_spd(10, rng);
  KernelFit kf = fit_kolpp({k}, 4);
  Matrix z = kf.embedding.flat().transpose();
  for (Eigen::Index j = 0; j < 4; ++j) EXPECT_LT((k * z.col(j) - kf.eigenvalues(j) * z.col(j)).norm(), 1e-8);
  EXPECT_THROW(fit_kolpp({k}, 11), RangeError);
}

TEST(Kernel, FitsDependOnlyOnGram) {
  std::mt19937_64 rng(15);
  Tensor x = edr::testing::random_tensor(Shape{3, 3, 12}, rng);
  Gram g = gram(x, {KernelKind::gaussian});
  auto path = std::filesystem::temp_directory_path() / "edr_gram_roundtrip.csv";
  write_gram_csv(path, g);
  Gram back = read_gram_csv(path);
  std::filesystem::remove(path);
  EXPECT_LT(max_abs(back.k - g.k), 1e-15);
  EXPECT_EQ(fit_kpca(back, 3).embedding.flat(), fit_kpca(g, 3).embedding.flat());
  EXPECT_EQ(fit_kolpp(back, 3).embedding.flat(), fit_kolpp(g, 3).embedding.flat());
}

TEST(Kernel, GramCsvRejectsMalformed) {
  auto path = std::filesystem::temp_directory_path() / "edr_gram_bad.csv";
  {
    std::ofstream out(path);
    out << "2\n1,0\n0\n";
  }
  EXPECT_THROW(read_gram_csv(path), FormatError);
  {
    std::ofstream out(path);
    out << "x\n";
  }
  EXPECT_THROW(read_gram_csv(path), FormatError);
  std::filesystem::remove(path);
}
