#include "oracles.hpp"

#include <Eigen/Dense>

namespace edr::testing {

bool next_index(Index& i, const Shape& s) {
  for (std::size_t k = 0; k < i.size(); ++k) {
    if (i[k] < s[k]) {
      ++i[k];
      return true;
    }
    i[k] = 1;
  }
  return false;
}

Tensor random_tensor(const Shape& s, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Tensor t(s);
  for (double& v : t.data()) v = g(rng);
  return t;
}

Matrix random_matrix(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Matrix m(r, c);
  for (Eigen::Index j = 0; j < c; ++j)
    for (Eigen::Index i = 0; i < r; ++i) m(i, j) = g(rng);
  return m;
}

Matrix random_symmetric(Eigen::Index n, std::mt19937_64& rng) {
  Matrix a = random_matrix(n, n, rng);
  return (a + a.transpose()) / 2.0;
}

Matrix random_spd(Eigen::Index n, std::mt19937_64& rng) {
  Matrix a = random_matrix(n, n, rng);
  return a * a.transpose() + static_cast<double>(n) * Matrix::Identity(n, n);
}

Matrix random_orthogonal(Eigen::Index n, std::mt19937_64& rng) {
  Eigen::HouseholderQR<Matrix> qr(random_matrix(n, n, rng));
  return qr.householderQ() * Matrix::Identity(n, n);
}

Shape random_shape(std::size_t order, std::size_t max_extent, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> e(1, max_extent);
  std::vector<std::size_t> d(order);
  for (auto& v : d) v = e(rng);
  return Shape(d);
}

double get(const Tensor& t, const Index& i) {
  std::size_t off = 0, stride = 1;
  for (std::size_t k = 0; k < i.size(); ++k) {
    off += (i[k] - 1) * stride;
    stride *= t.extent(k);
  }
  return t[off];
}

namespace {

void put(Tensor& t, const Index& i, double v) {
  std::size_t off = 0, stride = 1;
  for (std::size_t k = 0; k < i.size(); ++k) {
    off += (i[k] - 1) * stride;
    stride *= t.extent(k);
  }
  t[off] = v;
}

}  // namespace

Tensor nested_contract(const Tensor& a, const Tensor& b, std::size_t n) {
  std::size_t ka = a.order() - n;
  Shape si = a.shape().head(ka), sk = b.shape().head(n), sj = b.shape().tail(n);
  Tensor c(si.concat(sj));
  Index i(si.order(), 1);
  do {
    Index j(sj.order(), 1);
    do {
      double s = 0.0;
      Index k(sk.order(), 1);
      do {
        Index ia = i, ib = k;
        ia.insert(ia.end(), k.begin(), k.end());
        ib.insert(ib.end(), j.begin(), j.end());
        s += get(a, ia) * get(b, ib);
      } while (next_index(k, sk));
      Index ic = i;
      ic.insert(ic.end(), j.begin(), j.end());
      put(c, ic, s);
    } while (next_index(j, sj));
  } while (next_index(i, si));
  return c;
}

Tensor nested_mode_product(const Tensor& x, const Matrix& u, std::size_t mode) {
  std::size_t m = mode - 1;
  Shape so = x.shape().with_extent(m, static_cast<std::size_t>(u.rows()));
  Tensor y(so);
  Index o(so.order(), 1);
  do {
    double s = 0.0;
    Index xi = o;
    for (std::size_t im = 1; im <= x.extent(m); ++im) {
      xi[m] = im;
      s += get(x, xi) * u(static_cast<Eigen::Index>(o[m] - 1), static_cast<Eigen::Index>(im - 1));
    }
    put(y, o, s);
  } while (next_index(o, so));
  return y;
}

Vector kkt_reconstruction_weights(const Vector& x, const Matrix& nbrs, double ridge) {
  // minimise w^T G w with G = (x1^T - N)^T (x1^T - N), subject to 1^T w = 1
  const Eigen::Index k = nbrs.cols();
  Matrix diff = (-nbrs).colwise() + x;
  Matrix g = diff.transpose() * diff;
  g.diagonal().array() += ridge;
  Matrix kkt = Matrix::Zero(k + 1, k + 1);
  kkt.topLeftCorner(k, k) = 2.0 * g;
  kkt.topRightCorner(k, 1).setOnes();
  kkt.bottomLeftCorner(1, k).setOnes();
  Vector rhs = Vector::Zero(k + 1);
  rhs(k) = 1.0;
  Vector sol = kkt.fullPivLu().solve(rhs);
  return sol.head(k);
}

double max_abs(const Matrix& a) { return a.size() ? a.cwiseAbs().maxCoeff() : 0.0; }

double projector_gap(const Matrix& p1, const Matrix& p2) {
  auto orth = [](const Matrix& p) {
    Eigen::HouseholderQR<Matrix> qr(p);
    return Matrix(qr.householderQ() * Matrix::Identity(p.rows(), p.cols()));
  };
  Matrix a = orth(p1), b = orth(p2);
  return (a * a.transpose() - b * b.transpose()).norm();
}

}  // namespace edr::testing
