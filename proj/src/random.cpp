#include "ncfractal/random.hpp"

namespace ncfractal {

namespace {

CMatrix ginibre(int rows, int cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  CMatrix g(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      const double re = normal(rng);
      const double im = normal(rng);
      g(i, j) = Complex(re, im);
    }
  }
  return g;
}

}  // namespace

Element random_self_adjoint(const Algebra& alg, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  RVector v(alg.real_dim());
  for (Eigen::Index k = 0; k < v.size(); ++k) v(k) = normal(rng);
  return alg.from_coords(v);
}

Element random_unitary(const Algebra& alg, Rng& rng) {
  std::vector<CMatrix> blocks;
  for (int n : alg.block_dims()) {
    Eigen::HouseholderQR<CMatrix> qr(ginibre(n, n, rng));
    CMatrix q = qr.householderQ() * CMatrix::Identity(n, n);
    blocks.push_back(std::move(q));
  }
  return Element(std::move(blocks));
}

State random_state(const Algebra& alg, Rng& rng, bool rank_one) {
  std::uniform_real_distribution<double> unif(0.05, 1.0);
  std::vector<CMatrix> blocks;
  double total = 0.0;
  for (int n : alg.block_dims()) {
    CMatrix g = ginibre(n, rank_one ? 1 : n, rng);
    CMatrix rho = g * g.adjoint();
    rho *= unif(rng) / rho.trace().real();
    total += rho.trace().real();
    blocks.push_back(std::move(rho));
  }
  for (auto& b : blocks) b /= total;
  return State::from_density(Element(std::move(blocks)));
}

Projection random_projection(const Algebra& alg, Rng& rng) {
  std::vector<CMatrix> blocks;
  for (int n : alg.block_dims()) {
    std::uniform_int_distribution<int> rank_dist(0, n);
    const int r = rank_dist(rng);
    CMatrix p = CMatrix::Zero(n, n);
    if (r > 0) {
      Eigen::HouseholderQR<CMatrix> qr(ginibre(n, r, rng));
      CMatrix q = qr.householderQ() * CMatrix::Identity(n, r);
      p = q * q.adjoint();
    }
    blocks.push_back(std::move(p));
  }
  return Projection::from_element(Element(std::move(blocks)));
}

}  // namespace ncfractal
