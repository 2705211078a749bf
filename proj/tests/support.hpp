#pragma once

// Small helpers shared by the test binaries: literal elements, seeded
// generators and a few brute-force reference computations that avoid the
// library's own solvers.

#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "ncfractal/algebra.hpp"
#include "ncfractal/random.hpp"

namespace testing {

using namespace ncfractal;
using namespace std::complex_literals;

inline Element m2(Complex a, Complex b, Complex c, Complex d) {
  CMatrix m(2, 2);
  m << a, b, c, d;
  return Element({m});
}

inline Element sigma_x() { return m2(0, 1, 1, 0); }
inline Element sigma_y() { return m2(0, -1i, 1i, 0); }
inline Element sigma_z() { return m2(1, 0, 0, -1); }
inline Element id2() { return m2(1, 0, 0, 1); }

inline Element diag(std::vector<double> v) { return Element::diagonal(v); }

/// x (+) y as a two-block element.
inline Element direct_sum(const Element& x, const Element& y) {
  std::vector<CMatrix> blocks = x.blocks();
  for (const auto& b : y.blocks()) blocks.push_back(b);
  return Element(std::move(blocks));
}

inline Element scalar_block(Complex z) { return Element({CMatrix::Constant(1, 1, z)}); }

inline bool close(const Element& a, const Element& b, double tol) { return max_abs_diff(a, b) <= tol; }

/// Projection onto the column span of v (one block).
inline CMatrix span_projector(const CMatrix& v) {
  Eigen::ColPivHouseholderQR<CMatrix> qr(v);
  qr.setThreshold(1e-10);
  const Eigen::Index r = qr.rank();
  const CMatrix q = CMatrix(qr.householderQ()).leftCols(r);
  return q * q.adjoint();
}

/// Meet by repeated squaring of p q p: its powers converge to the projection
/// onto range(p) /\ range(q). After 2^24 powers any eigenvalue below
/// 1 - 1e-5 has collapsed to 0, so rounding at 1/2 gives the limit.
inline Element meet_by_powers(const Element& p, const Element& q) {
  std::vector<CMatrix> out;
  for (int b = 0; b < p.num_blocks(); ++b) {
    CMatrix x = p.block(b) * q.block(b) * p.block(b);
    for (int it = 0; it < 24; ++it) {
      x = x * x;
      x = 0.5 * (x + x.adjoint()).eval();
    }
    Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (x + x.adjoint()));
    CMatrix r = CMatrix::Zero(x.rows(), x.cols());
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
      if (es.eigenvalues()(i) > 0.5) r += es.eigenvectors().col(i) * es.eigenvectors().col(i).adjoint();
    }
    out.push_back(r);
  }
  return Element(out);
}

/// max <c, b> over 1-Lipschitz potentials on a connected metric space of at
/// most 5 points, by enumerating vertices of the Lipschitz polytope: with b_0
/// pinned at 0, each vertex is fixed by a spanning tree of tight edges.
inline double lipschitz_vertex_max(const RMatrix& d, const RVector& c) {
  const int n = static_cast<int>(d.rows());
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) edges.emplace_back(i, j);
  const int m = static_cast<int>(edges.size());
  double best = -1e300;
  for (int mask = 0; mask < (1 << m); ++mask) {
    if (__builtin_popcount(static_cast<unsigned>(mask)) != n - 1) continue;
    std::vector<int> chosen;
    for (int e = 0; e < m; ++e)
      if (mask & (1 << e)) chosen.push_back(e);
    for (int signs = 0; signs < (1 << (n - 1)); ++signs) {
      // Propagate potentials from point 0 along the chosen edges.
      std::vector<double> b(static_cast<std::size_t>(n), 0.0);
      std::vector<bool> set(static_cast<std::size_t>(n), false);
      set[0] = true;
      bool grew = true;
      while (grew) {
        grew = false;
        for (int k = 0; k < n - 1; ++k) {
          const auto [i, j] = edges[chosen[k]];
          const double step = ((signs >> k) & 1) ? d(i, j) : -d(i, j);
          if (set[i] && !set[j]) {
            b[j] = b[i] + step;
            set[j] = grew = true;
          } else if (set[j] && !set[i]) {
            b[i] = b[j] - step;
            set[i] = grew = true;
          }
        }
      }
      bool tree = true;
      for (bool s : set) tree = tree && s;
      if (!tree) continue;
      bool feasible = true;
      for (int i = 0; i < n && feasible; ++i)
        for (int j = 0; j < n; ++j)
          if (std::abs(b[i] - b[j]) > d(i, j) + 1e-12) feasible = false;
      if (!feasible) continue;
      double v = 0.0;
      for (int i = 0; i < n; ++i) v += c(i) * b[i];
      best = std::max(best, v);
    }
  }
  return best;
}

/// Random probability vector; a positive `floor` keeps entries away from 0.
inline std::vector<double> random_probabilities(int n, Rng& rng, double floor = 0.0) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> p(static_cast<std::size_t>(n));
  double s = 0.0;
  for (auto& x : p) s += (x = floor + u(rng));
  for (auto& x : p) x /= s;
  return p;
}

}  // namespace testing
