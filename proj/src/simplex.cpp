#include "simplex.hpp"

#include <stdexcept>
#include <vector>

namespace ncfractal::detail {

SimplexResult simplex_maximize(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& c) {
  const Eigen::Index m = a.rows();
  const Eigen::Index n = a.cols();
  if (b.size() != m || c.size() != n) throw std::invalid_argument("simplex: inconsistent dimensions");
  if (m > 0 && b.minCoeff() < 0.0) throw std::invalid_argument("simplex: right-hand side must be nonnegative");

  constexpr double eps = 1e-12;
  // Columns: n structural, m slack, then rhs. Last row holds reduced costs.
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m + 1, n + m + 1);
  t.topLeftCorner(m, n) = a;
  t.block(0, n, m, m).setIdentity();
  t.col(n + m).head(m) = b;
  t.row(m).head(n) = -c.transpose();

  std::vector<Eigen::Index> basis(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) basis[i] = n + i;

  SimplexResult result;
  for (int iter = 0;; ++iter) {
    if (iter > 100000) throw std::runtime_error("simplex: iteration limit exceeded");
    Eigen::Index enter = -1;
    for (Eigen::Index j = 0; j < n + m; ++j) {
      if (t(m, j) < -eps) {
        enter = j;
        break;
      }
    }
    if (enter < 0) break;

    Eigen::Index leave = -1;
    double best = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
      if (t(i, enter) > eps) {
        const double ratio = t(i, n + m) / t(i, enter);
        if (leave < 0 || ratio < best - eps || (ratio <= best + eps && basis[i] < basis[leave])) {
          leave = i;
          best = ratio;
        }
      }
    }
    if (leave < 0) {
      result.unbounded = true;
      return result;
    }

    t.row(leave) /= t(leave, enter);
    for (Eigen::Index i = 0; i <= m; ++i) {
      if (i != leave && t(i, enter) != 0.0) t.row(i) -= t(i, enter) * t.row(leave);
    }
    basis[leave] = enter;
  }

  result.x = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < m; ++i) {
    if (basis[i] < n) result.x(basis[i]) = t(i, n + m);
  }
  result.objective = c.dot(result.x);
  return result;
}

}  // namespace ncfractal::detail
