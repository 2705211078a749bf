#pragma once

// Dense tableau simplex for small problems
//   maximise c.x  subject to  A x <= b,  x >= 0,  with b >= 0,
// so the slack basis is feasible and no phase one is needed. Bland's rule
// prevents cycling on the degenerate vertices that metric LPs produce.

#include <Eigen/Dense>

namespace ncfractal::detail {

struct SimplexResult {
  double objective = 0.0;
  Eigen::VectorXd x;
  bool unbounded = false;
};

SimplexResult simplex_maximize(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& c);

}  // namespace ncfractal::detail
