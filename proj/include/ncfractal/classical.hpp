#pragma once

// Commutative ground truth: finite metric spaces, point-map IFS, Hutchinson
// measures, Wasserstein-1 by min-cost flow and attractor enumeration, plus
// the diagonal lift into the algebra machinery.
//
// Shift spaces of depth m hold the 2^m binary words, indexed with the first
// letter as the most significant bit, with d(w, w') = 2^-(common prefix
// length). The prepend maps are g_a(w) = a w_1 ... w_{m-1}.

#include <string>
#include <vector>

#include "ncfractal/algebra.hpp"
#include "ncfractal/morphism.hpp"
#include "ncfractal/random.hpp"
#include "ncfractal/seminorm.hpp"

namespace ncfractal {

class FiniteMetricSpace {
 public:
  /// Validates symmetry, zero diagonal, positivity off the diagonal and the
  /// triangle inequality on finite entries (kInfDistance allowed).
  explicit FiniteMetricSpace(RMatrix d);
  static FiniteMetricSpace shift_space(int depth);
  /// All distinct points at distance 1.
  static FiniteMetricSpace discrete(int n);
  /// Euclidean distances of n uniform points in the unit square.
  static FiniteMetricSpace random(int n, Rng& rng);

  int n_points() const { return static_cast<int>(d_.rows()); }
  const RMatrix& d() const { return d_; }
  double operator()(int x, int y) const { return d_(x, y); }
  /// Label per point; equal labels mean finite distance.
  std::vector<int> components() const;

 private:
  RMatrix d_;
};

struct PointMap {
  std::vector<int> g;
  int operator()(int x) const { return g.at(x); }
};

/// Range-checked map of an n-point space.
PointMap make_point_map(std::vector<int> g, int n);

/// Depth-m prepend map g_a.
PointMap shift_map(int depth, int letter);

class Measure {
 public:
  explicit Measure(std::vector<double> masses);
  static Measure dirac(int n, int x);
  const std::vector<double>& masses() const { return masses_; }
  int size() const { return static_cast<int>(masses_.size()); }
  double operator[](int x) const { return masses_.at(x); }
  /// Points with mass > tol, increasing.
  std::vector<int> support(double tol = 1e-12) const;

 private:
  std::vector<double> masses_;
};

ExtendedReal lipschitz_constant(const PointMap& g, const FiniteMetricSpace& x);

struct HutchinsonResult {
  Measure measure;
  /// Number of closed communicating classes of the transfer chain, i.e. the
  /// dimension of the space of fixed measures.
  int dimension = 0;
  double residual = 0.0;
  std::vector<std::string> warnings;
};

/// mu = sum_i pi_i (g_i)_* mu. With several fixed measures, the one reached
/// from the uniform measure by the ergodic average is returned.
HutchinsonResult hutchinson_measure(const std::vector<PointMap>& maps, const Weights& pi,
                                    const FiniteMetricSpace& x);

/// Optimal transport cost, INF when mu and nu weigh some component differently.
ExtendedReal wasserstein1(const Measure& mu, const Measure& nu, const FiniteMetricSpace& x);

/// Fixed points of g_w over all words 1 <= |w| <= M, increasing. Requires
/// every map to be a strict contraction.
std::vector<int> attractor_points(const std::vector<PointMap>& maps, const FiniteMetricSpace& x, int m);

struct DiagonalLift {
  Algebra algebra;
  Seminorm seminorm;
};

DiagonalLift diagonal_lift(const FiniteMetricSpace& x);
StarHom lift_map(const PointMap& g);
State lift_measure(const Measure& mu);

}  // namespace ncfractal
