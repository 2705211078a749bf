#pragma once

// Finite-dimensional C*-algebras realised as direct sums of full matrix
// blocks M_{n_1} + ... + M_{n_B}. Every algebra here is unital, so the
// multiplier algebra and the enveloping von Neumann algebra coincide with
// the algebra itself, every state is normal, and every projection is both
// open and closed.

#include <complex>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "ncfractal/errors.hpp"

namespace ncfractal {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

inline constexpr double kSelfAdjointTol = 1e-12;
inline constexpr double kStateTol = 1e-10;
inline constexpr double kProjectionTol = 1e-9;
inline constexpr double kEigenTol = 1e-9;
inline constexpr double kRepairLimit = 1e-8;

class Element;

/// Block structure of A = M_{n_1} + ... + M_{n_B}.
///
/// The self-adjoint part is coordinatised by the basis that is orthonormal
/// for <x, y> = Re trace(x y): per block, the diagonal matrix units E_ii,
/// then for each i < j the pair (E_ij + E_ji)/sqrt2 and i(E_ij - E_ji)/sqrt2.
/// In these coordinates trace(rho b) = coords(rho) . coords(b).
class Algebra {
 public:
  explicit Algebra(std::vector<int> block_dims);

  /// C^n as n one-dimensional blocks (functions on an n-point space).
  static Algebra diagonal(int n);

  std::span<const int> block_dims() const { return dims_; }
  int num_blocks() const { return static_cast<int>(dims_.size()); }
  int block_dim(int b) const { return dims_.at(b); }
  int total_dim() const { return total_dim_; }
  int real_dim() const { return real_dim_; }
  bool is_diagonal() const;

  Element unit() const;
  Element zero() const;
  Element basis_element(int k) const;

  /// Coordinates of the self-adjoint part of x (the anti-self-adjoint part is dropped).
  RVector coords(const Element& x) const;
  Element from_coords(const RVector& v) const;

  bool operator==(const Algebra& other) const { return dims_ == other.dims_; }

 private:
  std::vector<int> dims_;
  std::vector<int> coord_offsets_;
  int total_dim_ = 0;
  int real_dim_ = 0;
};

class Element {
 public:
  explicit Element(std::vector<CMatrix> blocks);

  /// Diagonal element of C^n (or a diagonal of a general algebra when `alg` is given).
  static Element diagonal(std::span<const double> entries);
  static Element diagonal(const Algebra& alg, std::span<const double> entries);

  const std::vector<CMatrix>& blocks() const { return blocks_; }
  const CMatrix& block(int b) const { return blocks_.at(b); }
  int num_blocks() const { return static_cast<int>(blocks_.size()); }
  Algebra algebra() const;
  bool same_shape(const Element& other) const;

  Element adjoint() const;
  bool is_self_adjoint(double tol = kSelfAdjointTol) const;
  /// (x + x*)/2.
  Element hermitian_part() const;

  double max_abs() const;
  double op_norm() const;
  /// Sum of absolute eigenvalues; requires a self-adjoint element.
  double trace_norm() const;
  /// The diagonal of every block, concatenated.
  std::vector<Complex> diagonal_entries() const;

  Element& operator+=(const Element& other);
  Element& operator-=(const Element& other);
  Element& operator*=(Complex s);

  friend Element operator+(Element a, const Element& b) { return a += b; }
  friend Element operator-(Element a, const Element& b) { return a -= b; }
  friend Element operator*(Element a, Complex s) { return a *= s; }
  friend Element operator*(Complex s, Element a) { return a *= s; }
  friend Element operator*(Element a, double s) { return a *= Complex(s, 0.0); }
  friend Element operator*(double s, Element a) { return a *= Complex(s, 0.0); }
  friend Element operator*(const Element& a, const Element& b);

 private:
  std::vector<CMatrix> blocks_;
};

/// Max-entry distance between two elements of the same algebra.
double max_abs_diff(const Element& a, const Element& b);

/// Sum of the block traces.
Complex trace(const Element& x);

/// x -> g(x) per block through the eigendecomposition of a self-adjoint x.
Element functional_calculus(const Element& x, const std::function<double(double)>& g);

/// Smallest eigenvalue over all blocks of a self-adjoint element.
double min_eigenvalue(const Element& x);
double max_eigenvalue(const Element& x);

/// Self-adjoint idempotent. Invariant: ||p^2 - p||_max <= 1e-9.
class Projection {
 public:
  /// Validates an element that should already be a projection.
  static Projection from_element(const Element& e, double tol = kProjectionTol);
  /// Rebuilds a projection from a near-projection by snapping its spectrum to
  /// {0, 1}; eigenvalues further than 0.1 from both are a DomainError.
  static Projection repaired(const Element& e);
  static Projection zero(const Algebra& alg);
  static Projection unit(const Algebra& alg);

  const Element& element() const { return element_; }
  Algebra algebra() const { return element_.algebra(); }
  Projection complement() const;
  int rank() const;

 private:
  explicit Projection(Element e) : element_(std::move(e)) {}
  Element element_;
};

/// Positive unit-trace density rho representing phi(b) = trace(rho b).
class State {
 public:
  /// Validates rho. Violations of the invariants up to `repair_limit` are
  /// repaired (hermitian part, eigenvalues clipped at 0, trace renormalised);
  /// larger violations are a DomainError.
  static State from_density(const Element& rho, double repair_limit = kRepairLimit);
  static State maximally_mixed(const Algebra& alg);

  const Element& density() const { return density_; }
  Algebra algebra() const { return density_.algebra(); }

 private:
  explicit State(Element rho) : density_(std::move(rho)) {}
  Element density_;
};

/// tau(x) = sum_b w_b trace(x_b).
class Trace {
 public:
  explicit Trace(std::vector<double> block_weights);
  static Trace counting(const Algebra& alg);

  std::span<const double> block_weights() const { return weights_; }

 private:
  std::vector<double> weights_;
};

struct SpectralComponent {
  double eigenvalue;
  Projection projection;
};

/// Eigenvalues of a self-adjoint element, grouped across blocks when they
/// chain within `tol`, in increasing order. The projections are pairwise
/// orthogonal and sum to the unit.
std::vector<SpectralComponent> spectral_decompose(const Element& x, double tol = kEigenTol);

/// Support projection of a positive element: the sum of the spectral
/// projections with eigenvalue > tol.
Projection range_projection(const Element& x, double tol = kEigenTol);

Projection meet(const Projection& p, const Projection& q);
Projection join(const Projection& p, const Projection& q);
/// p <= q, checked as ||p - q p||_max <= tol.
bool is_subprojection(const Projection& p, const Projection& q, double tol = kProjectionTol);

Complex state_eval(const State& phi, const Element& b);
Projection state_support(const State& phi, double tol = kEigenTol);
double trace_eval(const Trace& tau, const Element& x);

}  // namespace ncfractal
