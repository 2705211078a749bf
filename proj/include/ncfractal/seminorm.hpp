#pragma once

// Lipschitz seminorms on the self-adjoint part, their kernels, the spectral
// distance d_L(phi, psi) = sup { |phi(b) - psi(b)| : L(b) <= 1 } and upper
// dilation factors of morphisms.
//
// Two seminorm classes are supported, both with exact dual norms:
//   euclidean  L(b) = |Delta coords(b)|_2 for a real linear map Delta
//   metric     L(b) = max_{i != j, d_ij < inf} |b_i - b_j| / d_ij on C^n

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "ncfractal/algebra.hpp"
#include "ncfractal/morphism.hpp"

namespace ncfractal {

/// Value in [0, inf].
class ExtendedReal {
 public:
  ExtendedReal() = default;
  ExtendedReal(double v);  // NOLINT(google-explicit-constructor): finite values convert freely
  static ExtendedReal inf();

  bool is_inf() const { return inf_; }
  /// Finite value; throws DomainError on INF.
  double value() const;
  /// +infinity for INF.
  double as_double() const { return inf_ ? std::numeric_limits<double>::infinity() : value_; }
  std::string to_string() const;

  friend bool operator==(const ExtendedReal& a, const ExtendedReal& b) {
    return a.inf_ == b.inf_ && (a.inf_ || a.value_ == b.value_);
  }
  friend bool operator<(const ExtendedReal& a, const ExtendedReal& b) {
    if (a.inf_) return false;
    return b.inf_ || a.value_ < b.value_;
  }
  friend bool operator<=(const ExtendedReal& a, const ExtendedReal& b) { return !(b < a); }
  friend bool operator>(const ExtendedReal& a, const ExtendedReal& b) { return b < a; }

  friend ExtendedReal operator+(const ExtendedReal& a, const ExtendedReal& b);
  /// INF * 0 is a DomainError.
  friend ExtendedReal operator*(const ExtendedReal& a, const ExtendedReal& b);

 private:
  double value_ = 0.0;
  bool inf_ = false;
};

enum class SeminormKind { euclidean, metric };

/// Distance matrix entry meaning "infinitely far".
inline constexpr double kInfDistance = std::numeric_limits<double>::infinity();

class Seminorm {
 public:
  /// L(b) = |delta * coords(b)|. Requires L(I) = 0.
  static Seminorm euclidean(Algebra alg, RMatrix delta);
  /// Frobenius norm of the part of b orthogonal to the unit, optionally with
  /// per-coordinate weights applied afterwards.
  static Seminorm traceless(const Algebra& alg, const std::vector<double>& weights = {});
  /// L(b) = Frobenius norm of the commutator [D, b].
  static Seminorm commutator(const Element& d);
  /// Lipschitz seminorm of an extended metric on n points (kInfDistance allowed).
  static Seminorm metric(RMatrix distances);

  SeminormKind kind() const { return kind_; }
  const Algebra& algebra() const { return algebra_; }
  /// Euclidean: the map Delta. Metric: empty.
  const RMatrix& delta() const { return delta_; }
  /// Metric: the distance matrix. Euclidean: empty.
  const RMatrix& distances() const { return distances_; }

  /// seminorm_eval; b must be self-adjoint.
  double operator()(const Element& b) const;
  double eval_coords(const RVector& v) const;

  /// Orthonormal basis (columns, trace inner product coordinates) of {L = 0},
  /// starting with the normalised unit.
  const RMatrix& kernel_coords() const { return kernel_; }

 private:
  Seminorm(SeminormKind kind, Algebra alg) : kind_(kind), algebra_(std::move(alg)) {}
  void compute_kernel();

  SeminormKind kind_;
  Algebra algebra_;
  RMatrix delta_;
  RMatrix distances_;
  RMatrix kernel_;
};

/// Orthonormal basis of the kernel as self-adjoint elements.
std::vector<Element> seminorm_kernel(const Seminorm& L);

/// Magnitude below which a kernel pairing counts as zero.
inline constexpr double kKernelPairingTol = 1e-9;
/// Dilation factors within this of 1 count as 1 when contractivity is required
/// (an SVD of an isometry can land a few ulps below 1).
inline constexpr double kContractionSlack = 1e-12;

/// Largest |<rho_phi - rho_psi, z>| over the kernel basis.
double kernel_pairing(const Seminorm& L, const State& phi, const State& psi);

/// d_L(phi, psi): INF when the difference pairs with the kernel, otherwise the
/// exact dual norm (pseudoinverse for euclidean, LP over 1-Lipschitz
/// potentials for metric).
ExtendedReal spectral_distance(const Seminorm& L, const State& phi, const State& psi);

/// sup { <c, b> : L(b) <= 1 } for a traceless self-adjoint coordinate vector c.
ExtendedReal dual_norm(const Seminorm& L, const RVector& c);

/// Brute-force lower bound on d_L: best ratio <c, u> / L(u) over sampled
/// directions u orthogonal to the kernel, followed (when `refine`) by a
/// smoothed descent on L over {<c, u> = 1} for metric seminorms and a
/// shrinking random pattern search. +infinity when the kernel pairing is
/// nonzero.
double spectral_distance_oracle(const Seminorm& L, const State& phi, const State& psi, int n_samples,
                                std::uint64_t seed, bool refine = true);

/// Interval [lower, upper] enclosing dil(f); exact when lower == upper.
struct Dilation {
  ExtendedReal lower;
  ExtendedReal upper;
  bool exact() const { return lower == upper; }
};

/// dil(f) = sup { L(f(b)) : L(b) <= 1 }.
Dilation dilation_upper(const Seminorm& L, const StarHom& f);

struct IfsDilations {
  std::vector<Dilation> per_map;
  ExtendedReal sum;  // sum_i pi_i dil(f_i)
  ExtendedReal sup;  // max_i dil(f_i)
};

IfsDilations ifs_dilations(const Seminorm& L, const DualIFS& ifs, const Weights& pi);

/// max(0, max ratio - L(b)) with ratio = |phi(b) - psi(b)| / d_L(phi, psi)
/// over sampled finite-distance state pairs.
double lipschitz_consistency_defect(const Seminorm& L, const Element& b, int n_pairs, std::uint64_t seed);

}  // namespace ncfractal
