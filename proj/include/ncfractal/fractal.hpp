#pragma once

// Support projections of self-similar states, their independence from the
// weights, word-support joins, trace scaling and overlaps of upper
// pre-images, and the local flatness diagnostics.
//
// In finite dimensions the closed support of a state is its support, so all
// checks below work with state_support.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ncfractal/algebra.hpp"
#include "ncfractal/dynamics.hpp"
#include "ncfractal/morphism.hpp"
#include "ncfractal/seminorm.hpp"

namespace ncfractal {

struct SelfSimReport {
  Projection lhs;  // supp(rho)
  Projection rhs;  // join_i upper_preimage(f_i, supp(rho))
  double defect = 0.0;
  /// upper_preimage(f_i, lhs) <= lhs, per map.
  std::vector<bool> per_map_below;
  double tol = 0.0;
  bool pass = false;
};

/// Requires strict pi and ||(pi . F*) rho - rho||_trace <= 1e-8.
SelfSimReport selfsim_support_check(const DualIFS& ifs, const Weights& pi, const State& rho, double tol);

struct WeightInvarianceReport {
  Projection support;
  Projection support_other;
  double defect = 0.0;
  ExtendedReal distance;  // d_L between the two fixed states
  ExtendedReal lambda_sum;
  ExtendedReal lambda_sum_other;
  double tol = 0.0;
  bool pass = false;
};

/// Fixed states for pi and pi' (eigensolve) share their support. Both weight
/// vectors must be strict with Lambda_sum < 1, and the fixed states must be at
/// finite distance.
WeightInvarianceReport support_weight_invariance(const DualIFS& ifs, const Weights& pi, const Weights& pi_other,
                                                 const Seminorm& L, double tol);

struct WordSupportReport {
  /// Join over all words of length <= M.
  Projection join;
  Projection target;  // supp(phi_pi)
  /// defects[m - 1]: max-entry gap between the length-<=m join and the target.
  std::vector<double> defects;
  /// Smallest m with defects <= tol from m on, when reached.
  std::optional<int> m0;
  double tol = 0.0;
  bool pass = false;
};

WordSupportReport support_from_words(const DualIFS& ifs, const Weights& pi, int m, const Seminorm& L, double tol,
                                     std::uint64_t budget = kDefaultWordBudget);

struct TraceScaling {
  bool uniform = false;
  /// S with tau(upper_preimage(f, p)) = tau(p) / S; meaningful when uniform.
  double s = 0.0;
  double max_deviation = 0.0;
  int samples_used = 0;
  std::vector<double> ratios;
};

/// Ratios tau(upper_preimage(f, p)) / tau(p) over p = I and p = f(q) for
/// random projections q; samples with tau(p) = 0 are skipped.
TraceScaling trace_scaling(const Trace& tau, const StarHom& f, int n_samples, std::uint64_t seed, double tol);

/// Entries tau(upper_preimage(f_i, p) /\ upper_preimage(f_j, p)).
RMatrix overlap_traces(const Trace& tau, const DualIFS& ifs, const Projection& p);

struct BumpCheck {
  bool is_bump = false;
  /// I_a with I_a a = a; the unit works in any unital algebra.
  std::optional<Element> witness;
  std::string reason;
};

/// 0 <= a <= I and ||a||_op = 1, both within 1e-10.
BumpCheck is_bump(const Element& a);

/// Spectral clamp min(x / level, 1) of a positive element; a bump whenever
/// 0 < level <= max eigenvalue.
Element clamp_bump(const Element& x, double level);

/// Orthonormal basis of a ker(L) a.
std::vector<Element> local_flat_space(const Seminorm& L, const Element& a);

enum class LocalClassification { consistent, semi_consistent };
const char* to_string(LocalClassification c);

struct LocalClass {
  int flat_dim = 0;
  LocalClassification classification = LocalClassification::semi_consistent;
};

LocalClass classify_local(const Seminorm& L, const Element& a);

}  // namespace ncfractal
