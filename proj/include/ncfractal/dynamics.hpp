#pragma once

// The averaged dual action (pi . F*) phi = sum_i pi_i f_i^* phi on states,
// its fixed states (by iteration and by an exact eigensolve), code-space
// averages over words, the Banach rate bound and the Cesaro probe.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ncfractal/algebra.hpp"
#include "ncfractal/morphism.hpp"
#include "ncfractal/seminorm.hpp"

namespace ncfractal {

inline constexpr std::uint64_t kDefaultWordBudget = 4096;

/// T = sum_i pi_i F_i^T acting on density coordinates.
RMatrix markov_matrix(const DualIFS& ifs, const Weights& pi);

State markov_apply(const DualIFS& ifs, const Weights& pi, const State& rho);

enum class IterationMode { plain, cesaro };
const char* to_string(IterationMode mode);

struct TraceRow {
  int step = 0;
  double gap = 0.0;
  std::string metric;  // "trace_norm" or "d_L"
};

/// Per-step gaps; steps are strictly increasing.
struct ConvergenceTrace {
  std::vector<TraceRow> rows;
  void push(int step, double gap, std::string metric);
  /// CSV with header step,gap,metric.
  std::string to_csv() const;
};

struct IterationResult {
  State state;
  ConvergenceTrace trace;
  bool converged = false;
  IterationMode mode_used = IterationMode::plain;
  int steps = 0;
  /// ||markov_apply(state) - state||_trace
  double residual = 0.0;
  /// d_L between the last two plain iterates when a seminorm was supplied.
  std::optional<ExtendedReal> last_dl_gap;
};

/// Plain mode iterates rho_{M+1} = T rho_M until the trace-norm gap is at most
/// gap_tol. When the gap has not decreased over 20 steps it switches to the
/// Cesaro average of the orbit from rho0, controlled by its invariance defect.
/// Non-convergence is reported through `converged`, never thrown.
IterationResult fixed_state_iterate(const DualIFS& ifs, const Weights& pi, const State& rho0, int max_steps,
                                    double gap_tol, IterationMode mode = IterationMode::plain,
                                    const Seminorm* L = nullptr);

inline constexpr double kNullSpaceCut = 1e-9;
inline constexpr double kRankWarnBand = 1e-7;

struct FixedSet {
  int dimension = 0;
  /// Ergodic projection of the maximally mixed state onto the fixed set.
  State representative;
  /// Orthonormal self-adjoint basis of ker(T - I).
  std::vector<Element> basis;
  /// Singular values of T - I, decreasing.
  std::vector<double> singular_values;
  std::vector<std::string> warnings;
  bool unique() const { return dimension == 1; }
};

FixedSet fixed_state_eigen(const DualIFS& ifs, const Weights& pi);

/// States spread over a fixed set: the representative, then for each basis
/// direction orthogonal to the unit the point halfway to the positivity
/// boundary along it.
std::vector<State> fixed_set_samples(const FixedSet& fs);

/// Fixed set of the single morphism f_w.
FixedSet word_fixed_state(const DualIFS& ifs, const Word& w);

/// All words of length m over k letters in lexicographic order. ResourceError
/// when k^m exceeds the budget.
std::vector<Word> enumerate_words(int k, int m, std::uint64_t budget = kDefaultWordBudget);

/// pi_w = prod_m pi_{w_m}
double word_weight(const Weights& pi, const Word& w);

/// phi^M = sum over words of length M of pi_w phi_w. Word fixed states are
/// computed concurrently and summed in lexicographic order.
State code_average(const DualIFS& ifs, const Weights& pi, int m, std::uint64_t budget = kDefaultWordBudget);

struct BanachCertificate {
  ExtendedReal lhs;
  double rhs = 0.0;
  double c = 0.0;
  double lambda = 0.0;
  double tol = 1e-8;
  bool pass = false;
};

/// lhs = d_L((pi . F*)^M phi0, phi^M), rhs = C Lambda^M / (1 - Lambda) with
/// C = max_i d_L(phi0, f_i^* phi0) and Lambda the largest dilation.
BanachCertificate banach_certificate(const DualIFS& ifs, const Weights& pi, const Seminorm& L, const State& phi0,
                                     int m, std::uint64_t budget = kDefaultWordBudget);

struct CesaroReport {
  Element average;
  double step_delta = 0.0;         // ||b_n - b_{n-1}||_op, 0 for n = 0
  double invariance_defect = 0.0;  // ||f(b_n) - b_n||_op
  std::optional<double> seminorm_value;
};

/// b_n = (1/(n+1)) sum_{i=0}^n f^i(b).
CesaroReport cesaro_average(const StarHom& f, const Element& b, int n, const Seminorm* L = nullptr);

}  // namespace ncfractal
