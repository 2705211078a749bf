#include "ncfractal/fractal.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ncfractal/random.hpp"

namespace ncfractal {

namespace {

constexpr double kFixedResidualLimit = 1e-8;
constexpr double kBumpTol = 1e-10;

void require_strict(const Weights& pi, const char* what) {
  if (!pi.strict()) {
    throw PreconditionError(std::string(what) + ": weights must lie in the strict simplex (every pi_i > 0)");
  }
}

ExtendedReal require_contractive_sum(const Seminorm& L, const DualIFS& ifs, const Weights& pi, const char* what) {
  const ExtendedReal sum = ifs_dilations(L, ifs, pi).sum;
  if (sum.is_inf() || sum.value() >= 1.0 - kContractionSlack) {
    throw PreconditionError(std::string(what) + ": Lambda_sum = " + sum.to_string() +
                            " >= 1, the theorem requires a contractive average");
  }
  return sum;
}

void require_bump(const Element& a) {
  const BumpCheck b = is_bump(a);
  if (!b.is_bump) throw PreconditionError("not a compactly supported bump: " + b.reason);
}

}  // namespace

SelfSimReport selfsim_support_check(const DualIFS& ifs, const Weights& pi, const State& rho, double tol) {
  require_strict(pi, "selfsim_support_check");
  const double residual = (markov_apply(ifs, pi, rho).density() - rho.density()).trace_norm();
  if (residual > kFixedResidualLimit) {
    std::ostringstream msg;
    msg << "selfsim_support_check: state is not self-similar (||(pi.F*)rho - rho||_trace = " << residual << " > "
        << kFixedResidualLimit << ")";
    throw PreconditionError(msg.str());
  }
  Projection lhs = state_support(rho, tol);
  Projection rhs = Projection::zero(lhs.algebra());
  std::vector<bool> below;
  for (const auto& f : ifs.homs()) {
    const Projection q = upper_preimage(f, lhs, tol);
    below.push_back(is_subprojection(q, lhs, tol));
    rhs = join(rhs, q);
  }
  const double defect = max_abs_diff(lhs.element(), rhs.element());
  const bool pass = defect <= tol;
  return SelfSimReport{std::move(lhs), std::move(rhs), defect, std::move(below), tol, pass};
}

WeightInvarianceReport support_weight_invariance(const DualIFS& ifs, const Weights& pi, const Weights& pi_other,
                                                 const Seminorm& L, double tol) {
  require_strict(pi, "support_weight_invariance");
  require_strict(pi_other, "support_weight_invariance");
  const ExtendedReal sum = require_contractive_sum(L, ifs, pi, "support_weight_invariance");
  const ExtendedReal sum_other = require_contractive_sum(L, ifs, pi_other, "support_weight_invariance");
  const State phi = fixed_state_eigen(ifs, pi).representative;
  const State phi_other = fixed_state_eigen(ifs, pi_other).representative;
  const ExtendedReal d = spectral_distance(L, phi, phi_other);
  if (d.is_inf()) {
    throw PreconditionError(
        "support_weight_invariance: the two self-similar states are at infinite distance, the case the theorem "
        "excludes");
  }
  Projection p = state_support(phi, tol);
  Projection q = state_support(phi_other, tol);
  const double defect = max_abs_diff(p.element(), q.element());
  return WeightInvarianceReport{std::move(p), std::move(q), defect, d, sum, sum_other, tol, defect <= tol};
}

WordSupportReport support_from_words(const DualIFS& ifs, const Weights& pi, int m, const Seminorm& L, double tol,
                                     std::uint64_t budget) {
  if (m < 1) throw DomainError("support_from_words needs M >= 1");
  require_strict(pi, "support_from_words");
  const ExtendedReal sup = ifs_dilations(L, ifs, pi).sup;
  if (sup.is_inf() || sup.value() >= 1.0 - kContractionSlack) {
    throw PreconditionError("support_from_words: Lambda_sup = " + sup.to_string() +
                            " >= 1, word fixed states need strict contractivity");
  }
  Projection target = state_support(fixed_state_eigen(ifs, pi).representative, tol);
  Projection acc = Projection::zero(ifs.algebra());
  std::vector<double> defects;
  for (int len = 1; len <= m; ++len) {
    for (const Word& w : enumerate_words(ifs.size(), len, budget)) {
      acc = join(acc, state_support(word_fixed_state(ifs, w).representative, tol));
    }
    defects.push_back(max_abs_diff(acc.element(), target.element()));
  }
  std::optional<int> m0;
  for (int len = m; len >= 1 && defects[len - 1] <= tol; --len) m0 = len;
  const bool pass = defects.back() <= tol;
  return WordSupportReport{std::move(acc), std::move(target), std::move(defects), m0, tol, pass};
}

TraceScaling trace_scaling(const Trace& tau, const StarHom& f, int n_samples, std::uint64_t seed, double tol) {
  const Algebra& alg = f.algebra();
  if (static_cast<int>(tau.block_weights().size()) != alg.num_blocks()) {
    throw StructuralError("trace_scaling: one trace weight per block");
  }
  TraceScaling out;
  Rng rng(seed);
  auto sample = [&](const Projection& p) {
    const double tp = trace_eval(tau, p.element());
    if (tp <= 1e-12) return;
    out.ratios.push_back(trace_eval(tau, upper_preimage(f, p).element()) / tp);
  };
  sample(Projection::unit(alg));
  for (int i = 0; i < n_samples; ++i) sample(f(random_projection(alg, rng)));
  out.samples_used = static_cast<int>(out.ratios.size());
  if (out.ratios.empty()) return out;

  double mean = 0.0;
  for (double r : out.ratios) mean += r;
  mean /= static_cast<double>(out.ratios.size());
  for (double r : out.ratios) out.max_deviation = std::max(out.max_deviation, std::abs(r - mean));
  out.uniform = mean > 0.0 && out.max_deviation <= tol;
  out.s = mean > 0.0 ? 1.0 / mean : 0.0;
  return out;
}

RMatrix overlap_traces(const Trace& tau, const DualIFS& ifs, const Projection& p) {
  const int k = ifs.size();
  std::vector<Projection> pre;
  for (const auto& f : ifs.homs()) pre.push_back(upper_preimage(f, p));
  RMatrix out(k, k);
  for (int i = 0; i < k; ++i) {
    out(i, i) = trace_eval(tau, pre[i].element());
    for (int j = i + 1; j < k; ++j) {
      out(i, j) = out(j, i) = trace_eval(tau, meet(pre[i], pre[j]).element());
    }
  }
  return out;
}

BumpCheck is_bump(const Element& a) {
  BumpCheck out;
  if (!a.is_self_adjoint(kBumpTol)) {
    out.reason = "element is not self-adjoint";
    return out;
  }
  const Element h = a.hermitian_part();
  const double lo = min_eigenvalue(h);
  const double hi = max_eigenvalue(h);
  std::ostringstream msg;
  if (lo < -kBumpTol) {
    msg << "smallest eigenvalue " << lo << " < 0";
  } else if (hi > 1.0 + kBumpTol) {
    msg << "largest eigenvalue " << hi << " > 1";
  } else if (std::abs(h.op_norm() - 1.0) > kBumpTol) {
    msg << "operator norm " << h.op_norm() << " != 1";
  }
  out.reason = msg.str();
  out.is_bump = out.reason.empty();
  if (out.is_bump) out.witness = a.algebra().unit();
  return out;
}

Element clamp_bump(const Element& x, double level) {
  if (!(level > 0.0)) throw DomainError("clamp level must be positive");
  if (min_eigenvalue(x.hermitian_part()) < -kBumpTol) throw DomainError("clamp_bump needs a positive element");
  return functional_calculus(x.hermitian_part(), [level](double t) { return std::clamp(t / level, 0.0, 1.0); });
}

std::vector<Element> local_flat_space(const Seminorm& L, const Element& a) {
  require_bump(a);
  const Algebra& alg = L.algebra();
  if (!a.same_shape(alg.zero())) throw StructuralError("bump and seminorm live on different algebras");
  const std::vector<Element> kernel = seminorm_kernel(L);
  RMatrix span(alg.real_dim(), static_cast<Eigen::Index>(kernel.size()));
  for (std::size_t j = 0; j < kernel.size(); ++j) span.col(j) = alg.coords(a * kernel[j] * a);
  std::vector<Element> out;
  if (span.cols() == 0) return out;
  Eigen::JacobiSVD<RMatrix> svd(span, Eigen::ComputeThinU);
  const double cut = 1e-10 * std::max(1.0, svd.singularValues()(0));
  for (Eigen::Index j = 0; j < svd.singularValues().size(); ++j) {
    if (svd.singularValues()(j) > cut) out.push_back(alg.from_coords(svd.matrixU().col(j)));
  }
  return out;
}

const char* to_string(LocalClassification c) {
  return c == LocalClassification::consistent ? "consistent" : "semi-consistent";
}

LocalClass classify_local(const Seminorm& L, const Element& a) {
  LocalClass out;
  out.flat_dim = static_cast<int>(local_flat_space(L, a).size());
  out.classification = out.flat_dim == 1 ? LocalClassification::consistent : LocalClassification::semi_consistent;
  return out;
}

}  // namespace ncfractal
