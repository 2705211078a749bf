#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "ncfractal/classical.hpp"
#include "ncfractal/dynamics.hpp"
#include "ncfractal/fractal.hpp"
#include "ncfractal/random.hpp"

namespace ncfractal::cli {

namespace {

constexpr double kHomTol = 1e-9;
constexpr double kUnitTol = 1e-12;
constexpr double kFixedTol = 1e-9;
constexpr double kAgreeTol = 1e-6;
constexpr double kOracleRelTol = 1e-3;
constexpr double kClassicalTol = 1e-9;
constexpr double kScalingTol = 1e-9;
constexpr double kIterGapTol = 1e-12;
constexpr int kIterMaxSteps = 20000;

/// Collects named pass/fail checks.
class Checks {
 public:
  void add(const std::string& name, ojson detail, bool ok) {
    list_.push_back(ojson{{"check", name}, {"pass", ok}, {"detail", std::move(detail)}});
    pass_ = pass_ && ok;
  }
  bool pass() const { return pass_; }
  ojson json() const { return list_; }

 private:
  ojson list_ = ojson::array();
  bool pass_ = true;
};

const Seminorm& need_seminorm(const Scenario& s) {
  if (!s.seminorm) throw PreconditionError("scenario \"" + s.name + "\" defines no seminorm");
  return *s.seminorm;
}

std::vector<std::pair<std::string, State>> start_states(const Scenario& s) {
  if (!s.states.empty()) return s.states;
  return {{"maximally_mixed", State::maximally_mixed(s.algebra)}};
}

const State& first_start(const Scenario& s, std::optional<State>& storage) {
  if (const State* p = s.find_state("phi0")) return *p;
  if (!s.states.empty()) return s.states.front().second;
  storage = State::maximally_mixed(s.algebra);
  return *storage;
}

double trace_distance(const State& a, const State& b) { return (a.density() - b.density()).trace_norm(); }

ojson weights_json(const Weights& w) {
  ojson out = ojson::array();
  for (double v : w.values()) out.push_back(v);
  return out;
}

Weights random_strict_weights(int k, Rng& rng) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  std::vector<double> w(static_cast<std::size_t>(k));
  double sum = 0.0;
  for (double& v : w) sum += (v = u(rng));
  for (double& v : w) v /= sum;
  return Weights(w);
}

ojson dilation_json(const Dilation& d, double tol) {
  return ojson{{"lower", num(d.lower, tol)}, {"upper", num(d.upper, tol)}, {"exact", d.exact()}};
}

ojson extended_matrix_json(const std::vector<std::vector<ExtendedReal>>& m) {
  ojson rows = ojson::array();
  for (const auto& r : m) {
    ojson row = ojson::array();
    for (const auto& v : r) row.push_back(v.as_double());
    rows.push_back(std::move(row));
  }
  return rows;
}

// ---------------------------------------------------------------- validate

CommandResult cmd_validate(const Scenario& s, const Flags& f) {
  Checks checks;
  const DualIFS& ifs = s.ifs;
  Rng rng(f.seed);

  for (int i = 0; i < ifs.size(); ++i) {
    const HomReport r = validate_hom(ifs[i], kHomTol);
    checks.add("morphism " + ifs.names()[i],
               ojson{{"kind", to_string(ifs[i].kind())},
                     {"multiplicativity", checked(r.multiplicativity, r.tol, r.multiplicativity <= r.tol)},
                     {"adjoint", checked(r.adjoint, r.tol, r.adjoint <= r.tol)},
                     {"unitality", checked(r.unitality, r.tol, r.unitality <= r.tol)}},
               r.pass);
  }

  for (const auto& [name, st] : s.states) {
    const double lo = min_eigenvalue(st.density());
    const double tr = trace(st.density()).real();
    checks.add("state " + name,
               ojson{{"min_eigenvalue", checked(lo, kStateTol, lo >= -kStateTol)},
                     {"trace_minus_one", checked(tr - 1.0, kStateTol, std::abs(tr - 1.0) <= kStateTol)}},
               lo >= -kStateTol && std::abs(tr - 1.0) <= kStateTol);
  }

  // Galois laws of the upper pre-image: p <= f(uppre(p)) and uppre(f(q)) <= q.
  {
    double worst_unit = 0.0;
    double worst_counit = 0.0;
    const int n = 20;
    for (int t = 0; t < n; ++t) {
      const StarHom& fi = ifs[t % ifs.size()];
      const Projection p = random_projection(s.algebra, rng);
      const Projection q = random_projection(s.algebra, rng);
      const Projection up = upper_preimage(fi, p);
      const Element fup = fi(up.element());
      worst_unit = std::max(worst_unit, max_abs_diff(fup * p.element(), p.element()));
      const Projection back = upper_preimage(fi, fi(q));
      worst_counit = std::max(worst_counit, max_abs_diff(q.element() * back.element(), back.element()));
    }
    const bool ok = worst_unit <= f.tol && worst_counit <= f.tol;
    checks.add("upper pre-image Galois laws",
               ojson{{"pairs", n},
                     {"p_below_f_of_preimage", checked(worst_unit, f.tol, worst_unit <= f.tol)},
                     {"preimage_of_f_q_below_q", checked(worst_counit, f.tol, worst_counit <= f.tol)}},
               ok);
  }

  if (s.seminorm) {
    const Seminorm& L = *s.seminorm;
    const double at_unit = L(s.algebra.unit());
    checks.add("seminorm vanishes on the unit", checked(at_unit, kUnitTol, at_unit <= kUnitTol), at_unit <= kUnitTol);

    for (std::size_t w = 0; w < s.weights.size(); ++w) {
      const Weights& pi = s.weights[w];
      const IfsDilations dil = ifs_dilations(L, ifs, pi);
      if (dil.sum.is_inf()) {
        checks.add("contraction inequality (weights " + std::to_string(w) + ")",
                   ojson{{"skipped", "Lambda_sum is infinite"}}, true);
        continue;
      }
      double worst = 0.0;
      int used = 0;
      for (int t = 0; t < 20; ++t) {
        const State a = random_state(s.algebra, rng, t % 3 == 0);
        const State b = random_state(s.algebra, rng, t % 4 == 0);
        const ExtendedReal before = spectral_distance(L, a, b);
        if (before.is_inf()) continue;
        const ExtendedReal after = spectral_distance(L, markov_apply(ifs, pi, a), markov_apply(ifs, pi, b));
        ++used;
        worst = std::max(worst, after.as_double() - dil.sum.value() * before.value());
      }
      checks.add("contraction inequality (weights " + std::to_string(w) + ")",
                 ojson{{"lambda_sum", num(dil.sum, f.tol)},
                       {"pairs_used", used},
                       {"worst_excess", checked(worst, f.tol, worst <= f.tol)}},
                 worst <= f.tol);
    }

    double worst_lip = 0.0;
    for (int t = 0; t < 5; ++t) {
      worst_lip = std::max(worst_lip, lipschitz_consistency_defect(L, random_self_adjoint(s.algebra, rng), 10,
                                                                   f.seed + static_cast<std::uint64_t>(t)));
    }
    checks.add("|phi(b) - psi(b)| <= d_L(phi, psi) L(b)", checked(worst_lip, f.tol, worst_lip <= f.tol),
               worst_lip <= f.tol);
  }

  for (std::size_t w = 0; w < s.weights.size(); ++w) {
    const Weights& pi = s.weights[w];
    const FixedSet fs = fixed_state_eigen(ifs, pi);
    double worst_mid = 0.0;
    for (const State& st : fixed_set_samples(fs)) {
      const State mid = State::from_density((fs.representative.density() + st.density()) * 0.5);
      worst_mid = std::max(worst_mid, trace_distance(markov_apply(ifs, pi, mid), mid));
    }
    checks.add("fixed-set convexity (weights " + std::to_string(w) + ")",
               ojson{{"dimension", fs.dimension}, {"midpoint_residual", checked(worst_mid, kFixedTol, worst_mid <= kFixedTol)}},
               worst_mid <= kFixedTol);

    if (fs.unique()) {
      double worst = 0.0;
      bool all_converged = true;
      for (int t = 0; t < 5; ++t) {
        const IterationResult it =
            fixed_state_iterate(ifs, pi, random_state(s.algebra, rng), kIterMaxSteps, kIterGapTol);
        all_converged = all_converged && it.converged;
        worst = std::max(worst, trace_distance(it.state, fs.representative));
      }
      checks.add("eigensolve and iteration agree (weights " + std::to_string(w) + ")",
                 ojson{{"starts", 5}, {"all_converged", all_converged},
                       {"max_trace_distance", checked(worst, kAgreeTol, worst <= kAgreeTol)}},
                 all_converged && worst <= kAgreeTol);
    }
  }

  return {ojson{{"checks", checks.json()}}, std::nullopt, checks.pass()};
}

// ---------------------------------------------------------------- fixed-state

CommandResult cmd_fixed_state(const Scenario& s, const Flags& f) {
  const Weights& pi = s.weights.front();
  const FixedSet fs = fixed_state_eigen(s.ifs, pi);
  Checks checks;

  ojson sv = ojson::array();
  for (double v : fs.singular_values) sv.push_back(v);
  ojson warnings = ojson::array();
  for (const auto& w : fs.warnings) warnings.push_back(w);
  ojson eigen{{"dimension", fs.dimension},
              {"unique", fs.unique()},
              {"representative", element_json(fs.representative.density())},
              {"representative_tol", kStateTol},
              {"support", projection_json(state_support(fs.representative))},
              {"singular_values_T_minus_I", sv},
              {"null_space_cut", kNullSpaceCut},
              {"warnings", warnings}};

  if (fs.dimension > 1 && s.seminorm) {
    // Several fixed states: report how far apart a spread of them sits.
    const std::vector<State> samples = fixed_set_samples(fs);
    std::vector<std::vector<ExtendedReal>> dist(samples.size(), std::vector<ExtendedReal>(samples.size()));
    for (std::size_t i = 0; i < samples.size(); ++i) {
      for (std::size_t j = 0; j < samples.size(); ++j) dist[i][j] = spectral_distance(*s.seminorm, samples[i], samples[j]);
    }
    ojson dens = ojson::array();
    for (const auto& st : samples) dens.push_back(element_json(st.density()));
    eigen["fixed_set_samples"] = dens;
    eigen["fixed_set_sample_distances"] = extended_matrix_json(dist);
  }

  ojson iterations = ojson::array();
  std::optional<std::string> csv;
  const double gap_tol = std::min(kIterGapTol, f.tol);
  for (const auto& [name, start] : start_states(s)) {
    const IterationResult it = fixed_state_iterate(s.ifs, pi, start, kIterMaxSteps, gap_tol, IterationMode::plain,
                                                   s.seminorm ? &*s.seminorm : nullptr);
    if (!csv) csv = it.trace.to_csv();
    const double residual_tol = 10.0 * gap_tol;
    ojson entry{{"start", name},
                {"mode_used", to_string(it.mode_used)},
                {"steps", it.steps},
                {"converged", it.converged},
                {"residual", checked(it.residual, residual_tol, it.residual <= residual_tol)},
                {"state", element_json(it.state.density())}};
    bool ok = it.converged;
    if (it.last_dl_gap) entry["last_d_L_gap"] = num(*it.last_dl_gap, gap_tol);
    if (fs.unique()) {
      const double d = trace_distance(it.state, fs.representative);
      entry["trace_distance_to_eigensolve"] = checked(d, kAgreeTol, d <= kAgreeTol);
      ok = ok && d <= kAgreeTol;
    }
    checks.add("iteration from " + name, ojson{{"converged", it.converged}}, ok);
    iterations.push_back(std::move(entry));
  }

  return {ojson{{"weights", weights_json(pi)}, {"eigensolve", eigen}, {"iterations", iterations},
                {"checks", checks.json()}},
          csv, checks.pass()};
}

// ---------------------------------------------------------------- distance

CommandResult cmd_distance(const Scenario& s, const Flags& f) {
  const Seminorm& L = need_seminorm(s);
  if (s.states.size() < 2) throw PreconditionError("distance needs at least two named states");
  Checks checks;
  ojson pairs = ojson::array();
  for (std::size_t i = 0; i < s.states.size(); ++i) {
    for (std::size_t j = i + 1; j < s.states.size(); ++j) {
      const auto& [na, a] = s.states[i];
      const auto& [nb, b] = s.states[j];
      const ExtendedReal d = spectral_distance(L, a, b);
      const double pairing = kernel_pairing(L, a, b);
      ojson entry{{"a", na}, {"b", nb}, {"d_L", num(d, f.tol)}, {"kernel_pairing", num(pairing, kKernelPairingTol)}};
      bool ok = d.is_inf() == (pairing > kKernelPairingTol);
      if (f.oracle) {
        const double o = spectral_distance_oracle(L, a, b, 400, f.seed + i * 131 + j);
        const bool inf_agree = std::isinf(o) == d.is_inf();
        entry["oracle_lower_bound"] = num(o, f.tol);
        entry["oracle_inf_agrees"] = inf_agree;
        ok = ok && inf_agree;
        if (!d.is_inf()) {
          const bool below = o <= d.value() * (1.0 + 1e-9) + 1e-12;
          ok = ok && below;
          // Search-based, so only held to the gap on small algebras.
          if (L.algebra().real_dim() <= 10) {
            const double gap = (d.value() - o) / std::max(1.0, d.value());
            entry["oracle_gap"] = checked(gap, kOracleRelTol, gap <= kOracleRelTol);
            ok = ok && gap <= kOracleRelTol;
          }
        }
        if (s.space) {
          auto masses = [](const State& st) {
            std::vector<double> m;
            for (const auto& z : st.density().diagonal_entries()) m.push_back(z.real());
            return Measure(m);
          };
          const ExtendedReal w = wasserstein1(masses(a), masses(b), *s.space);
          const bool agree = w.is_inf() == d.is_inf() &&
                             (w.is_inf() || std::abs(w.value() - d.value()) <= kClassicalTol);
          entry["wasserstein1"] = checked(w, kClassicalTol, agree);
          ok = ok && agree;
        }
      }
      checks.add("d_L(" + na + ", " + nb + ")", ojson{{"inf", d.is_inf()}}, ok);
      pairs.push_back(std::move(entry));
    }
  }
  return {ojson{{"seminorm", L.kind() == SeminormKind::euclidean ? "euclidean" : "metric"},
                {"oracle", f.oracle},
                {"pairs", pairs},
                {"checks", checks.json()}},
          std::nullopt, checks.pass()};
}

// ---------------------------------------------------------------- dilation

CommandResult cmd_dilation(const Scenario& s, const Flags& f) {
  const Seminorm& L = need_seminorm(s);
  Checks checks;
  Rng rng(f.seed);
  ojson maps = ojson::array();
  std::ostringstream csv;
  csv.precision(17);
  csv << "map,lower,upper,exact\n";
  for (int i = 0; i < s.ifs.size(); ++i) {
    const Dilation d = dilation_upper(L, s.ifs[i]);
    ojson entry{{"map", s.ifs.names()[i]}, {"kind", to_string(s.ifs[i].kind())}, {"dilation", dilation_json(d, f.tol)}};
    bool ok = d.lower <= d.upper;
    if (f.oracle) {
      // Sampled ratios L(f(b)) / L(b) are lower bounds for dil(f).
      double best = 0.0;
      for (int t = 0; t < 200; ++t) {
        const Element b = random_self_adjoint(s.algebra, rng);
        const double lb = L(b);
        if (lb <= 1e-12) continue;
        best = std::max(best, L(s.ifs[i](b).hermitian_part()) / lb);
      }
      const bool below = d.upper.is_inf() || best <= d.upper.value() * (1.0 + 1e-9) + f.tol;
      entry["sampled_lower_bound"] = checked(best, f.tol, below);
      ok = ok && below;
    }
    checks.add("dilation " + s.ifs.names()[i], ojson{{"exact", d.exact()}}, ok);
    csv << s.ifs.names()[i] << ',' << d.lower.as_double() << ',' << d.upper.as_double() << ','
        << (d.exact() ? "true" : "false") << '\n';
    maps.push_back(std::move(entry));
  }
  ojson per_weights = ojson::array();
  for (const Weights& pi : s.weights) {
    const IfsDilations dil = ifs_dilations(L, s.ifs, pi);
    per_weights.push_back(ojson{{"weights", weights_json(pi)},
                                {"lambda_sum", num(dil.sum, f.tol)},
                                {"lambda_sup", num(dil.sup, f.tol)},
                                {"contractive_average", dil.sum < ExtendedReal(1.0)},
                                {"strictly_contractive", dil.sup < ExtendedReal(1.0)}});
  }
  return {ojson{{"maps", maps}, {"ifs", per_weights}, {"checks", checks.json()}}, csv.str(), checks.pass()};
}

// ---------------------------------------------------------------- selfsim-check

ojson selfsim_json(const SelfSimReport& r) {
  ojson below = ojson::array();
  for (bool b : r.per_map_below) below.push_back(b);
  return ojson{{"support", projection_json(r.lhs)},
               {"join_of_upper_preimages", projection_json(r.rhs)},
               {"defect", checked(r.defect, r.tol, r.pass)},
               {"upper_preimage_below_support", below}};
}

CommandResult cmd_selfsim(const Scenario& s, const Flags& f) {
  const Weights& pi = s.weights.front();
  const FixedSet fs = fixed_state_eigen(s.ifs, pi);
  Checks checks;
  ojson reports = ojson::array();
  const std::vector<State> states = fixed_set_samples(fs);
  for (std::size_t i = 0; i < states.size(); ++i) {
    const SelfSimReport r = selfsim_support_check(s.ifs, pi, states[i], f.tol);
    const bool below = std::all_of(r.per_map_below.begin(), r.per_map_below.end(), [](bool b) { return b; });
    ojson entry = selfsim_json(r);
    entry["state"] = element_json(states[i].density());
    checks.add(i == 0 ? "representative" : "fixed-set sample " + std::to_string(i), ojson{{"defect", r.defect}},
               r.pass && below);
    reports.push_back(std::move(entry));
  }
  return {ojson{{"weights", weights_json(pi)},
                {"fixed_set_dimension", fs.dimension},
                {"note", "closed support equals support in finite dimensions"},
                {"reports", reports},
                {"checks", checks.json()}},
          std::nullopt, checks.pass()};
}

// ---------------------------------------------------------------- support-invariance

CommandResult cmd_support_invariance(const Scenario& s, const Flags& f) {
  const Seminorm& L = need_seminorm(s);
  std::vector<std::pair<Weights, Weights>> pairs;
  if (s.weights.size() >= 2) {
    for (std::size_t j = 1; j < s.weights.size(); ++j) pairs.emplace_back(s.weights.front(), s.weights[j]);
  } else {
    Rng rng(f.seed);
    for (int t = 0; t < 5; ++t) pairs.emplace_back(s.weights.front(), random_strict_weights(s.ifs.size(), rng));
  }
  Checks checks;
  ojson reports = ojson::array();
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const WeightInvarianceReport r = support_weight_invariance(s.ifs, pairs[i].first, pairs[i].second, L, f.tol);
    reports.push_back(ojson{{"weights", weights_json(pairs[i].first)},
                            {"weights_other", weights_json(pairs[i].second)},
                            {"lambda_sum", num(r.lambda_sum, f.tol)},
                            {"lambda_sum_other", num(r.lambda_sum_other, f.tol)},
                            {"d_L_between_fixed_states", num(r.distance, f.tol)},
                            {"support", projection_json(r.support)},
                            {"support_other", projection_json(r.support_other)},
                            {"defect", checked(r.defect, r.tol, r.pass)}});
    checks.add("pair " + std::to_string(i), ojson{{"defect", r.defect}}, r.pass);
  }
  return {ojson{{"reports", reports}, {"checks", checks.json()}}, std::nullopt, checks.pass()};
}

// ---------------------------------------------------------------- codespace

CommandResult cmd_codespace(const Scenario& s, const Flags& f) {
  const Seminorm& L = need_seminorm(s);
  const Weights& pi = s.weights.front();
  const int depth = f.depth.value_or(s.codespace_depth);
  if (depth < 1) throw PreconditionError("--depth must be at least 1");
  std::optional<State> storage;
  const State& phi0 = first_start(s, storage);
  const State fixed = fixed_state_eigen(s.ifs, pi).representative;

  Checks checks;
  ojson rows = ojson::array();
  std::ostringstream csv;
  csv.precision(17);
  csv << "M,lhs,rhs,tol,pass,d_L_code_to_fixed,d_L_iterate_to_fixed\n";
  State iterate = phi0;
  for (int m = 1; m <= depth; ++m) {
    iterate = markov_apply(s.ifs, pi, iterate);
    const BanachCertificate cert = banach_certificate(s.ifs, pi, L, phi0, m, f.budget);
    const State code = code_average(s.ifs, pi, m, f.budget);
    const ExtendedReal code_fixed = spectral_distance(L, code, fixed);
    const ExtendedReal iter_fixed = spectral_distance(L, iterate, fixed);
    rows.push_back(ojson{{"M", m},
                         {"lhs", checked(cert.lhs, cert.tol, cert.pass)},
                         {"rhs", cert.rhs},
                         {"C", cert.c},
                         {"lambda", cert.lambda},
                         {"d_L_code_to_fixed", num(code_fixed, f.tol)},
                         {"d_L_iterate_to_fixed", num(iter_fixed, f.tol)}});
    checks.add("Banach bound at M=" + std::to_string(m), ojson{{"lhs", cert.lhs.as_double()}, {"rhs", cert.rhs}},
               cert.pass);
    csv << m << ',' << cert.lhs.as_double() << ',' << cert.rhs << ',' << cert.tol << ','
        << (cert.pass ? "true" : "false") << ',' << code_fixed.as_double() << ',' << iter_fixed.as_double() << '\n';
  }
  return {ojson{{"weights", weights_json(pi)}, {"depth", depth}, {"table", rows}, {"checks", checks.json()}}, csv.str(),
          checks.pass()};
}

// ---------------------------------------------------------------- overlap

CommandResult cmd_overlap(const Scenario& s, const Flags& f) {
  const Trace tau = s.trace.value_or(Trace::counting(s.algebra));
  const Weights& pi = s.weights.front();
  Checks checks;

  ojson scaling = ojson::array();
  bool all_uniform = true;
  double inv_sum = 0.0;
  for (int i = 0; i < s.ifs.size(); ++i) {
    const TraceScaling ts = trace_scaling(tau, s.ifs[i], 50, f.seed + static_cast<std::uint64_t>(i), kScalingTol);
    all_uniform = all_uniform && ts.uniform;
    if (ts.uniform) inv_sum += 1.0 / ts.s;
    scaling.push_back(ojson{{"map", s.ifs.names()[i]},
                            {"uniform", ts.uniform},
                            {"S", ts.uniform ? ojson(ts.s) : ojson("NoUniformScaling")},
                            {"max_ratio_deviation", num(ts.max_deviation, kScalingTol)},
                            {"samples_used", ts.samples_used}});
  }
  const bool gate_sum = all_uniform && std::abs(inv_sum - 1.0) <= kScalingTol;

  const Projection p = state_support(fixed_state_eigen(s.ifs, pi).representative);
  Projection join_pre = Projection::zero(s.algebra);
  for (const auto& fi : s.ifs.homs()) join_pre = join(join_pre, upper_preimage(fi, p));
  const double selfsim_defect = max_abs_diff(join_pre.element(), p.element());
  const bool p_selfsim = selfsim_defect <= kScalingTol;

  const RMatrix ov = overlap_traces(tau, s.ifs, p);
  double off = 0.0;
  for (Eigen::Index i = 0; i < ov.rows(); ++i) {
    for (Eigen::Index j = 0; j < ov.cols(); ++j) {
      if (i != j) off = std::max(off, std::abs(ov(i, j)));
    }
  }
  const bool gate = gate_sum && p_selfsim;
  if (gate) {
    checks.add("off-diagonal overlaps vanish", checked(off, f.tol, off <= f.tol), off <= f.tol);
  }

  // Kaplansky: tau(p v q) + tau(p ^ q) = tau(p) + tau(q).
  Rng rng(f.seed);
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    const Projection a = random_projection(s.algebra, rng);
    const Projection b = random_projection(s.algebra, rng);
    const double lhs = trace_eval(tau, join(a, b).element()) + trace_eval(tau, meet(a, b).element());
    const double rhs = trace_eval(tau, a.element()) + trace_eval(tau, b.element());
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  checks.add("Kaplansky identity", checked(worst, f.tol, worst <= f.tol), worst <= f.tol);

  ojson tw = ojson::array();
  for (double w : tau.block_weights()) tw.push_back(w);
  return {ojson{{"trace_block_weights", tw},
                {"trace_scaling", scaling},
                {"sum_inverse_S", all_uniform ? num(inv_sum, kScalingTol) : ojson(nullptr)},
                {"support", projection_json(p)},
                {"support_self_similar", checked(selfsim_defect, kScalingTol, p_selfsim)},
                {"vanishing_gate", gate},
                {"overlap_traces", matrix_json(ov)},
                {"max_off_diagonal", num(off, f.tol)},
                {"checks", checks.json()}},
          std::nullopt, checks.pass()};
}

// ---------------------------------------------------------------- diagnose

CommandResult cmd_diagnose(const Scenario& s, const Flags& f) {
  const Seminorm& L = need_seminorm(s);
  std::optional<Element> builtin;
  const Element* a = s.find_bump(f.bump);
  if (a == nullptr) {
    if (f.bump != "I" && f.bump != "unit") {
      throw PreconditionError("no bump named \"" + f.bump + "\" in the scenario (built-in: I)");
    }
    builtin = s.algebra.unit();
    a = &*builtin;
  }
  const BumpCheck bc = is_bump(*a);
  if (!bc.is_bump) throw PreconditionError("\"" + f.bump + "\" is not a compactly supported bump: " + bc.reason);
  const std::vector<Element> flat = local_flat_space(L, *a);
  const LocalClass lc = classify_local(L, *a);
  ojson basis = ojson::array();
  for (const auto& e : flat) basis.push_back(element_json(e));

  // Probe only: supports and density ranks of word fixed states.
  ojson words = ojson::array();
  for (int len = 1; len <= 2; ++len) {
    std::vector<Word> ws;
    try {
      ws = enumerate_words(s.ifs.size(), len, f.budget);
    } catch (const ResourceError&) {
      break;
    }
    for (const Word& w : ws) {
      const FixedSet fs = word_fixed_state(s.ifs, w);
      const Projection supp = state_support(fs.representative);
      words.push_back(ojson{{"word", w.to_string()},
                            {"fixed_set_dimension", fs.dimension},
                            {"density_rank", supp.rank()},
                            {"support", projection_json(supp)}});
    }
  }
  Checks checks;
  checks.add("bump", ojson{{"witness", "unit"}}, bc.is_bump);
  return {ojson{{"bump", f.bump},
                {"flat_dim", lc.flat_dim},
                {"classification", to_string(lc.classification)},
                {"boundedness", "automatic in finite dimensions"},
                {"flat_basis", basis},
                {"word_fixed_states", words},
                {"checks", checks.json()}},
          std::nullopt, checks.pass()};
}

// ---------------------------------------------------------------- classical

CommandResult cmd_classical(const Scenario& s, const Flags& f) {
  if (!s.commutative()) throw PreconditionError("classical needs a commutative scenario with \"space\" and \"maps\"");
  const FiniteMetricSpace& x = *s.space;
  const std::vector<PointMap>& maps = s.point_maps;
  const DiagonalLift lift = diagonal_lift(x);
  Checks checks;
  Rng rng(f.seed);

  ojson measures = ojson::array();
  for (const Weights& pi : s.weights) {
    const HutchinsonResult h = hutchinson_measure(maps, pi, x);
    const FixedSet fs = fixed_state_eigen(s.ifs, pi);
    const auto diag = fs.representative.density().diagonal_entries();
    double gap = 0.0;
    ojson masses = ojson::array();
    for (int i = 0; i < x.n_points(); ++i) {
      gap = std::max(gap, std::abs(diag[i].real() - h.measure[i]));
      masses.push_back(h.measure[i]);
    }
    const bool ok = gap <= kClassicalTol && h.dimension == fs.dimension;
    measures.push_back(ojson{{"weights", weights_json(pi)},
                             {"hutchinson_masses", masses},
                             {"dimension", h.dimension},
                             {"lifted_fixed_set_dimension", fs.dimension},
                             {"max_mass_gap_to_lift", checked(gap, kClassicalTol, gap <= kClassicalTol)}});
    checks.add("Hutchinson measure vs lifted eigensolve", ojson{{"gap", gap}}, ok);
  }

  bool contractive = true;
  ojson lips = ojson::array();
  for (const auto& g : maps) {
    const ExtendedReal lip = lipschitz_constant(g, x);
    lips.push_back(lip.as_double());
    contractive = contractive && lip < ExtendedReal(1.0);
  }
  ojson attractor{{"lipschitz_constants", lips}};
  if (contractive) {
    int m_max = 1;
    while (m_max < 10) {
      std::uint64_t count = 1;
      for (int i = 0; i <= m_max; ++i) count *= static_cast<std::uint64_t>(maps.size());
      if (count > f.budget) break;
      ++m_max;
    }
    ojson sizes = ojson::array();
    std::vector<int> k_set;
    for (int m = 1; m <= m_max; ++m) {
      k_set = attractor_points(maps, x, m);
      sizes.push_back(static_cast<int>(k_set.size()));
    }
    std::set<int> image;
    for (const auto& g : maps) {
      for (int p : k_set) image.insert(g(p));
    }
    const bool self_similar = image == std::set<int>(k_set.begin(), k_set.end());
    checks.add("attractor K = union g_i(K)", ojson{{"points", k_set}}, self_similar);
    attractor["points"] = k_set;
    attractor["sizes_by_M"] = sizes;
    attractor["self_similar"] = self_similar;
    for (const Weights& pi : s.weights) {
      if (!pi.strict()) continue;
      const std::vector<int> supp = hutchinson_measure(maps, pi, x).measure.support(kClassicalTol);
      checks.add("support of Hutchinson measure = attractor", ojson{{"support", supp}}, supp == k_set);
    }
  } else {
    attractor["skipped"] = "some map is not a strict contraction";
  }

  double worst = 0.0;
  int inf_mismatch = 0;
  for (int t = 0; t < 20; ++t) {
    const State a = random_state(lift.algebra, rng, t % 5 == 0);
    const State b = random_state(lift.algebra, rng, t % 7 == 0);
    std::vector<double> ma;
    std::vector<double> mb;
    for (const auto& z : a.density().diagonal_entries()) ma.push_back(z.real());
    for (const auto& z : b.density().diagonal_entries()) mb.push_back(z.real());
    const ExtendedReal w = wasserstein1(Measure(ma), Measure(mb), x);
    const ExtendedReal d = spectral_distance(lift.seminorm, a, b);
    if (w.is_inf() != d.is_inf()) {
      ++inf_mismatch;
    } else if (!w.is_inf()) {
      worst = std::max(worst, std::abs(w.value() - d.value()));
    }
  }
  checks.add("Wasserstein-1 = spectral distance on the lift",
             ojson{{"pairs", 20}, {"inf_mismatches", inf_mismatch},
                   {"max_gap", checked(worst, kClassicalTol, worst <= kClassicalTol)}},
             inf_mismatch == 0 && worst <= kClassicalTol);

  return {ojson{{"points", x.n_points()}, {"measures", measures}, {"attractor", attractor}, {"checks", checks.json()}},
          std::nullopt, checks.pass()};
}

using Handler = std::function<CommandResult(const Scenario&, const Flags&)>;

const std::map<std::string, Handler>& handlers() {
  static const std::map<std::string, Handler> table{
      {"validate", cmd_validate},       {"fixed-state", cmd_fixed_state},
      {"distance", cmd_distance},       {"dilation", cmd_dilation},
      {"selfsim-check", cmd_selfsim},   {"support-invariance", cmd_support_invariance},
      {"codespace", cmd_codespace},     {"overlap", cmd_overlap},
      {"diagnose", cmd_diagnose},       {"classical", cmd_classical},
  };
  return table;
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& [k, v] : handlers()) out.push_back(k);
    return out;
  }();
  return names;
}

CommandResult run_command(const std::string& command, const Scenario& scenario, const Flags& flags) {
  const auto it = handlers().find(command);
  if (it == handlers().end()) throw std::invalid_argument("unknown command \"" + command + "\"");
  CommandResult r = it->second(scenario, flags);
  ojson head{{"scenario", scenario.name},
             {"command", command},
             {"seed", flags.seed},
             {"tol", flags.tol},
             {"budget", flags.budget},
             {"pass", r.pass}};
  head.update(r.report);
  r.report = std::move(head);
  return r;
}

}  // namespace ncfractal::cli
