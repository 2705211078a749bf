#include "ncfractal/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <sstream>
#include <thread>

namespace ncfractal {

namespace {

constexpr int kStallWindow = 20;

Element density_of(const Algebra& alg, const RVector& c) { return alg.from_coords(c); }

double trace_gap(const Algebra& alg, const RVector& a, const RVector& b) {
  return density_of(alg, a - b).trace_norm();
}

State state_from_coords(const Algebra& alg, const RVector& c, const char* what) {
  try {
    return State::from_density(alg.from_coords(c));
  } catch (const DomainError& e) {
    throw NumericalError(std::string(what) + " left the state space: " + e.what());
  }
}

/// Fixed set of the affine map c -> T c on density coordinates.
FixedSet fixed_set_of(const Algebra& alg, const RMatrix& t) {
  const Eigen::Index n = t.rows();
  const RMatrix a = t - RMatrix::Identity(n, n);
  Eigen::JacobiSVD<RMatrix> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const RVector s = svd.singularValues();

  std::vector<Eigen::Index> null_idx;
  std::vector<std::string> warnings;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) <= kNullSpaceCut) {
      null_idx.push_back(i);
    } else if (s(i) <= kRankWarnBand) {
      std::ostringstream msg;
      msg.precision(3);
      msg << "numerical rank ambiguity: singular value " << s(i) << " of T - I lies within " << kRankWarnBand
          << " of the null-space cut " << kNullSpaceCut;
      warnings.push_back(msg.str());
    }
  }
  // T preserves the trace, so 1 is always an eigenvalue; a missing null
  // vector means the cut was too strict for this matrix.
  if (null_idx.empty()) {
    null_idx.push_back(s.size() - 1);
    std::ostringstream msg;
    msg << "no singular value of T - I below the cut; using the smallest (" << s(s.size() - 1) << ")";
    warnings.push_back(msg.str());
  }

  const Eigen::Index d = static_cast<Eigen::Index>(null_idx.size());
  RMatrix k(n, d);
  RMatrix w(n, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    k.col(j) = svd.matrixV().col(null_idx[j]);
    w.col(j) = svd.matrixU().col(null_idx[j]);
  }
  // Projection onto ker(T - I) along range(T - I): the Cesaro limit of T^m.
  const RVector mixed = alg.coords(State::maximally_mixed(alg).density());
  const RMatrix wk = w.transpose() * k;
  const RVector rep = k * wk.fullPivLu().solve(w.transpose() * mixed);

  std::vector<Element> basis;
  for (Eigen::Index j = 0; j < d; ++j) basis.push_back(alg.from_coords(k.col(j)));
  std::vector<double> sv(s.data(), s.data() + s.size());
  return FixedSet{static_cast<int>(d), state_from_coords(alg, rep, "fixed-state representative"),
                  std::move(basis), std::move(sv), std::move(warnings)};
}

}  // namespace

RMatrix markov_matrix(const DualIFS& ifs, const Weights& pi) {
  if (pi.size() != ifs.size()) {
    throw StructuralError("weights have length " + std::to_string(pi.size()) + " but the IFS has " +
                          std::to_string(ifs.size()) + " maps");
  }
  const int n = ifs.algebra().real_dim();
  RMatrix t = RMatrix::Zero(n, n);
  for (int i = 0; i < ifs.size(); ++i) t += pi[i] * ifs[i].matrix().transpose();
  return t;
}

State markov_apply(const DualIFS& ifs, const Weights& pi, const State& rho) {
  const Algebra& alg = ifs.algebra();
  if (!(rho.algebra() == alg)) throw StructuralError("markov_apply: state lives on another algebra");
  return state_from_coords(alg, markov_matrix(ifs, pi) * alg.coords(rho.density()), "markov_apply");
}

const char* to_string(IterationMode mode) { return mode == IterationMode::plain ? "plain" : "cesaro"; }

void ConvergenceTrace::push(int step, double gap, std::string metric) {
  if (!rows.empty() && step <= rows.back().step) throw StructuralError("trace steps must increase");
  rows.push_back({step, gap, std::move(metric)});
}

std::string ConvergenceTrace::to_csv() const {
  std::ostringstream out;
  out.precision(17);
  out << "step,gap,metric\n";
  for (const auto& r : rows) out << r.step << ',' << r.gap << ',' << r.metric << '\n';
  return out.str();
}

IterationResult fixed_state_iterate(const DualIFS& ifs, const Weights& pi, const State& rho0, int max_steps,
                                    double gap_tol, IterationMode mode, const Seminorm* L) {
  const Algebra& alg = ifs.algebra();
  if (!(rho0.algebra() == alg)) throw StructuralError("fixed_state_iterate: start state on another algebra");
  if (max_steps < 0) throw DomainError("max_steps must be nonnegative");
  const RMatrix t = markov_matrix(ifs, pi);

  RVector prev = alg.coords(rho0.density());
  RVector cur = prev;
  RVector sum = cur;  // sum of rho_0 .. rho_step
  RVector result = cur;
  ConvergenceTrace trace;
  std::vector<double> gaps;
  IterationMode active = mode;
  bool converged = false;

  const double initial = trace_gap(alg, t * cur, cur);
  trace.push(0, initial, "trace_norm");
  if (initial <= gap_tol) {
    converged = true;
  } else {
    for (int step = 1; step <= max_steps; ++step) {
      prev = cur;
      cur = t * cur;
      sum += cur;
      double gap;
      if (active == IterationMode::plain) {
        gap = trace_gap(alg, cur, prev);
        result = cur;
      } else {
        // Invariance defect of the running average: ||rho_{step+1} - rho_0|| / (step+1).
        result = sum / static_cast<double>(step + 1);
        gap = trace_gap(alg, t * result, result);
      }
      trace.push(step, gap, "trace_norm");
      gaps.push_back(gap);
      if (gap <= gap_tol) {
        converged = true;
        break;
      }
      const std::size_t g = gaps.size();
      if (active == IterationMode::plain && g > kStallWindow &&
          gaps[g - 1] >= gaps[g - 1 - kStallWindow] * (1.0 - 1e-9)) {
        active = IterationMode::cesaro;
      }
    }
  }

  IterationResult out{state_from_coords(alg, result, "fixed_state_iterate"), std::move(trace), false, active,
                      static_cast<int>(gaps.size()), 0.0, std::nullopt};
  out.residual = trace_gap(alg, t * alg.coords(out.state.density()), alg.coords(out.state.density()));
  out.converged = converged && out.residual <= 10.0 * gap_tol;
  if (L != nullptr && active == IterationMode::plain) {
    out.last_dl_gap = spectral_distance(*L, state_from_coords(alg, prev, "iterate"), out.state);
  }
  return out;
}

FixedSet fixed_state_eigen(const DualIFS& ifs, const Weights& pi) {
  return fixed_set_of(ifs.algebra(), markov_matrix(ifs, pi));
}

std::vector<State> fixed_set_samples(const FixedSet& fs) {
  const Algebra alg = fs.representative.algebra();
  std::vector<State> out{fs.representative};
  if (fs.dimension <= 1) return out;

  const RVector u = alg.coords(alg.unit()).normalized();
  RMatrix dirs(alg.real_dim(), fs.dimension);
  for (int j = 0; j < fs.dimension; ++j) {
    const RVector z = alg.coords(fs.basis[j]);
    dirs.col(j) = z - u * u.dot(z);
  }
  Eigen::JacobiSVD<RMatrix> svd(dirs, Eigen::ComputeThinU);
  const Element rho = fs.representative.density();
  for (Eigen::Index j = 0; j < svd.singularValues().size(); ++j) {
    if (svd.singularValues()(j) <= 1e-8) continue;
    const Element z = alg.from_coords(svd.matrixU().col(j));
    // Positivity holds on an interval [0, t_max] with t_max <= 2 / ||z||.
    double lo = 0.0;
    double hi = 2.0 / z.op_norm();
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (min_eigenvalue(rho + z * mid) >= -1e-12) lo = mid;
      else hi = mid;
    }
    out.push_back(State::from_density(rho + z * (0.5 * lo)));
  }
  return out;
}

FixedSet word_fixed_state(const DualIFS& ifs, const Word& w) {
  if (w.letters.empty()) throw DomainError("word_fixed_state needs a nonempty word");
  return fixed_set_of(ifs.algebra(), word_hom(ifs, w).matrix().transpose());
}

std::vector<Word> enumerate_words(int k, int m, std::uint64_t budget) {
  if (k < 1) throw DomainError("alphabet must have at least one letter");
  if (m < 0) throw DomainError("word length must be nonnegative");
  std::uint64_t count = 1;
  bool over = false;
  for (int i = 0; i < m && !over; ++i) {
    over = count > budget / static_cast<std::uint64_t>(k);
    count *= static_cast<std::uint64_t>(k);
  }
  if (over || count > budget) {
    std::ostringstream msg;
    msg << "word budget exceeded: " << k << "^" << m << " words > budget " << budget
        << " (raise with --budget or NCFRACTAL_BUDGET)";
    throw ResourceError(msg.str());
  }
  std::vector<Word> out;
  out.reserve(count);
  std::vector<int> letters(static_cast<std::size_t>(m), 0);
  for (std::uint64_t idx = 0; idx < count; ++idx) {
    out.push_back(Word{letters, k});
    for (int pos = m - 1; pos >= 0; --pos) {
      if (++letters[pos] < k) break;
      letters[pos] = 0;
    }
  }
  return out;
}

double word_weight(const Weights& pi, const Word& w) {
  double p = 1.0;
  for (int l : w.letters) p *= pi[l];
  return p;
}

State code_average(const DualIFS& ifs, const Weights& pi, int m, std::uint64_t budget) {
  if (m < 1) throw DomainError("code_average needs M >= 1");
  if (pi.size() != ifs.size()) throw StructuralError("code_average: one weight per map");
  const Algebra& alg = ifs.algebra();
  const std::vector<Word> words = enumerate_words(ifs.size(), m, budget);

  std::vector<RVector> reps(words.size());
  const std::size_t workers =
      std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, std::max<std::size_t>(1, words.size() / 16));
  const std::size_t chunk = (words.size() + workers - 1) / workers;
  std::vector<std::future<void>> jobs;
  for (std::size_t w0 = 0; w0 < words.size(); w0 += chunk) {
    const std::size_t w1 = std::min(words.size(), w0 + chunk);
    jobs.push_back(std::async(std::launch::async, [&, w0, w1] {
      for (std::size_t i = w0; i < w1; ++i) {
        reps[i] = alg.coords(word_fixed_state(ifs, words[i]).representative.density());
      }
    }));
  }
  for (auto& j : jobs) j.get();

  RVector acc = RVector::Zero(alg.real_dim());
  double total = 0.0;
  for (std::size_t i = 0; i < words.size(); ++i) {
    const double p = word_weight(pi, words[i]);
    total += p;
    acc += p * reps[i];
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw NumericalError("word weights sum to " + std::to_string(total) + " instead of 1");
  }
  return state_from_coords(alg, acc, "code_average");
}

BanachCertificate banach_certificate(const DualIFS& ifs, const Weights& pi, const Seminorm& L, const State& phi0,
                                     int m, std::uint64_t budget) {
  const IfsDilations dil = ifs_dilations(L, ifs, pi);
  if (dil.sup.is_inf() || dil.sup.value() >= 1.0 - kContractionSlack) {
    throw PreconditionError("Lambda_sup = " + dil.sup.to_string() +
                            " >= 1: the rate bound requires strict contractivity of every map");
  }
  BanachCertificate cert;
  cert.lambda = dil.sup.value();
  for (int i = 0; i < ifs.size(); ++i) {
    const ExtendedReal d = spectral_distance(L, phi0, dual_apply(ifs[i], phi0));
    if (d.is_inf()) {
      throw PreconditionError("C = max_i d_L(phi0, f_i^* phi0) is infinite for map " + ifs.names()[i] +
                              ": the start state must be at finite distance from its images");
    }
    cert.c = std::max(cert.c, d.value());
  }
  State iterate = phi0;
  for (int step = 0; step < m; ++step) iterate = markov_apply(ifs, pi, iterate);
  cert.lhs = spectral_distance(L, iterate, code_average(ifs, pi, m, budget));
  cert.rhs = cert.c * std::pow(cert.lambda, m) / (1.0 - cert.lambda);
  cert.pass = !cert.lhs.is_inf() && cert.lhs.value() <= cert.rhs + cert.tol;
  return cert;
}

CesaroReport cesaro_average(const StarHom& f, const Element& b, int n, const Seminorm* L) {
  if (n < 0) throw DomainError("cesaro_average needs n >= 0");
  Element power = b;
  Element sum = b;
  Element previous = b;
  for (int i = 1; i <= n; ++i) {
    power = f(power);
    previous = sum * (1.0 / i);
    sum += power;
  }
  Element avg = sum * (1.0 / (n + 1));
  CesaroReport r{avg, n == 0 ? 0.0 : (avg - previous).op_norm(), (f(avg) - avg).op_norm(), std::nullopt};
  if (L != nullptr) r.seminorm_value = (*L)(avg.hermitian_part());
  return r;
}

}  // namespace ncfractal
