#include "ncfractal/seminorm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "ncfractal/random.hpp"
#include "simplex.hpp"

namespace ncfractal {

namespace {

constexpr double kRankTol = 1e-10;

/// Orthonormal basis of span{u} + span(cols of n), with u/|u| first.
RMatrix unit_first_basis(const RVector& u, const RMatrix& n) {
  const RVector e = u.normalized();
  RMatrix rest = n - e * (e.transpose() * n);
  RMatrix out(u.size(), 1);
  out.col(0) = e;
  if (rest.cols() == 0) return out;
  Eigen::JacobiSVD<RMatrix> svd(rest, Eigen::ComputeThinU);
  int rank = 0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) {
    if (svd.singularValues()(i) > 1e-8) ++rank;
  }
  out.conservativeResize(Eigen::NoChange, 1 + rank);
  out.rightCols(rank) = svd.matrixU().leftCols(rank);
  return out;
}

/// Component label per point of an extended metric (finite distance = same component).
std::vector<int> metric_components(const RMatrix& d) {
  const int n = static_cast<int>(d.rows());
  std::vector<int> label(static_cast<std::size_t>(n), -1);
  int next = 0;
  for (int s = 0; s < n; ++s) {
    if (label[s] >= 0) continue;
    label[s] = next;
    for (int t = s + 1; t < n; ++t) {
      if (std::isfinite(d(s, t))) label[t] = next;
    }
    ++next;
  }
  return label;
}

struct Pinv {
  RMatrix pinv;
  double largest = 0.0;
};

Pinv pseudo_inverse(const RMatrix& a) {
  Pinv out;
  out.pinv = RMatrix::Zero(a.cols(), a.rows());
  if (a.size() == 0) return out;
  Eigen::JacobiSVD<RMatrix> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  out.largest = s.size() > 0 ? s(0) : 0.0;
  const double cut = kRankTol * std::max(1.0, out.largest);
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > cut) out.pinv += svd.matrixV().col(i) * svd.matrixU().col(i).transpose() / s(i);
  }
  return out;
}

/// sup { <c, b> : |b_i - b_j| <= d_ij } on a space where c sums to zero on
/// every component. One potential per component is pinned to 0 and the rest
/// are split into positive and negative parts.
double metric_dual_lp(const RMatrix& d, const RVector& c) {
  const int n = static_cast<int>(d.rows());
  const std::vector<int> comp = metric_components(d);
  std::vector<int> var(static_cast<std::size_t>(n), -1);
  std::vector<bool> root_seen;
  int nvar = 0;
  for (int i = 0; i < n; ++i) {
    if (comp[i] >= static_cast<int>(root_seen.size())) root_seen.resize(comp[i] + 1, false);
    if (!root_seen[comp[i]]) {
      root_seen[comp[i]] = true;
      continue;
    }
    var[i] = nvar++;
  }
  if (nvar == 0) return 0.0;

  std::vector<std::pair<int, int>> rows;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i != j && std::isfinite(d(i, j))) rows.emplace_back(i, j);
    }
  }
  RMatrix a = RMatrix::Zero(static_cast<Eigen::Index>(rows.size()), 2 * nvar);
  RVector rhs(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto [i, j] = rows[r];
    if (var[i] >= 0) {
      a(r, 2 * var[i]) += 1.0;
      a(r, 2 * var[i] + 1) -= 1.0;
    }
    if (var[j] >= 0) {
      a(r, 2 * var[j]) -= 1.0;
      a(r, 2 * var[j] + 1) += 1.0;
    }
    rhs(r) = d(i, j);
  }
  RVector obj = RVector::Zero(2 * nvar);
  for (int i = 0; i < n; ++i) {
    if (var[i] >= 0) {
      obj(2 * var[i]) = c(i);
      obj(2 * var[i] + 1) = -c(i);
    }
  }
  const detail::SimplexResult res = detail::simplex_maximize(a, rhs, obj);
  if (res.unbounded) throw NumericalError("metric dual LP is unbounded; kernel pairing should have been nonzero");
  return std::max(0.0, res.objective);
}

RVector difference_coords(const Seminorm& L, const State& phi, const State& psi) {
  if (!(phi.algebra() == L.algebra()) || !(psi.algebra() == L.algebra())) {
    throw StructuralError("states and seminorm live on different algebras");
  }
  return L.algebra().coords(phi.density() - psi.density());
}

double kernel_pairing_coords(const Seminorm& L, const RVector& c) {
  const RVector pairing = L.kernel_coords().transpose() * c;
  return pairing.size() > 0 ? pairing.cwiseAbs().maxCoeff() : 0.0;
}

}  // namespace

// ---------------------------------------------------------------- ExtendedReal

ExtendedReal::ExtendedReal(double v) : value_(v) {
  if (std::isinf(v) && v > 0) {
    inf_ = true;
    value_ = 0.0;
    return;
  }
  if (!(v >= 0.0)) throw DomainError("extended reals are nonnegative");
}

ExtendedReal ExtendedReal::inf() {
  ExtendedReal r;
  r.inf_ = true;
  return r;
}

double ExtendedReal::value() const {
  if (inf_) throw DomainError("value() of an infinite extended real");
  return value_;
}

std::string ExtendedReal::to_string() const {
  if (inf_) return "inf";
  std::ostringstream s;
  s.precision(17);
  s << value_;
  return s.str();
}

ExtendedReal operator+(const ExtendedReal& a, const ExtendedReal& b) {
  if (a.inf_ || b.inf_) return ExtendedReal::inf();
  return ExtendedReal(a.value_ + b.value_);
}

ExtendedReal operator*(const ExtendedReal& a, const ExtendedReal& b) {
  if (a.inf_ || b.inf_) {
    if ((!a.inf_ && a.value_ == 0.0) || (!b.inf_ && b.value_ == 0.0)) {
      throw DomainError("INF * 0 is undefined in extended arithmetic");
    }
    return ExtendedReal::inf();
  }
  return ExtendedReal(a.value_ * b.value_);
}

// ---------------------------------------------------------------- Seminorm

Seminorm Seminorm::euclidean(Algebra alg, RMatrix delta) {
  if (delta.cols() != alg.real_dim()) {
    throw StructuralError("euclidean seminorm: delta needs one column per real coordinate");
  }
  Seminorm L(SeminormKind::euclidean, std::move(alg));
  L.delta_ = std::move(delta);
  const double at_unit = L.eval_coords(L.algebra_.coords(L.algebra_.unit()));
  if (at_unit > 1e-12) {
    throw DomainError("euclidean seminorm does not vanish on the unit (L(I) = " + std::to_string(at_unit) + ")");
  }
  L.compute_kernel();
  return L;
}

Seminorm Seminorm::traceless(const Algebra& alg, const std::vector<double>& weights) {
  const int n = alg.real_dim();
  const RVector u = alg.coords(alg.unit()).normalized();
  RMatrix delta = RMatrix::Identity(n, n) - u * u.transpose();
  if (!weights.empty()) {
    if (static_cast<int>(weights.size()) != n) {
      throw StructuralError("traceless seminorm: one weight per real coordinate");
    }
    delta = Eigen::Map<const RVector>(weights.data(), n).asDiagonal() * delta;
  }
  // The projector leaves O(eps) on the unit; clean it to exactly zero.
  delta -= (delta * u) * u.transpose();
  return euclidean(alg, std::move(delta));
}

Seminorm Seminorm::commutator(const Element& d) {
  if (!d.is_self_adjoint(1e-12)) throw DomainError("commutator seminorm needs a self-adjoint D");
  const Algebra alg = d.algebra();
  int rows = 0;
  for (int n : alg.block_dims()) rows += 2 * n * n;
  RMatrix delta(rows, alg.real_dim());
  for (int k = 0; k < alg.real_dim(); ++k) {
    const Element e = alg.basis_element(k);
    const Element c = d * e - e * d;
    int r = 0;
    for (const auto& m : c.blocks()) {
      for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
          delta(r++, k) = m(i, j).real();
          delta(r++, k) = m(i, j).imag();
        }
      }
    }
  }
  return euclidean(alg, std::move(delta));
}

Seminorm Seminorm::metric(RMatrix distances) {
  const Eigen::Index n = distances.rows();
  if (n < 1 || distances.cols() != n) throw StructuralError("metric seminorm: distance matrix must be square");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (distances(i, i) != 0.0) throw DomainError("metric seminorm: d_ii must be 0");
    for (Eigen::Index j = 0; j < n; ++j) {
      const double dij = distances(i, j);
      if (std::isnan(dij) || dij < 0.0) throw DomainError("metric seminorm: distances must be nonnegative");
      if (i != j && dij == 0.0) throw DomainError("metric seminorm: distinct points need positive distance");
      if (dij != distances(j, i)) throw DomainError("metric seminorm: distance matrix must be symmetric");
    }
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index k = 0; k < n; ++k) {
        const double via = distances(i, j) + distances(j, k);
        if (std::isfinite(via) && distances(i, k) > via * (1.0 + 1e-12)) {
          std::ostringstream msg;
          msg << "metric seminorm: triangle inequality fails for (" << i << ", " << j << ", " << k << ")";
          throw DomainError(msg.str());
        }
      }
    }
  }
  Seminorm L(SeminormKind::metric, Algebra::diagonal(static_cast<int>(n)));
  L.distances_ = std::move(distances);
  L.compute_kernel();
  return L;
}

void Seminorm::compute_kernel() {
  const RVector u = algebra_.coords(algebra_.unit());
  if (kind_ == SeminormKind::euclidean) {
    const int n = algebra_.real_dim();
    RMatrix null_space(n, 0);
    if (delta_.rows() == 0) {
      null_space = RMatrix::Identity(n, n);
    } else {
      Eigen::JacobiSVD<RMatrix> svd(delta_, Eigen::ComputeFullV);
      const auto& s = svd.singularValues();
      const double cut = kRankTol * std::max(1.0, s.size() > 0 ? s(0) : 0.0);
      int rank = 0;
      for (Eigen::Index i = 0; i < s.size(); ++i) {
        if (s(i) > cut) ++rank;
      }
      null_space = svd.matrixV().rightCols(n - rank);
    }
    kernel_ = unit_first_basis(u, null_space);
  } else {
    const std::vector<int> comp = metric_components(distances_);
    const int ncomp = *std::max_element(comp.begin(), comp.end()) + 1;
    RMatrix ind = RMatrix::Zero(algebra_.real_dim(), ncomp);
    for (std::size_t i = 0; i < comp.size(); ++i) ind(static_cast<Eigen::Index>(i), comp[i]) = 1.0;
    kernel_ = unit_first_basis(u, ind);
  }
}

double Seminorm::operator()(const Element& b) const {
  if (!b.same_shape(algebra_.zero())) throw StructuralError("seminorm evaluated on another algebra");
  if (!b.is_self_adjoint(1e-9)) throw DomainError("seminorm evaluated on a non-self-adjoint element");
  return eval_coords(algebra_.coords(b));
}

double Seminorm::eval_coords(const RVector& v) const {
  if (kind_ == SeminormKind::euclidean) return delta_.rows() == 0 ? 0.0 : (delta_ * v).norm();
  double best = 0.0;
  const Eigen::Index n = distances_.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      if (std::isfinite(distances_(i, j))) best = std::max(best, std::abs(v(i) - v(j)) / distances_(i, j));
    }
  }
  return best;
}

std::vector<Element> seminorm_kernel(const Seminorm& L) {
  std::vector<Element> out;
  for (Eigen::Index k = 0; k < L.kernel_coords().cols(); ++k) {
    out.push_back(L.algebra().from_coords(L.kernel_coords().col(k)));
  }
  return out;
}

double kernel_pairing(const Seminorm& L, const State& phi, const State& psi) {
  return kernel_pairing_coords(L, difference_coords(L, phi, psi));
}

ExtendedReal dual_norm(const Seminorm& L, const RVector& c) {
  if (c.size() != L.algebra().real_dim()) throw StructuralError("dual_norm: coordinate length mismatch");
  if (kernel_pairing_coords(L, c) > kKernelPairingTol) return ExtendedReal::inf();
  if (L.kind() == SeminormKind::euclidean) {
    // b = Delta^+ y with |y| <= 1 sweeps the ball modulo the kernel.
    const Pinv p = pseudo_inverse(L.delta());
    return ExtendedReal((p.pinv.transpose() * c).norm());
  }
  return ExtendedReal(metric_dual_lp(L.distances(), c));
}

ExtendedReal spectral_distance(const Seminorm& L, const State& phi, const State& psi) {
  return dual_norm(L, difference_coords(L, phi, psi));
}

namespace {

// Minimises a log-sum-exp smoothing of the Lipschitz constant over
// {<c,u> = 1, u orthogonal to the kernel}, sharpening it in stages. Every
// iterate is scored with the exact ratio, so the result stays a lower bound.
double smoothed_metric_ascent(const Seminorm& L, const RVector& c, const RMatrix& q, RVector& best_u, double best) {
  const RMatrix& d = L.distances();
  const Eigen::Index n = d.rows();
  const RVector qc = q * c;
  if (qc.norm() < 1e-14 || c.dot(best_u) <= 0.0) return best;
  const RVector chat = qc / qc.norm();
  const RMatrix proj = q - chat * chat.transpose();

  auto smoothed = [&](const RVector& u, double beta, RVector* grad) {
    double top = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        if (i != j && std::isfinite(d(i, j))) top = std::max(top, (u(i) - u(j)) / d(i, j));
    double sum = 0.0;
    if (grad) grad->setZero(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        if (i == j || !std::isfinite(d(i, j))) continue;
        const double w = std::exp(beta * ((u(i) - u(j)) / d(i, j) - top));
        sum += w;
        if (grad) {
          (*grad)(i) += w / d(i, j);
          (*grad)(j) -= w / d(i, j);
        }
      }
    }
    if (grad) *grad /= sum;
    return top + std::log(sum) / beta;
  };

  RVector u = best_u / c.dot(best_u);
  double t = 1.0;
  for (double scale = 4.0; scale <= 4e6; scale *= 4.0) {
    const double beta = scale / std::max(L.eval_coords(u), 1e-300);
    for (int it = 0; it < 1500; ++it) {
      RVector g;
      const double f = smoothed(u, beta, &g);
      const RVector pg = proj * g;
      const double g2 = pg.squaredNorm();
      if (g2 < 1e-28) break;
      t *= 2.0;
      bool accepted = false;
      while (t > 1e-18) {
        const RVector cand = u - t * pg;
        if (smoothed(cand, beta, nullptr) <= f - 1e-4 * t * g2) {
          u = cand;
          accepted = true;
          break;
        }
        t *= 0.5;
      }
      if (!accepted) break;
      const double l = L.eval_coords(u);
      if (l > 0.0 && std::abs(c.dot(u)) / l > best) {
        best = std::abs(c.dot(u)) / l;
        best_u = u;
      }
    }
  }
  return best;
}

}  // namespace

double spectral_distance_oracle(const Seminorm& L, const State& phi, const State& psi, int n_samples,
                                std::uint64_t seed, bool refine) {
  const RVector c = difference_coords(L, phi, psi);
  if (kernel_pairing_coords(L, c) > kKernelPairingTol) return std::numeric_limits<double>::infinity();
  if (c.norm() == 0.0) return 0.0;

  const Eigen::Index n = c.size();
  const RMatrix& k = L.kernel_coords();
  const RMatrix q = RMatrix::Identity(n, n) - k * k.transpose();
  if (q.norm() < 1e-12) return 0.0;

  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto random_direction = [&] {
    RVector g(n);
    for (Eigen::Index i = 0; i < n; ++i) g(i) = normal(rng);
    return RVector(q * g);
  };
  auto ratio = [&](const RVector& u) {
    const double l = L.eval_coords(u);
    return l > 0.0 ? std::abs(c.dot(u)) / l : 0.0;
  };

  RVector best_u = q * c;
  double best = ratio(best_u);
  for (int s = 0; s < n_samples; ++s) {
    RVector u = random_direction();
    const double r = ratio(u);
    if (r > best) {
      best = r;
      best_u = u;
    }
  }
  if (!refine || best_u.norm() == 0.0) return best;

  // The ratio is quasi-concave on {<c,u> > 0}, so a shrinking random pattern
  // search from the best sample has no spurious local maxima to stall in.
  if (c.dot(best_u) < 0) best_u = -best_u;
  if (L.kind() == SeminormKind::metric) best = smoothed_metric_ascent(L, c, q, best_u, best);
  best_u.normalize();
  const int trials = static_cast<int>(4 * n + 20);
  for (double step = 0.5; step > 1e-10;) {
    bool improved = false;
    for (int t = 0; t < trials; ++t) {
      RVector d = random_direction();
      const double dn = d.norm();
      if (dn == 0.0) continue;
      for (double sign : {1.0, -1.0}) {
        RVector cand = (best_u + sign * step * d / dn).normalized();
        const double r = ratio(cand);
        if (r > best) {
          best = r;
          best_u = cand;
          improved = true;
        }
      }
    }
    if (!improved) step *= 0.5;
  }
  return best;
}

// ---------------------------------------------------------------- dilations

Dilation dilation_upper(const Seminorm& L, const StarHom& f) {
  if (!(f.algebra() == L.algebra())) throw StructuralError("dilation_upper: morphism and seminorm algebras differ");
  const RMatrix& fm = f.matrix();
  const RMatrix& k = L.kernel_coords();
  for (Eigen::Index j = 0; j < k.cols(); ++j) {
    if (L.eval_coords(fm * k.col(j)) > 1e-9) return {ExtendedReal::inf(), ExtendedReal::inf()};
  }

  if (L.kind() == SeminormKind::euclidean) {
    if (L.delta().rows() == 0) return {0.0, 0.0};
    const Pinv p = pseudo_inverse(L.delta());
    const RMatrix composite = L.delta() * fm * p.pinv;
    Eigen::JacobiSVD<RMatrix> svd(composite);
    const double s = svd.singularValues().size() > 0 ? svd.singularValues()(0) : 0.0;
    return {s, s};
  }

  const RMatrix& d = L.distances();
  const Eigen::Index n = d.rows();
  double best = 0.0;
  if (f.point_map()) {
    const auto& g = *f.point_map();
    for (Eigen::Index x = 0; x < n; ++x) {
      for (Eigen::Index y = x + 1; y < n; ++y) {
        if (!std::isfinite(d(x, y))) continue;
        const double image = d(g[x], g[y]);
        if (!std::isfinite(image)) return {ExtendedReal::inf(), ExtendedReal::inf()};
        best = std::max(best, image / d(x, y));
      }
    }
    return {best, best};
  }
  // (f b)_x - (f b)_y = <F_x - F_y, b>, so by duality each pair contributes
  // the dual norm of the row difference.
  for (Eigen::Index x = 0; x < n; ++x) {
    for (Eigen::Index y = x + 1; y < n; ++y) {
      if (!std::isfinite(d(x, y))) continue;
      const RVector row = (fm.row(x) - fm.row(y)).transpose();
      const ExtendedReal dn = dual_norm(L, row);
      if (dn.is_inf()) return {ExtendedReal::inf(), ExtendedReal::inf()};
      best = std::max(best, dn.value() / d(x, y));
    }
  }
  return {best, best};
}

IfsDilations ifs_dilations(const Seminorm& L, const DualIFS& ifs, const Weights& pi) {
  if (pi.size() != ifs.size()) throw StructuralError("ifs_dilations: one weight per morphism");
  IfsDilations out;
  for (int i = 0; i < ifs.size(); ++i) {
    out.per_map.push_back(dilation_upper(L, ifs[i]));
    out.sum = out.sum + ExtendedReal(pi[i]) * out.per_map.back().upper;
    if (out.sup < out.per_map.back().upper) out.sup = out.per_map.back().upper;
  }
  return out;
}

double lipschitz_consistency_defect(const Seminorm& L, const Element& b, int n_pairs, std::uint64_t seed) {
  const double lb = L(b);
  Rng rng(seed);
  double worst = 0.0;
  for (int i = 0; i < n_pairs; ++i) {
    const State phi = random_state(L.algebra(), rng, i % 2 == 0);
    const State psi = random_state(L.algebra(), rng, i % 3 == 0);
    const ExtendedReal d = spectral_distance(L, phi, psi);
    if (d.is_inf() || d.value() == 0.0) continue;
    const double gap = std::abs(state_eval(phi, b) - state_eval(psi, b));
    worst = std::max(worst, gap / d.value());
  }
  return std::max(0.0, worst - lb);
}

}  // namespace ncfractal
