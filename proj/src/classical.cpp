#include "ncfractal/classical.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "ncfractal/dynamics.hpp"

namespace ncfractal {

namespace {

constexpr double kMassTol = 1e-12;
constexpr double kFlowEps = 1e-15;

/// Successive-shortest-path min-cost flow on a small dense graph.
class MinCostFlow {
 public:
  explicit MinCostFlow(int n) : adj_(static_cast<std::size_t>(n)) {}

  void add_edge(int u, int v, double cap, double cost) {
    adj_[u].push_back({v, static_cast<int>(adj_[v].size()), cap, cost});
    adj_[v].push_back({u, static_cast<int>(adj_[u].size()) - 1, 0.0, -cost});
  }

  /// Pushes as much flow as possible from s to t; returns (flow, cost).
  std::pair<double, double> run(int s, int t) {
    const int n = static_cast<int>(adj_.size());
    double flow = 0.0;
    double cost = 0.0;
    for (;;) {
      // Bellman-Ford: residual costs may be negative.
      std::vector<double> dist(n, std::numeric_limits<double>::infinity());
      std::vector<int> prev_node(n, -1);
      std::vector<int> prev_edge(n, -1);
      dist[s] = 0.0;
      for (int round = 0; round < n; ++round) {
        bool changed = false;
        for (int u = 0; u < n; ++u) {
          if (!std::isfinite(dist[u])) continue;
          for (std::size_t e = 0; e < adj_[u].size(); ++e) {
            const Edge& ed = adj_[u][e];
            if (ed.cap > kFlowEps && dist[u] + ed.cost < dist[ed.to] - 1e-15) {
              dist[ed.to] = dist[u] + ed.cost;
              prev_node[ed.to] = u;
              prev_edge[ed.to] = static_cast<int>(e);
              changed = true;
            }
          }
        }
        if (!changed) break;
      }
      if (!std::isfinite(dist[t])) break;
      double push = std::numeric_limits<double>::infinity();
      for (int v = t; v != s; v = prev_node[v]) push = std::min(push, adj_[prev_node[v]][prev_edge[v]].cap);
      for (int v = t; v != s; v = prev_node[v]) {
        Edge& ed = adj_[prev_node[v]][prev_edge[v]];
        ed.cap -= push;
        adj_[v][ed.rev].cap += push;
      }
      flow += push;
      cost += push * dist[t];
    }
    return {flow, cost};
  }

 private:
  struct Edge {
    int to;
    int rev;
    double cap;
    double cost;
  };
  std::vector<std::vector<Edge>> adj_;
};

/// reach[x][y]: y is reachable from x (reflexive).
std::vector<std::vector<bool>> reachability(const std::vector<std::vector<int>>& succ) {
  const std::size_t n = succ.size();
  std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
  for (std::size_t s = 0; s < n; ++s) {
    std::vector<int> stack{static_cast<int>(s)};
    reach[s][s] = true;
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      for (int v : succ[u]) {
        if (!reach[s][v]) {
          reach[s][v] = true;
          stack.push_back(v);
        }
      }
    }
  }
  return reach;
}

}  // namespace

// ---------------------------------------------------------------- FiniteMetricSpace

FiniteMetricSpace::FiniteMetricSpace(RMatrix d) : d_(std::move(d)) {
  // Seminorm::metric carries the full validation; reuse it for one message set.
  (void)Seminorm::metric(d_);
}

FiniteMetricSpace FiniteMetricSpace::shift_space(int depth) {
  if (depth < 1 || depth > 12) throw DomainError("shift space depth must be in 1..12");
  const int n = 1 << depth;
  RMatrix d = RMatrix::Zero(n, n);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      if (a == b) continue;
      int prefix = 0;
      while (prefix < depth && ((a >> (depth - 1 - prefix)) & 1) == ((b >> (depth - 1 - prefix)) & 1)) ++prefix;
      d(a, b) = std::ldexp(1.0, -prefix);
    }
  }
  return FiniteMetricSpace(std::move(d));
}

FiniteMetricSpace FiniteMetricSpace::discrete(int n) {
  if (n < 1) throw DomainError("discrete space needs at least one point");
  RMatrix d = RMatrix::Ones(n, n) - RMatrix::Identity(n, n);
  return FiniteMetricSpace(std::move(d));
}

FiniteMetricSpace FiniteMetricSpace::random(int n, Rng& rng) {
  if (n < 1) throw DomainError("random space needs at least one point");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<std::pair<double, double>> pts;
  for (int i = 0; i < n; ++i) pts.emplace_back(unit(rng), unit(rng));
  RMatrix d = RMatrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      d(i, j) = d(j, i) = std::hypot(pts[i].first - pts[j].first, pts[i].second - pts[j].second);
    }
  }
  return FiniteMetricSpace(std::move(d));
}

std::vector<int> FiniteMetricSpace::components() const {
  const int n = n_points();
  std::vector<int> label(static_cast<std::size_t>(n), -1);
  int next = 0;
  for (int s = 0; s < n; ++s) {
    if (label[s] >= 0) continue;
    for (int t = s; t < n; ++t) {
      if (std::isfinite(d_(s, t))) label[t] = next;
    }
    ++next;
  }
  return label;
}

// ---------------------------------------------------------------- maps and measures

PointMap make_point_map(std::vector<int> g, int n) {
  if (static_cast<int>(g.size()) != n) {
    throw DomainError("point map has " + std::to_string(g.size()) + " entries for a " + std::to_string(n) +
                      "-point space");
  }
  for (int v : g) {
    if (v < 0 || v >= n) throw DomainError("point map entry " + std::to_string(v) + " out of range");
  }
  return PointMap{std::move(g)};
}

PointMap shift_map(int depth, int letter) {
  if (letter != 0 && letter != 1) throw DomainError("shift letters are 0 and 1");
  const int n = 1 << depth;
  std::vector<int> g(static_cast<std::size_t>(n));
  for (int w = 0; w < n; ++w) g[w] = (letter << (depth - 1)) | (w >> 1);
  return PointMap{std::move(g)};
}

Measure::Measure(std::vector<double> masses) : masses_(std::move(masses)) {
  if (masses_.empty()) throw DomainError("measure on an empty space");
  double sum = 0.0;
  for (double m : masses_) {
    if (!std::isfinite(m) || m < 0.0) throw DomainError("measure masses must be finite and nonnegative");
    sum += m;
  }
  if (std::abs(sum - 1.0) > kMassTol) throw DomainError("measure masses sum to " + std::to_string(sum));
}

Measure Measure::dirac(int n, int x) {
  std::vector<double> m(static_cast<std::size_t>(n), 0.0);
  m.at(x) = 1.0;
  return Measure(std::move(m));
}

std::vector<int> Measure::support(double tol) const {
  std::vector<int> out;
  for (int i = 0; i < size(); ++i) {
    if (masses_[i] > tol) out.push_back(i);
  }
  return out;
}

ExtendedReal lipschitz_constant(const PointMap& g, const FiniteMetricSpace& x) {
  const int n = x.n_points();
  if (static_cast<int>(g.g.size()) != n) throw StructuralError("point map and space sizes differ");
  double best = 0.0;
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      const double num = x(g(a), g(b));
      const double den = x(a, b);
      if (!std::isfinite(den)) continue;
      if (!std::isfinite(num)) return ExtendedReal::inf();
      best = std::max(best, num / den);
    }
  }
  return best;
}

// ---------------------------------------------------------------- Hutchinson measure

HutchinsonResult hutchinson_measure(const std::vector<PointMap>& maps, const Weights& pi,
                                    const FiniteMetricSpace& x) {
  if (static_cast<int>(maps.size()) != pi.size()) throw StructuralError("hutchinson_measure: one weight per map");
  const int n = x.n_points();
  RMatrix p = RMatrix::Zero(n, n);  // p(a, b): probability of jumping a -> b
  for (std::size_t i = 0; i < maps.size(); ++i) {
    if (static_cast<int>(maps[i].g.size()) != n) throw StructuralError("point map and space sizes differ");
    for (int a = 0; a < n; ++a) p(a, maps[i](a)) += pi[static_cast<int>(i)];
  }
  std::vector<std::vector<int>> succ(static_cast<std::size_t>(n));
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      if (p(a, b) > 0.0) succ[a].push_back(b);
    }
  }
  const auto reach = reachability(succ);

  // Closed classes: a is recurrent when everything it reaches reaches back.
  std::vector<int> cls(static_cast<std::size_t>(n), -1);
  std::vector<std::vector<int>> classes;
  for (int a = 0; a < n; ++a) {
    if (cls[a] >= 0) continue;
    bool closed = true;
    for (int b = 0; b < n && closed; ++b) closed = !reach[a][b] || reach[b][a];
    if (!closed) continue;
    std::vector<int> members;
    for (int b = 0; b < n; ++b) {
      if (reach[a][b]) {
        members.push_back(b);
        cls[b] = static_cast<int>(classes.size());
      }
    }
    classes.push_back(std::move(members));
  }

  // Stationary law on each class: mu P = mu with one equation swapped for the mass constraint.
  std::vector<RVector> stationary;
  for (const auto& c : classes) {
    const Eigen::Index m = static_cast<Eigen::Index>(c.size());
    RMatrix a(m, m);
    for (Eigen::Index r = 0; r < m; ++r) {
      for (Eigen::Index s = 0; s < m; ++s) a(r, s) = p(c[s], c[r]) - (r == s ? 1.0 : 0.0);
    }
    a.row(m - 1).setOnes();
    RVector rhs = RVector::Zero(m);
    rhs(m - 1) = 1.0;
    stationary.push_back(a.fullPivLu().solve(rhs));
  }

  // Absorption probabilities from transient points, then the ergodic average of the uniform start.
  std::vector<int> transient;
  for (int a = 0; a < n; ++a) {
    if (cls[a] < 0) transient.push_back(a);
  }
  const Eigen::Index t = static_cast<Eigen::Index>(transient.size());
  RMatrix q(t, t);
  for (Eigen::Index r = 0; r < t; ++r) {
    for (Eigen::Index s = 0; s < t; ++s) q(r, s) = (r == s ? 1.0 : 0.0) - p(transient[r], transient[s]);
  }
  Eigen::FullPivLU<RMatrix> q_lu(q);
  RVector mu = RVector::Zero(n);
  for (std::size_t ci = 0; ci < classes.size(); ++ci) {
    double weight = static_cast<double>(classes[ci].size()) / n;
    if (t > 0) {
      RVector b(t);
      for (Eigen::Index r = 0; r < t; ++r) {
        double s = 0.0;
        for (int a : classes[ci]) s += p(transient[r], a);
        b(r) = s;
      }
      weight += q_lu.solve(b).sum() / n;
    }
    for (std::size_t j = 0; j < classes[ci].size(); ++j) mu(classes[ci][j]) += weight * stationary[ci](j);
  }
  for (Eigen::Index a = 0; a < n; ++a) mu(a) = std::max(0.0, mu(a));
  mu /= mu.sum();

  HutchinsonResult out{Measure(std::vector<double>(mu.data(), mu.data() + n)), static_cast<int>(classes.size()),
                       (p.transpose() * mu - mu).lpNorm<1>(), {}};
  if (out.dimension > 1) {
    out.warnings.push_back(std::to_string(out.dimension) +
                           " closed classes: the fixed measure is not unique; returned the ergodic average of the "
                           "uniform measure");
  }
  return out;
}

// ---------------------------------------------------------------- Wasserstein-1

ExtendedReal wasserstein1(const Measure& mu, const Measure& nu, const FiniteMetricSpace& x) {
  const int n = x.n_points();
  if (mu.size() != n || nu.size() != n) throw StructuralError("wasserstein1: measures and space differ in size");
  const std::vector<int> comp = x.components();
  const int ncomp = *std::max_element(comp.begin(), comp.end()) + 1;
  std::vector<double> balance(static_cast<std::size_t>(ncomp), 0.0);
  for (int a = 0; a < n; ++a) balance[comp[a]] += mu[a] - nu[a];
  for (double b : balance) {
    if (std::abs(b) > 1e-12) return ExtendedReal::inf();
  }

  // Nodes: source, the n points as suppliers, the n points as consumers, sink.
  const int source = 2 * n;
  const int sink = 2 * n + 1;
  MinCostFlow flow(2 * n + 2);
  double need = 0.0;
  for (int a = 0; a < n; ++a) {
    const double excess = mu[a] - nu[a];
    if (excess > 0.0) flow.add_edge(source, a, excess, 0.0);
    if (excess < 0.0) {
      flow.add_edge(n + a, sink, -excess, 0.0);
      need -= excess;
    }
  }
  for (int a = 0; a < n; ++a) {
    if (mu[a] - nu[a] <= 0.0) continue;
    for (int b = 0; b < n; ++b) {
      if (mu[b] - nu[b] < 0.0 && std::isfinite(x(a, b))) flow.add_edge(a, n + b, need + 1.0, x(a, b));
    }
  }
  const auto [sent, cost] = flow.run(source, sink);
  if (std::abs(sent - need) > 1e-9) throw NumericalError("wasserstein1: transport plan could not route all mass");
  return std::max(0.0, cost);
}

// ---------------------------------------------------------------- attractor

std::vector<int> attractor_points(const std::vector<PointMap>& maps, const FiniteMetricSpace& x, int m) {
  if (maps.empty()) throw DomainError("attractor_points needs at least one map");
  if (m < 1) throw DomainError("attractor_points needs M >= 1");
  for (std::size_t i = 0; i < maps.size(); ++i) {
    const ExtendedReal lip = lipschitz_constant(maps[i], x);
    if (!(lip < ExtendedReal(1.0))) {
      throw PreconditionError("map " + std::to_string(i) + " has Lipschitz constant " + lip.to_string() +
                              " >= 1: the attractor needs strict contractions");
    }
  }
  const int n = x.n_points();
  const int k = static_cast<int>(maps.size());
  std::vector<bool> fixed(static_cast<std::size_t>(n), false);
  for (int len = 1; len <= m; ++len) {
    for (const Word& w : enumerate_words(k, len, std::numeric_limits<std::uint64_t>::max())) {
      for (int a = 0; a < n; ++a) {
        int y = a;
        for (int l : w.letters) y = maps[l](y);
        if (y == a) fixed[a] = true;
      }
    }
  }
  std::vector<int> out;
  for (int a = 0; a < n; ++a) {
    if (fixed[a]) out.push_back(a);
  }
  return out;
}

// ---------------------------------------------------------------- lift

DiagonalLift diagonal_lift(const FiniteMetricSpace& x) {
  return DiagonalLift{Algebra::diagonal(x.n_points()), Seminorm::metric(x.d())};
}

StarHom lift_map(const PointMap& g) { return hom_from_point_map(g.g); }

State lift_measure(const Measure& mu) { return State::from_density(Element::diagonal(mu.masses())); }

}  // namespace ncfractal
