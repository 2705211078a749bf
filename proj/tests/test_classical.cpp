#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <set>

#include "ncfractal/classical.hpp"
#include "ncfractal/dynamics.hpp"
#include "ncfractal/errors.hpp"
#include "support.hpp"

using namespace testing;

namespace {

const double kInf = kInfDistance;

std::vector<PointMap> shift_maps(int depth) { return {shift_map(depth, 0), shift_map(depth, 1)}; }

DualIFS lift_all(const std::vector<PointMap>& maps) {
  std::vector<StarHom> homs;
  for (const auto& g : maps) homs.push_back(lift_map(g));
  return DualIFS(homs);
}

std::vector<double> lifted_masses(const State& s) {
  std::vector<double> out;
  for (const auto& z : s.density().diagonal_entries()) out.push_back(z.real());
  return out;
}

double max_gap(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// Random contractive maps: a map is kept when its Lipschitz constant is < 1.
std::vector<PointMap> random_contractions(const FiniteMetricSpace& x, int k, Rng& rng) {
  std::uniform_int_distribution<int> pick(0, x.n_points() - 1);
  std::vector<PointMap> out;
  while (static_cast<int>(out.size()) < k) {
    std::vector<int> g(static_cast<std::size_t>(x.n_points()));
    for (auto& v : g) v = pick(rng);
    PointMap m = make_point_map(g, x.n_points());
    if (lipschitz_constant(m, x).value() < 1.0) out.push_back(m);
  }
  return out;
}

}  // namespace

TEST_CASE("FiniteMetricSpace validation and factories") {
  const auto s = FiniteMetricSpace::shift_space(2);
  CHECK(s(0, 1) == 0.5);
  CHECK(s(0, 2) == 1.0);
  CHECK(s(3, 3) == 0.0);
  CHECK(FiniteMetricSpace::discrete(3)(0, 2) == 1.0);
  RMatrix bad(2, 2);
  bad << 0, 0, 0, 0;
  CHECK_THROWS_AS(FiniteMetricSpace{bad}, DomainError);
  RMatrix split(3, 3);
  split << 0, 1, kInf, 1, 0, kInf, kInf, kInf, 0;
  const FiniteMetricSpace x(split);
  const auto comp = x.components();
  CHECK(comp[0] == comp[1]);
  CHECK(comp[0] != comp[2]);
  CHECK_THROWS_AS(make_point_map({0, 3}, 2), DomainError);
  CHECK_THROWS_AS(Measure({0.5, 0.6}), DomainError);
}

TEST_CASE("lipschitz_constant examples") {
  const auto s = FiniteMetricSpace::shift_space(2);
  CHECK(lipschitz_constant(make_point_map({0, 1, 2, 3}, 4), s).value() == 1.0);
  CHECK(lipschitz_constant(make_point_map({2, 2, 2, 2}, 4), s).value() == 0.0);
  CHECK(lipschitz_constant(shift_map(2, 0), s).value() == 0.5);

  RMatrix split(3, 3);
  split << 0, 1, kInf, 1, 0, kInf, kInf, kInf, 0;
  const FiniteMetricSpace x(split);
  // Pair (0, 1) lands in different components.
  CHECK(lipschitz_constant(make_point_map({0, 2, 2}, 3), x).is_inf());
  // The pair (0, 2) is infinitely far and only contributes 0.
  CHECK(lipschitz_constant(make_point_map({0, 0, 0}, 3), x).value() == 0.0);
}

TEST_CASE("hutchinson_measure examples") {
  const auto s = FiniteMetricSpace::shift_space(2);
  auto h = hutchinson_measure({make_point_map({1, 1, 1, 1}, 4)}, Weights({1.0}), s);
  CHECK(max_gap(h.measure.masses(), {0, 1, 0, 0}) <= 1e-12);

  h = hutchinson_measure(shift_maps(2), Weights::uniform(2), s);
  CHECK(max_gap(h.measure.masses(), {0.25, 0.25, 0.25, 0.25}) <= 1e-12);
  CHECK(h.dimension == 1);

  for (double p : {0.3, 0.8}) {
    h = hutchinson_measure(shift_maps(2), Weights({p, 1 - p}), s);
    CHECK(max_gap(h.measure.masses(), {p * p, p * (1 - p), (1 - p) * p, (1 - p) * (1 - p)}) <= 1e-12);
    CHECK(h.residual <= 1e-10);
  }

  // Identity: every measure is fixed.
  h = hutchinson_measure({make_point_map({0, 1, 2, 3}, 4)}, Weights({1.0}), s);
  CHECK(h.dimension == 4);
}

TEST_CASE("wasserstein1 examples") {
  const auto s = FiniteMetricSpace::shift_space(3);
  Rng rng(1);
  const Measure mu(random_probabilities(8, rng));
  CHECK(wasserstein1(mu, mu, s).value() <= 1e-12);
  CHECK(wasserstein1(Measure::dirac(8, 1), Measure::dirac(8, 6), s).value() == doctest::Approx(s(1, 6)));
  RMatrix d(2, 2);
  d << 0, 1, 1, 0;
  CHECK(wasserstein1(Measure({1, 0}), Measure({0.5, 0.5}), FiniteMetricSpace(d)).value() == doctest::Approx(0.5));

  RMatrix split(3, 3);
  split << 0, 1, kInf, 1, 0, kInf, kInf, kInf, 0;
  const FiniteMetricSpace x(split);
  CHECK(wasserstein1(Measure({0.5, 0.5, 0}), Measure({0, 0.5, 0.5}), x).is_inf());
  CHECK(wasserstein1(Measure({0.5, 0.3, 0.2}), Measure({0.1, 0.7, 0.2}), x).value() == doctest::Approx(0.4));
}

TEST_CASE("Kantorovich duality on small spaces") {
  Rng rng(2);
  for (int n = 2; n <= 6; ++n) {
    for (int t = 0; t < 8; ++t) {
      const auto x = t % 2 ? FiniteMetricSpace::random(n, rng) : FiniteMetricSpace::discrete(n);
      const auto p = random_probabilities(n, rng);
      const auto q = random_probabilities(n, rng);
      RVector c(n);
      for (int i = 0; i < n; ++i) c(i) = p[i] - q[i];
      CHECK(std::abs(wasserstein1(Measure(p), Measure(q), x).value() - lipschitz_vertex_max(x.d(), c)) <= 1e-9);
    }
  }
}

TEST_CASE("attractor_points examples") {
  const auto s = FiniteMetricSpace::shift_space(2);
  CHECK(attractor_points({make_point_map({2, 2, 2, 2}, 4)}, s, 3) == std::vector<int>{2});
  CHECK(attractor_points(shift_maps(2), s, 2) == std::vector<int>{0, 1, 2, 3});
  CHECK(attractor_points(shift_maps(2), s, 1) == std::vector<int>{0, 3});
  CHECK_THROWS_AS(attractor_points({make_point_map({1, 0, 2, 3}, 4)}, s, 2), PreconditionError);
}

TEST_CASE("attractor is monotone, self-similar and carries the Hutchinson measure") {
  Rng rng(3);
  for (int t = 0; t < 15; ++t) {
    const auto x = t < 2 ? FiniteMetricSpace::shift_space(t + 2) : FiniteMetricSpace::random(5 + t % 3, rng);
    const auto maps = t < 2 ? shift_maps(t + 2) : random_contractions(x, 2 + t % 2, rng);
    std::vector<int> prev;
    std::vector<int> k;
    for (int m = 1; m <= 6; ++m) {
      k = attractor_points(maps, x, m);
      CHECK(std::includes(k.begin(), k.end(), prev.begin(), prev.end()));
      prev = k;
    }
    // K = union of g_i(K).
    std::set<int> image;
    for (const auto& g : maps)
      for (int p : k) image.insert(g(p));
    CHECK(std::vector<int>(image.begin(), image.end()) == k);

    const auto pi = random_probabilities(static_cast<int>(maps.size()), rng, 0.1);
    const auto h = hutchinson_measure(maps, Weights(pi), x);
    CHECK(h.measure.support(1e-12) == k);
  }
}

TEST_CASE("diagonal lift reproduces the classical pipeline") {
  const auto one = diagonal_lift(FiniteMetricSpace::discrete(1));
  CHECK(one.algebra.real_dim() == 1);
  CHECK(close(lift_measure(Measure({1.0})).density(), one.algebra.unit(), 0.0));
  CHECK(close(state_support(lift_measure(Measure::dirac(4, 2))).element(), diag({0, 0, 1, 0}), 0.0));

  Rng rng(4);
  for (int t = 0; t < 12; ++t) {
    const auto x = t < 4 ? FiniteMetricSpace::shift_space(2 + t % 2) : FiniteMetricSpace::random(5, rng);
    const auto maps = t < 4 ? shift_maps(2 + t % 2) : random_contractions(x, 3, rng);
    const auto pi = t == 0 ? std::vector<double>{0.5, 0.5} : random_probabilities(static_cast<int>(maps.size()), rng, 0.1);
    const auto h = hutchinson_measure(maps, Weights(pi), x);
    const auto fs = fixed_state_eigen(lift_all(maps), Weights(pi));
    CHECK(max_gap(lifted_masses(fs.representative), h.measure.masses()) <= 1e-12);
    CHECK(fs.dimension == h.dimension);
    const auto supp = state_support(fs.representative);
    std::vector<int> lifted_support;
    for (int i = 0; i < x.n_points(); ++i)
      if (supp.element().block(i)(0, 0).real() > 0.5) lifted_support.push_back(i);
    CHECK(lifted_support == attractor_points(maps, x, 8));
  }
}

TEST_CASE("multiple fixed measures match the lifted fixed set") {
  // Identity plus a swap of {0,1} and {2,3}: fixed measures are spanned by the two orbits.
  const auto x = FiniteMetricSpace::discrete(4);
  const std::vector<PointMap> maps{make_point_map({0, 1, 2, 3}, 4), make_point_map({1, 0, 3, 2}, 4)};
  const auto h = hutchinson_measure(maps, Weights({0.5, 0.5}), x);
  const auto fs = fixed_state_eigen(lift_all(maps), Weights({0.5, 0.5}));
  CHECK(h.dimension == 2);
  CHECK(fs.dimension == 2);
  CHECK(max_gap(lifted_masses(fs.representative), h.measure.masses()) <= 1e-12);
}

TEST_CASE("spectral distance on lifts equals Wasserstein-1") {
  Rng rng(5);
  for (const auto& x : {FiniteMetricSpace::shift_space(2), FiniteMetricSpace::shift_space(3),
                        FiniteMetricSpace::random(5, rng)}) {
    const auto lift = diagonal_lift(x);
    for (int t = 0; t < 20; ++t) {
      const Measure mu(random_probabilities(x.n_points(), rng));
      const Measure nu(t % 4 == 0 ? Measure::dirac(x.n_points(), t % x.n_points()).masses()
                                  : random_probabilities(x.n_points(), rng));
      const double w = wasserstein1(mu, nu, x).value();
      CHECK(std::abs(spectral_distance(lift.seminorm, lift_measure(mu), lift_measure(nu)).value() - w) <= 1e-9);
    }
  }
}
