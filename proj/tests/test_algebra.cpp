#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "ncfractal/errors.hpp"
#include "support.hpp"

using namespace testing;

TEST_CASE("trace of basic elements") {
  CHECK(trace(id2()).real() == doctest::Approx(2.0));
  CHECK(std::abs(trace(Algebra({2}).zero())) == 0.0);
  CHECK(trace(m2(0.3, 0, 0, 0.7)).real() == doctest::Approx(1.0));
}

TEST_CASE("real dimension and coordinates") {
  const Algebra a({2, 1});
  CHECK(a.real_dim() == 5);
  CHECK(a.total_dim() == 3);
  const RVector u = a.coords(a.unit());
  CHECK(u.size() == 5);
  RVector expect(5);
  expect << 1, 1, 0, 0, 1;
  CHECK((u - expect).norm() < 1e-15);

  // Orthonormal for Re trace(xy), and coords round-trip.
  for (int i = 0; i < a.real_dim(); ++i) {
    for (int j = 0; j < a.real_dim(); ++j) {
      const double ip = trace(a.basis_element(i) * a.basis_element(j)).real();
      CHECK(ip == doctest::Approx(i == j ? 1.0 : 0.0));
    }
  }
  Rng rng(4);
  const Element x = random_self_adjoint(a, rng);
  CHECK(close(a.from_coords(a.coords(x)), x, 1e-12));
}

TEST_CASE("spectral_decompose examples") {
  auto s = spectral_decompose(id2());
  REQUIRE(s.size() == 1);
  CHECK(s[0].eigenvalue == doctest::Approx(1.0));
  CHECK(close(s[0].projection.element(), id2(), 1e-12));

  s = spectral_decompose(m2(2, 0, 0, -1));
  REQUIRE(s.size() == 2);
  CHECK(s[0].eigenvalue == doctest::Approx(-1.0));
  CHECK(close(s[0].projection.element(), m2(0, 0, 0, 1), 1e-12));
  CHECK(s[1].eigenvalue == doctest::Approx(2.0));
  CHECK(close(s[1].projection.element(), m2(1, 0, 0, 0), 1e-12));

  // Hand eigensolve of sigma_x: projections onto (1, +-1)/sqrt2.
  s = spectral_decompose(sigma_x());
  REQUIRE(s.size() == 2);
  CHECK(s[0].eigenvalue == doctest::Approx(-1.0));
  CHECK(close(s[0].projection.element(), m2(0.5, -0.5, -0.5, 0.5), 1e-12));
  CHECK(close(s[1].projection.element(), m2(0.5, 0.5, 0.5, 0.5), 1e-12));

  CHECK_THROWS_AS(spectral_decompose(m2(0, 1, 0, 0)), DomainError);
}

TEST_CASE("spectral_decompose reconstructs its input") {
  Rng rng(17);
  for (const auto& dims : {std::vector<int>{2}, std::vector<int>{2, 1}, std::vector<int>{3, 2}, std::vector<int>{1, 1, 1}}) {
    const Algebra a(dims);
    for (int t = 0; t < 20; ++t) {
      const Element x = random_self_adjoint(a, rng);
      const auto parts = spectral_decompose(x);
      Element sum = a.zero();
      Element units = a.zero();
      for (const auto& c : parts) {
        sum += c.eigenvalue * c.projection.element();
        units += c.projection.element();
      }
      CHECK(close(sum, x, 1e-9));
      CHECK(close(units, a.unit(), 1e-9));
      for (std::size_t i = 0; i < parts.size(); ++i)
        for (std::size_t j = i + 1; j < parts.size(); ++j)
          CHECK((parts[i].projection.element() * parts[j].projection.element()).max_abs() < 1e-9);
    }
  }
}

TEST_CASE("range_projection examples") {
  CHECK(close(range_projection(m2(0.5, 0, 0, 0)).element(), m2(1, 0, 0, 0), 1e-12));
  CHECK(range_projection(Algebra({2}).zero()).rank() == 0);
  const Element plus = 0.5 * (id2() + sigma_x());
  CHECK(close(range_projection(plus).element(), plus, 1e-12));
  CHECK_THROWS_AS(range_projection(m2(1, 0, 0, -1)), DomainError);
}

TEST_CASE("meet and join examples") {
  const auto p = Projection::from_element(m2(1, 0, 0, 0));
  const auto q = Projection::from_element(m2(0, 0, 0, 1));
  CHECK(meet(p, q).rank() == 0);
  CHECK(close(join(p, q).element(), id2(), 1e-12));
  CHECK(close(meet(p, p).element(), p.element(), 1e-12));

  // Ranges of diag(1,0) and (I+sigma_x)/2 span C^2 and meet trivially.
  const auto plus = Projection::from_element(0.5 * (id2() + sigma_x()));
  CMatrix stacked(2, 2);
  stacked << 1, 1, 0, 1;
  CHECK(Eigen::FullPivLU<CMatrix>(stacked).rank() == 2);
  CHECK(meet(p, plus).rank() == 0);
  CHECK(close(join(p, plus).element(), id2(), 1e-9));

  const Trace tau = Trace::counting(Algebra({2}));
  CHECK(trace_eval(tau, join(p, plus).element()) + trace_eval(tau, meet(p, plus).element()) ==
        doctest::Approx(trace_eval(tau, p.element()) + trace_eval(tau, plus.element())));
}

TEST_CASE("lattice laws on random projections") {
  Rng rng(23);
  for (const auto& dims : {std::vector<int>{3}, std::vector<int>{2, 1}, std::vector<int>{4, 2}}) {
    const Algebra a(dims);
    for (int t = 0; t < 25; ++t) {
      const auto p = random_projection(a, rng);
      const auto q = random_projection(a, rng);
      const auto r = random_projection(a, rng);
      CHECK(close(meet(p, q).element(), meet(q, p).element(), 1e-8));
      CHECK(close(join(p, q).element(), join(q, p).element(), 1e-8));
      CHECK(close(meet(meet(p, q), r).element(), meet(p, meet(q, r)).element(), 1e-8));
      CHECK(close(join(join(p, q), r).element(), join(p, join(q, r)).element(), 1e-8));
      CHECK(close(join(p, p).element(), p.element(), 1e-8));
      CHECK(close(meet(p, join(p, q)).element(), p.element(), 1e-8));
      CHECK(close(join(p, meet(p, q)).element(), p.element(), 1e-8));
      CHECK(is_subprojection(meet(p, q), p));
      CHECK(is_subprojection(p, join(p, q)));
    }
  }
}

TEST_CASE("meet agrees with powers of pqp") {
  Rng rng(31);
  const Algebra a({3, 2});
  for (int t = 0; t < 30; ++t) {
    const auto p = random_projection(a, rng);
    // Force a nontrivial intersection half the time.
    const auto q = t % 2 == 0 ? join(meet(p, random_projection(a, rng)), random_projection(a, rng))
                              : random_projection(a, rng);
    CHECK(close(meet(p, q).element(), meet_by_powers(p.element(), q.element()), 1e-8));
  }
  // A hand-made pair in M3 sharing exactly e_1.
  CMatrix v1(3, 2), v2(3, 2);
  v1 << 1, 0, 0, 1, 0, 0;
  v2 << 1, 0, 0, 1, 0, 1;
  const auto p = Projection::from_element(Element({span_projector(v1)}));
  const auto q = Projection::from_element(Element({span_projector(v2)}));
  CHECK(meet(p, q).rank() == 1);
  const std::vector<double> e1{1, 0, 0};
  CHECK(close(meet(p, q).element(), Element::diagonal(Algebra({3}), e1), 1e-9));
}

TEST_CASE("Kaplansky identity for traces") {
  Rng rng(37);
  const Algebra a({2, 3});
  const Trace tau({1.5, 0.25});
  for (int t = 0; t < 40; ++t) {
    const auto p = random_projection(a, rng);
    const auto q = random_projection(a, rng);
    const double lhs = trace_eval(tau, join(p, q).element()) + trace_eval(tau, meet(p, q).element());
    const double rhs = trace_eval(tau, p.element()) + trace_eval(tau, q.element());
    CHECK(std::abs(lhs - rhs) <= 1e-8);
  }
}

TEST_CASE("state_eval examples") {
  Rng rng(41);
  const Algebra a({2, 1});
  for (int t = 0; t < 5; ++t) {
    const State s = random_state(a, rng);
    CHECK(state_eval(s, a.unit()).real() == doctest::Approx(1.0));
    const Element b = random_self_adjoint(a, rng);
    CHECK(std::abs(state_eval(s, b).imag()) < 1e-12);
    CHECK(std::abs(state_eval(s, b)) <= b.op_norm() + 1e-12);
  }
  const State s = State::from_density(m2(1, 0, 0, 0));
  CHECK(state_eval(s, m2(3, 0, 0, 5)).real() == doctest::Approx(3.0));
  const State plus = State::from_density(0.5 * (id2() + sigma_x()));
  CHECK(state_eval(plus, sigma_x()).real() == doctest::Approx(1.0));
}

TEST_CASE("state validation and repair") {
  CHECK_THROWS_AS(State::from_density(m2(0.5, 0, 0, 0.4)), DomainError);
  CHECK_THROWS_AS(State::from_density(m2(1.1, 0, 0, -0.1)), DomainError);
  const State s = State::from_density(m2(1.0 + 1e-9, 0, 0, -1e-9));
  CHECK(min_eigenvalue(s.density()) >= -1e-10);
  CHECK(trace(s.density()).real() == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("state_support examples") {
  CHECK(close(state_support(State::from_density(m2(1, 0, 0, 0))).element(), m2(1, 0, 0, 0), 1e-12));
  CHECK(close(state_support(State::maximally_mixed(Algebra({3}))).element(), Algebra({3}).unit(), 1e-12));
  CHECK(close(state_support(State::from_density(diag({0.5, 0.5, 0}))).element(), diag({1, 1, 0}), 1e-12));
}

TEST_CASE("support is the smallest spectral projection of full mass") {
  Rng rng(43);
  const Algebra a({3, 1});
  for (int t = 0; t < 20; ++t) {
    const State s = random_state(a, rng, t % 2 == 0);
    const auto supp = state_support(s);
    CHECK(state_eval(s, supp.element()).real() >= 1.0 - a.total_dim() * kEigenTol);
    // Every projection built from eigenvectors of rho that carries all the mass
    // contains the support.
    const auto parts = spectral_decompose(s.density());
    const int k = static_cast<int>(parts.size());
    for (int mask = 0; mask < (1 << k); ++mask) {
      Element q = a.zero();
      for (int i = 0; i < k; ++i)
        if (mask & (1 << i)) q += parts[i].projection.element();
      if (std::abs(state_eval(s, q).real() - 1.0) < 1e-9) {
        CHECK(is_subprojection(supp, Projection::from_element(q)));
      }
    }
  }
}

TEST_CASE("trace_eval") {
  CHECK(trace_eval(Trace::counting(Algebra::diagonal(4)), Algebra::diagonal(4).unit()) == doctest::Approx(4.0));
  CHECK(trace_eval(Trace({2, 1}), Algebra({2, 1}).unit()) == doctest::Approx(5.0));
  CHECK_THROWS(Trace({0, 0}));
  CHECK_THROWS_AS(trace_eval(Trace({1}), m2(0, 1, 0, 0)), DomainError);

  Rng rng(47);
  const Algebra a({3, 2});
  const Trace tau({0.7, 2.0});
  for (int t = 0; t < 10; ++t) {
    const Element x = random_self_adjoint(a, rng);
    const Element u = random_unitary(a, rng);
    CHECK(trace_eval(tau, u * x * u.adjoint()) == doctest::Approx(trace_eval(tau, x)).epsilon(1e-10));
  }
}

TEST_CASE("projection repair") {
  const Element near = m2(1.0 + 1e-6, 0, 0, 1e-6);
  CHECK(close(Projection::repaired(near).element(), m2(1, 0, 0, 0), 1e-12));
  CHECK_THROWS_AS(Projection::repaired(m2(0.5, 0, 0, 1)), DomainError);
  CHECK_THROWS_AS(Projection::from_element(m2(0.5, 0, 0, 1)), DomainError);
}

TEST_CASE("shape errors") {
  CHECK_THROWS_AS(Algebra({}), DomainError);
  CHECK_THROWS_AS(Algebra({2, 0}), DomainError);
  CHECK_THROWS_AS(id2() + Algebra::diagonal(2).unit(), StructuralError);
  CHECK_THROWS_AS(trace_eval(Trace({1, 1}), id2()), StructuralError);
}
