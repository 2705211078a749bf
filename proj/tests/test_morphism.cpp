#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "ncfractal/classical.hpp"
#include "ncfractal/errors.hpp"
#include "ncfractal/morphism.hpp"
#include "support.hpp"

using namespace testing;

namespace {

const Algebra kM2C({2, 1});

StarHom collapse() { return hom_from_pattern(kM2C, {{{1, 2}}, {{1, 1}}}); }

Element diag_u(Complex a, Complex b) { return m2(a, 0, 0, b); }

std::vector<double> bits(int mask, int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = (mask >> i) & 1;
  return v;
}

}  // namespace

TEST_CASE("hom_from_unitary examples") {
  Rng rng(1);
  const Element b = random_self_adjoint(Algebra({2}), rng);
  CHECK(close(hom_from_unitary(id2())(b), b, 1e-12));
  CHECK(close(hom_from_unitary(sigma_x())(m2(2, 0, 0, 7)), m2(7, 0, 0, 2), 1e-12));
  // diag(1, i) sigma_x diag(1, -i) = [[0, -i], [i, 0]] = sigma_y.
  CHECK(close(hom_from_unitary(diag_u(1, 1i))(sigma_x()), sigma_y(), 1e-12));
  CHECK(hom_from_unitary(diag_u(1, 1i)).kind() == HomKind::unitary);
  CHECK_THROWS_AS(hom_from_unitary(m2(1, 1, 0, 1)), DomainError);
}

TEST_CASE("hom_from_point_map examples") {
  Rng rng(2);
  const Element b = random_self_adjoint(Algebra::diagonal(4), rng);
  const std::vector<int> id{0, 1, 2, 3};
  CHECK(close(hom_from_point_map(id)(b), b, 1e-12));

  const std::vector<int> constant{2, 2, 2, 2};
  const double b2 = b.block(2)(0, 0).real();
  CHECK(close(hom_from_point_map(constant)(b), b2 * Algebra::diagonal(4).unit(), 1e-12));

  // Depth-2 shift space, points 00, 01, 10, 11: prepend-0 sends ab to 0a.
  const StarHom f = lift_map(shift_map(2, 0));
  const Element fb = f(b);
  for (int a = 0; a < 2; ++a)
    for (int c = 0; c < 2; ++c) CHECK(fb.block(2 * a + c)(0, 0) == b.block(a)(0, 0));

  const std::vector<int> out_of_range{0, 4};
  CHECK_THROWS_AS(hom_from_point_map(out_of_range), DomainError);
}

TEST_CASE("hom_from_pattern examples") {
  Rng rng(3);
  const Element x = random_self_adjoint(kM2C, rng);
  const Complex lambda = x.block(1)(0, 0);
  CHECK(close(collapse()(x), direct_sum(lambda * id2(), scalar_block(lambda)), 1e-12));
  CHECK(close(hom_from_pattern(kM2C, {{{0, 1}}, {{1, 1}}})(x), x, 1e-12));

  const Algebra m2m2({2, 2});
  const StarHom dup = hom_from_pattern(m2m2, {{{0, 1}}, {{0, 1}}});
  const Element y = random_self_adjoint(m2m2, rng);
  CHECK(close(dup(y), Element({y.block(0), y.block(0)}), 1e-12));
  CHECK(close(dup(m2m2.unit()), m2m2.unit(), 1e-12));

  // Two copies of C inside M2 (+) C with an M2 twist.
  const Element u = direct_sum(0.5 * std::sqrt(2.0) * m2(1, 1, 1, -1), scalar_block(1));
  const StarHom twisted = hom_from_pattern(kM2C, {{{1, 1}, {1, 1}}, {{1, 1}}}, u);
  CHECK(validate_hom(twisted).pass);

  CHECK_THROWS_AS(hom_from_pattern(kM2C, {{{1, 1}}, {{1, 1}}}), DomainError);
  CHECK_THROWS_AS(hom_from_pattern(kM2C, {{{0, 1}}}), DomainError);
}

TEST_CASE("validate_hom examples") {
  Rng rng(4);
  for (const auto& f : {hom_from_unitary(random_unitary(kM2C, rng)), collapse(), StarHom::identity(kM2C),
                        lift_map(shift_map(3, 1))}) {
    const HomReport r = validate_hom(f, 1e-9);
    CHECK(r.pass);
  }

  // b -> p b p is not unital: f(I) = p.
  const Element p = m2(1, 0, 0, 0);
  const StarHom cut = StarHom::from_map(Algebra({2}), [&](const Element& b) { return p * b * p; });
  const HomReport rc = validate_hom(cut);
  CHECK_FALSE(rc.pass);
  CHECK(rc.unitality == doctest::Approx(1.0));

  // Transpose: T(sigma_x sigma_y) = T(i sigma_z) = i sigma_z, but T(sigma_x) T(sigma_y) = -i sigma_z.
  const StarHom transpose = StarHom::from_map(Algebra({2}), [](const Element& b) {
    return Element({CMatrix(b.block(0).transpose())});
  });
  const Element lhs = transpose(sigma_x() * sigma_y());
  const Element rhs = transpose(sigma_x()) * transpose(sigma_y());
  CHECK(max_abs_diff(lhs, rhs) == doctest::Approx(2.0));
  const HomReport rt = validate_hom(transpose);
  CHECK_FALSE(rt.pass);
  CHECK(rt.multiplicativity > 0.5);
  CHECK(rt.unitality < 1e-12);
}

TEST_CASE("word_hom composes left to right") {
  Rng rng(5);
  const Element u = random_unitary(Algebra({2}), rng);
  const DualIFS ifs({hom_from_unitary(u), hom_from_unitary(sigma_x())});
  const Element b = random_self_adjoint(Algebra({2}), rng);
  CHECK(close(word_hom(ifs, Word{{0}, 2})(b), ifs[0](b), 1e-12));
  CHECK(close(word_hom(ifs, Word{{0, 0}, 2})(b), hom_from_unitary(u * u)(b), 1e-12));
  CHECK(close(word_hom(ifs, Word{{}, 2})(b), b, 1e-12));
  CHECK(close(word_hom(ifs, Word{{0, 1}, 2})(b), ifs[0](ifs[1](b)), 1e-12));

  // Shift space: f_(0,1) = f_0 o f_1 sends every point ab to g_1(g_0(ab)) = 10.
  const DualIFS shift({lift_map(shift_map(2, 0)), lift_map(shift_map(2, 1))});
  const Element c = diag({1, 2, 3, 4});
  CHECK(close(word_hom(shift, Word{{0, 1}, 2})(c), 3.0 * Algebra::diagonal(4).unit(), 1e-12));
  CHECK(close(word_hom(shift, Word{{1, 0}, 2})(c), 2.0 * Algebra::diagonal(4).unit(), 1e-12));

  CHECK_THROWS(word_hom(shift, Word{{2}, 2}));
}

TEST_CASE("composition is associative") {
  Rng rng(6);
  const StarHom f = hom_from_unitary(random_unitary(kM2C, rng));
  const StarHom g = collapse();
  const StarHom h = hom_from_pattern(kM2C, {{{0, 1}}, {{1, 1}}}, random_unitary(kM2C, rng));
  CHECK((f.compose(g).compose(h).matrix() - f.compose(g.compose(h)).matrix()).norm() < 1e-12);
  CHECK(f.compose(g).kind() == HomKind::composite);
}

TEST_CASE("dual_apply examples") {
  Rng rng(7);
  const State rho = random_state(kM2C, rng);
  CHECK(close(dual_apply(StarHom::identity(kM2C), rho).density(), rho.density(), 1e-12));
  const Element u = random_unitary(kM2C, rng);
  CHECK(close(dual_apply(hom_from_unitary(u), rho).density(), u.adjoint() * rho.density() * u, 1e-12));
  CHECK(close(dual_apply(collapse(), rho).density(), direct_sum(m2(0, 0, 0, 0), scalar_block(1)), 1e-12));
}

TEST_CASE("duality of the trace adjoint") {
  Rng rng(8);
  const Algebra a({3, 1});
  std::vector<StarHom> fs{hom_from_unitary(random_unitary(a, rng)), hom_from_pattern(a, {{{1, 3}}, {{1, 1}}}),
                          hom_from_pattern(a, {{{1, 2}, {1, 1}}, {{1, 1}}}, random_unitary(a, rng))};
  for (const auto& f : fs) {
    for (int t = 0; t < 10; ++t) {
      const State rho = random_state(a, rng);
      const Element b = random_self_adjoint(a, rng);
      CHECK(std::abs(state_eval(dual_apply(f, rho), b) - state_eval(rho, f(b))) <= 1e-10);
    }
  }
}

TEST_CASE("upper_preimage examples") {
  Rng rng(9);
  const Projection p = random_projection(kM2C, rng);
  CHECK(close(upper_preimage(StarHom::identity(kM2C), p).element(), p.element(), 1e-9));

  const Element u = random_unitary(kM2C, rng);
  CHECK(close(upper_preimage(hom_from_unitary(u), p).element(), u.adjoint() * p.element() * u, 1e-9));

  const StarHom f = lift_map(shift_map(2, 0));
  const Projection full = Projection::unit(Algebra::diagonal(4));
  CHECK(close(upper_preimage(f, full).element(), diag({1, 1, 0, 0}), 1e-12));
  // Exhaustive search over the 16 diagonal projections for the same example.
  int best = -1;
  for (int mask = 0; mask < 16; ++mask) {
    const Element q = diag(bits(mask, 4));
    if (min_eigenvalue(f(q) - full.element()) < -1e-9) continue;
    if (best < 0 || __builtin_popcount(static_cast<unsigned>(mask)) < __builtin_popcount(static_cast<unsigned>(best)))
      best = mask;
  }
  CHECK(close(diag(bits(best, 4)), diag({1, 1, 0, 0}), 0.0));
}

TEST_CASE("upper_preimage agrees with exhaustive search on small diagonal algebras") {
  Rng rng(10);
  for (int n = 1; n <= 5; ++n) {
    std::uniform_int_distribution<int> pick(0, n - 1);
    for (int t = 0; t < 20; ++t) {
      std::vector<int> g(static_cast<std::size_t>(n));
      for (auto& x : g) x = pick(rng);
      const StarHom f = hom_from_point_map(g);
      const int pm = std::uniform_int_distribution<int>(0, (1 << n) - 1)(rng);
      const Element p = diag(bits(pm, n));
      // Meet of all q with f(q) >= p.
      int meet_mask = (1 << n) - 1;
      for (int mask = 0; mask < (1 << n); ++mask) {
        if (min_eigenvalue(f(diag(bits(mask, n))) - p) >= -1e-12) meet_mask &= mask;
      }
      const Projection up = upper_preimage(f, Projection::from_element(p));
      CHECK(max_abs_diff(up.element(), diag(bits(meet_mask, n))) == 0.0);
      CHECK(min_eigenvalue(f(up.element()) - p) >= -1e-12);
    }
  }
}

TEST_CASE("meet preservation, Galois laws and monotonicity") {
  Rng rng(11);
  const Algebra a({3, 2, 1});
  std::vector<StarHom> fs{hom_from_unitary(random_unitary(a, rng)),
                          hom_from_pattern(a, {{{2, 3}}, {{2, 2}}, {{2, 1}}}),
                          hom_from_pattern(a, {{{1, 1}, {2, 1}}, {{1, 1}}, {{2, 1}}}, random_unitary(a, rng)),
                          hom_from_pattern(a, {{{0, 1}}, {{2, 2}}, {{2, 1}}})};
  for (const auto& f : fs) {
    REQUIRE(validate_hom(f).pass);
    for (int t = 0; t < 15; ++t) {
      const Projection p = random_projection(a, rng);
      const Projection q = random_projection(a, rng);
      CHECK(close(f(meet(p, q)).element(), meet(f(p), f(q)).element(), 1e-8));

      const Projection up = upper_preimage(f, p);
      CHECK(min_eigenvalue(f(up).element() - p.element()) >= -1e-8);
      CHECK(is_subprojection(upper_preimage(f, f(q)), q, 1e-8));

      const Projection bigger = join(p, q);
      CHECK(is_subprojection(up, upper_preimage(f, bigger), 1e-8));
    }
  }
}

TEST_CASE("DualIFS and Weights validation") {
  CHECK_THROWS_AS(DualIFS({StarHom::identity(kM2C), StarHom::identity(Algebra({2}))}), StructuralError);
  CHECK_THROWS(DualIFS({}));
  CHECK_THROWS_AS(Weights({0.5, 0.4}), DomainError);
  CHECK_THROWS_AS(Weights({1.5, -0.5}), DomainError);
  CHECK(Weights({1.0, 0.0}).strict() == false);
  CHECK(Weights::uniform(4)[2] == doctest::Approx(0.25));
  CHECK(Word{{0, 1, 1}, 2}.to_string() == "011");
}
