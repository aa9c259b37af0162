#include "doctest.h"
#include "ucpgh/random.hpp"
#include "ucpgh/truncation.hpp"

using namespace ucpgh;

namespace {

std::vector<Variant> small_variants() {
  return {Variant::fejer_riesz(4), Variant::toeplitz_circle(4), Variant::torus_spherical(2, 2),
          Variant::torus_polyhedral(LatticePolytope::cube(2), 1),
          Variant::torus_polyhedral(LatticePolytope::cross_polytope(2), 2)};
}

}  // namespace

TEST_CASE("compress examples") {
  const TruncationPair fr(Variant::fejer_riesz(2));
  const auto r = std::get<TrigPoly>(fr.compress(TrigPoly::monomial(1, {1, 0, 0})));
  CHECK(r.coeff({1, 0, 0}) == cplx(0.5));
  CHECK(r.size() == 1);

  const TruncationPair tc(Variant::toeplitz_circle(2));
  const auto t = std::get<ToeplitzOperator>(tc.compress(TrigPoly::monomial(1, {1, 0, 0})));
  CHECK(t.symbols().size() == 1);
  CHECK(t.symbol({1, 0, 0}) == cplx(1.0));

  for (const auto& v : small_variants()) {
    const TruncationPair p(v);
    const Operand u = p.compress(TrigPoly::constant(p.dim(), 1.0));
    if (const auto* op = std::get_if<ToeplitzOperator>(&u)) {
      CHECK(op->matrix().isIdentity(0.0));
    } else {
      CHECK(std::get<TrigPoly>(u).max_abs_coeff_diff(TrigPoly::constant(1, 1.0)) == 0.0);
    }
  }
  CHECK_THROWS_AS(tc.compress(TrigPoly(2)), std::invalid_argument);
}

TEST_CASE("symbolize examples") {
  const TruncationPair tc(Variant::toeplitz_circle(2));
  const auto s = tc.symbolize_fn(ToeplitzOperator(tc.index_set(), {{{1, 0, 0}, 1.0}}));
  CHECK(s.coeff({1, 0, 0}) == cplx(0.5));
  CHECK(s.size() == 1);

  const TruncationPair sq(Variant::torus_polyhedral(LatticePolytope::cube(2), 1));
  const auto q = sq.symbolize_fn(ToeplitzOperator(sq.index_set(), {{{1, 1, 0}, 1.0}}));
  CHECK(std::abs(q.coeff({1, 1, 0}) - 4.0 / 9.0) < 1e-15);

  for (const auto& v : small_variants()) {
    const TruncationPair p(v);
    const auto one = p.symbolize_fn(p.truncated_unit());
    CHECK(one.size() == 1);
    CHECK(one.coeff({0, 0, 0}) == cplx(1.0));
  }
  const TruncationPair other(Variant::toeplitz_circle(3));
  CHECK_THROWS_AS(tc.symbolize(ToeplitzOperator::identity(other.index_set())), std::invalid_argument);
  const TruncationPair fr(Variant::fejer_riesz(2));
  CHECK_THROWS_AS(fr.symbolize(TrigPoly::monomial(1, {2, 0, 0})), std::invalid_argument);
}

TEST_CASE("roundtrip kernels") {
  for (int n : {1, 3, 6}) {
    CHECK(TruncationPair(Variant::fejer_riesz(n)).roundtrip_kernel().poly().max_abs_coeff_diff(fejer_kernel(n).poly()) ==
          0.0);
    CHECK(TruncationPair(Variant::toeplitz_circle(n)).roundtrip_kernel().poly().max_abs_coeff_diff(
              fejer_kernel(n).poly()) < 1e-15);
  }
  const auto p = LatticePolytope::cross_polytope(2);
  CHECK(TruncationPair(Variant::torus_polyhedral(p, 3)).roundtrip_kernel().poly().max_abs_coeff_diff(
            polyhedral_fejer_kernel(p, 3).poly()) < 1e-15);
  CHECK_THROWS(TruncationPair(Variant::identity(3)).roundtrip_kernel());
}

TEST_CASE("roundtrip equals convolution with the roundtrip kernel") {
  Rng rng(31);
  for (const auto& v : small_variants()) {
    const TruncationPair p(v);
    const Kernel& k = p.roundtrip_kernel();
    for (int trial = 0; trial < 100; ++trial) {
      const TrigPoly f = random_self_adjoint_poly(rng, p.dim(), 1 + trial % 6);
      const TrigPoly rt = p.symbolize_fn(p.compress(f));
      CHECK(rt.max_abs_coeff_diff(convolve(k, f)) < 1e-12);
    }
  }
}

TEST_CASE("certified constants") {
  const auto c1 = TruncationPair(Variant::fejer_riesz(1)).certified_constants();
  CHECK(c1.first >= kPi / 2);
  CHECK(c1.first - kPi / 2 < 1e-9);
  CHECK(c1.second == c1.first);
  const double c4 = TruncationPair(Variant::toeplitz_circle(4)).certified_constants().first;
  const double c16 = TruncationPair(Variant::toeplitz_circle(16)).certified_constants().first;
  CHECK(c16 < c4);
  double prev = 1e9;
  for (int n : {1, 2, 4, 8}) {
    const double c = TruncationPair(Variant::torus_polyhedral(LatticePolytope::cube(2), n)).certified_constants().first;
    CHECK(std::isfinite(c));
    CHECK(c < prev);
    prev = c;
  }
  CHECK(TruncationPair(Variant::identity(3)).certified_constants().first == 0.0);
}

TEST_CASE("certified bound holds on samples") {
  Rng rng(32);
  for (const auto& v : small_variants()) {
    const TruncationPair p(v);
    const double c = p.certified_constants().first;
    for (int trial = 0; trial < 30; ++trial) {
      const TrigPoly f = random_self_adjoint_poly(rng, p.dim(), 1 + trial % 8, trial % 2 ? 1.0 : 2.0);
      const double err = sup_norm(p.symbolize_fn(p.compress(f)) - f).lower;
      CHECK(err <= c * lipschitz_seminorm_fn(f).upper + 1e-6);
    }
  }
}

TEST_CASE("empirical constant stays below the certified one") {
  const TruncationPair p(Variant::fejer_riesz(4));
  const double e = empirical_constant(p, 200, 5);
  CHECK(e > 0.0);
  CHECK(e <= p.certified_constants().first + 1e-6);
  CHECK(empirical_constant(p, 50, 5) <= e);
  CHECK(empirical_constant(TruncationPair(Variant::identity(3)), 10, 1) == 0.0);
  CHECK_THROWS_AS(empirical_constant(p, 0, 1), std::invalid_argument);
}

TEST_CASE("compress and symbolize are C1-contractive on samples") {
  Rng rng(33);
  for (const auto& v : small_variants()) {
    const TruncationPair p(v);
    for (int trial = 0; trial < 15; ++trial) {
      const TrigPoly f = random_self_adjoint_poly(rng, p.dim(), 1 + trial % 5);
      const Operand r = p.compress(f);
      CHECK(p.truncated_norm(r) <= sup_norm(f).upper + 1e-10);
      CHECK(p.truncated_lipschitz(r) <= lipschitz_seminorm_fn(f).upper + 1e-10);
      const TrigPoly s = p.symbolize_fn(r);
      CHECK(sup_norm(s).lower <= p.truncated_norm(r) + 1e-10);
      CHECK(lipschitz_seminorm_fn(s).lower <= p.truncated_lipschitz(r) + 1e-10);
    }
  }
}

TEST_CASE("ucp_check examples") {
  const TruncationPair fr(Variant::fejer_riesz(3));
  auto rep = ucp_check(fr, Direction::fwd, 2, 100, 7);
  CHECK(rep.ok());
  CHECK(std::abs(rep.identity_min_eigenvalue - 1.0) < 1e-12);
  rep = ucp_check(fr, Direction::bwd, 2, 100, 7);
  CHECK(rep.ok());

  const TruncationPair tc(Variant::toeplitz_circle(3));
  rep = ucp_check(tc, Direction::bwd, 2, 100, 8);
  CHECK(rep.ok());
  CHECK(rep.min_eigenvalue >= -1e-8);
  rep = ucp_check(tc, Direction::fwd, 3, 30, 8);
  CHECK(rep.ok());
  CHECK(std::abs(rep.identity_min_eigenvalue - 1.0) < 1e-12);

  const TruncationPair sq(Variant::torus_polyhedral(LatticePolytope::cube(2), 1));
  CHECK(ucp_check(sq, Direction::fwd, 2, 20, 9).ok());
  CHECK(ucp_check(sq, Direction::bwd, 2, 20, 9).ok());

  CHECK_THROWS_AS(ucp_check(tc, Direction::fwd, 4, 1, 1), std::invalid_argument);
  CHECK_THROWS_AS(ucp_check(TruncationPair(Variant::toeplitz_circle(17)), Direction::fwd, 1, 1, 1),
                  std::invalid_argument);
}
