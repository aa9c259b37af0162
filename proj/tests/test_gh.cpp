#include "doctest.h"
#include "ucpgh/gh.hpp"

using namespace ucpgh;

namespace {

double max_diff(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) { return (a - b).cwiseAbs().maxCoeff(); }

TruncationPairPtr make_pair(const Variant& v) { return std::make_shared<const TruncationPair>(v); }

}  // namespace

TEST_CASE("correspondence structure") {
  const auto pair = make_pair(Variant::toeplitz_circle(3));
  const auto cs = build_correspondence(pair, 2, 2, 9);
  REQUIRE(cs.pairs.size() == 4);
  Rng rng(3);
  for (std::size_t i = 0; i < cs.pairs.size(); ++i) {
    const auto& p = cs.pairs[i];
    CHECK(p.branch == (i < 2 ? Pullback::R : Pullback::S));
    CHECK(p.truncated->target_dim() == 2);
    CHECK(p.full->target_dim() == 2);
    CHECK(p.truncated->system().toeplitz);
    CHECK_FALSE(p.full->system().toeplitz);
    // full = truncated o R on the R branch, truncated = full o S on the S branch.
    const auto f = random_self_adjoint_poly(rng, 1, 4);
    const auto t = random_self_adjoint_toeplitz(rng, pair->index_set());
    if (p.branch == Pullback::R)
      CHECK(max_diff(p.full->eval(f), p.truncated->eval(pair->compress(f))) < 1e-12);
    else
      CHECK(max_diff(p.truncated->eval(t), p.full->eval(pair->symbolize(t))) < 1e-12);
  }
  // Same seed, same maps.
  const auto again = build_correspondence(pair, 2, 2, 9);
  const auto* a = dynamic_cast<const ChoiUcp*>(cs.pairs[0].truncated.get());
  const auto* b = dynamic_cast<const ChoiUcp*>(again.pairs[0].truncated.get());
  REQUIRE(a);
  REQUIRE(b);
  CHECK(a->choi() == b->choi());
  CHECK(cs.pairs[0].seed != cs.pairs[2].seed);

  CHECK_THROWS_AS(build_correspondence(pair, 0, 1, 1), std::invalid_argument);
  CHECK_THROWS_AS(build_correspondence(nullptr, 1, 1, 1), std::invalid_argument);

  // Fejer-Riesz: maps on the truncated side only see bandwidth n - 1.
  const auto fr = build_correspondence(make_pair(Variant::fejer_riesz(4)), 1, 1, 2);
  CHECK(fr.pairs[0].truncated->system().max_band == 3);
  CHECK(fr.pairs[1].full->system().max_band == -1);
}

TEST_CASE("identical truncation has zero distortion") {
  const auto pair = make_pair(Variant::identity(3));
  const auto [cf, cb] = pair->certified_constants();
  CHECK(cf == 0.0);
  CHECK(cb == 0.0);
  const auto cs = build_correspondence(pair, 2, 1, 4);
  MetricConfig cfg;
  const auto rep = empirical_distortion(cs, cfg, make_triples(*pair));
  CHECK(rep.pairs.size() == 6);
  CHECK(rep.emp_distortion <= 2 * cfg.tol_obj);
  CHECK(rep.certified_bound == 0.0);
}

TEST_CASE("distortion respects the certified bound and the branch inequalities") {
  MetricConfig cfg;
  for (const auto& v : {Variant::toeplitz_circle(4), Variant::fejer_riesz(4)}) {
    CAPTURE(v.name());
    const auto pair = make_pair(v);
    const auto cs = build_correspondence(pair, 2, 1, 17);
    const auto rep = empirical_distortion(cs, cfg, make_triples(*pair));
    CHECK(rep.pairs.size() == 6);
    CHECK(rep.within_bound(4 * cfg.tol_obj));
    CHECK(rep.chain_violations(2 * cfg.tol_obj) == 0);
    CHECK(rep.max_solver_gap <= cfg.tol_obj);
    CHECK(rep.gh_upper == doctest::Approx(rep.c_fwd + rep.c_bwd).epsilon(1e-15));
    CHECK(rep.certified_bound == doctest::Approx(2 * rep.gh_upper).epsilon(1e-15));
    // Pullback contractivity on each branch.
    for (const auto& p : rep.pairs) {
      if (rep.branches[p.i] != rep.branches[p.j]) continue;
      if (rep.branches[p.i] == Pullback::R)
        CHECK(p.d_full <= p.d_truncated + 2 * cfg.tol_obj);
      else
        CHECK(p.d_truncated <= p.d_full + 2 * cfg.tol_obj);
    }
  }
}

TEST_CASE("parallel evaluation is deterministic and same-branch filtering works") {
  const auto pair = make_pair(Variant::toeplitz_circle(3));
  const auto cs = build_correspondence(pair, 2, 1, 5);
  const auto triples = make_triples(*pair);
  MetricConfig cfg;
  DistortionOptions serial, parallel, same;
  parallel.jobs = 3;
  same.same_branch_only = true;
  const auto a = empirical_distortion(cs, cfg, triples, serial);
  const auto b = empirical_distortion(cs, cfg, triples, parallel);
  REQUIRE(a.pairs.size() == b.pairs.size());
  for (std::size_t k = 0; k < a.pairs.size(); ++k) {
    CHECK(a.pairs[k].d_truncated == b.pairs[k].d_truncated);
    CHECK(a.pairs[k].d_full == b.pairs[k].d_full);
  }
  CHECK(a.emp_distortion == b.emp_distortion);
  const auto c = empirical_distortion(cs, cfg, triples, same);
  CHECK(c.pairs.size() == 2);
  for (const auto& p : c.pairs) CHECK(c.branches[p.i] == c.branches[p.j]);

  CorrespondenceSample one = cs;
  one.pairs.resize(1);
  CHECK_THROWS_AS(empirical_distortion(one, cfg, triples), std::invalid_argument);
}

TEST_CASE("gh upper bound decreases along the circle sweep") {
  double prev = 1e300;
  for (int n : {2, 4, 8, 16, 32}) {
    const TruncationPair pair(Variant::toeplitz_circle(n));
    const double g = gh_upper_bound(pair);
    CHECK(g < prev);
    CHECK(g == doctest::Approx(gh_upper_bound(TruncationPair(Variant::fejer_riesz(n)))).epsilon(1e-15));
    prev = g;
  }
  CHECK(prev == doctest::Approx(0.2282).epsilon(1e-3));
}
