#include "doctest.h"
#include "ucpgh/linalg.hpp"
#include "ucpgh/ucpmetric.hpp"

using namespace ucpgh;

namespace {

AtomicUcp delta_state(double x) {
  return AtomicUcp(1, {{{x, 0.0, 0.0}, Eigen::MatrixXcd::Identity(1, 1)}});
}

double max_diff(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) { return (a - b).cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("choi maps: identity, unitality, determinism") {
  const auto s = IndexSet::interval(3);
  const auto id = ChoiUcp::identity(s);
  CHECK(id.target_dim() == 3);
  const ToeplitzOperator t(s, {{{0, 0, 0}, 0.5}, {{1, 0, 0}, cplx(0.2, 0.1)}, {{-1, 0, 0}, cplx(0.2, -0.1)}});
  CHECK(max_diff(id.eval(t), t.matrix()) < 1e-15);

  for (int m : {1, 2, 3}) {
    const auto a = sample_choi_ucp(s, m, 2, 7);
    CHECK(max_diff(a.eval(ToeplitzOperator::identity(s)), Eigen::MatrixXcd::Identity(m, m)) < 1e-12);
    CHECK(min_eigenvalue(a.choi()) > -1e-10);
    const auto b = sample_choi_ucp(s, m, 2, 7);
    CHECK(a.choi() == b.choi());
  }
  CHECK_THROWS_AS(sample_choi_ucp(s, 7, 2, 1), std::invalid_argument);
  CHECK_NOTHROW(sample_choi_ucp(s, 6, 2, 1));

  // Spinor factor: d = 2 doubles the domain.
  const auto b2 = IndexSet::ball(1, 2);
  const auto c2 = sample_choi_ucp(b2, 2, 1, 3);
  CHECK(c2.domain_size() == 2 * b2->size());
  CHECK(max_diff(c2.eval(ToeplitzOperator::identity(b2)), Eigen::MatrixXcd::Identity(2, 2)) < 1e-12);
  // Completely positive: positive Toeplitz inputs map to positive outputs.
  const ToeplitzOperator pos(b2, {{{0, 0, 0}, 1.0}, {{1, 0, 0}, 0.4}, {{-1, 0, 0}, 0.4}});
  REQUIRE(min_eigenvalue(pos.matrix()) > 0);
  CHECK(min_eigenvalue(c2.eval(pos)) > 0);
}

TEST_CASE("atomic maps") {
  const auto one = sample_atomic_ucp(2, 3, 1, 5);
  CHECK(one.atoms().size() == 1);
  CHECK(max_diff(one.atoms()[0].a, Eigen::MatrixXcd::Identity(3, 3)) == 0.0);
  const auto scalar = sample_atomic_ucp(1, 1, 5, 9);
  double total = 0.0;
  for (const auto& at : scalar.atoms()) {
    CHECK(at.a(0, 0).real() >= 0.0);
    total += at.a(0, 0).real();
  }
  CHECK(std::abs(total - 1.0) < 1e-12);
  for (int m : {1, 2, 4}) {
    const auto a = sample_atomic_ucp(2, m, 4, 11 + m);
    CHECK(max_diff(a.eval(TrigPoly::constant(2, 1.0)), Eigen::MatrixXcd::Identity(m, m)) < 1e-12);
  }
  CHECK_THROWS_AS(sample_atomic_ucp(1, 2, 0, 1), std::invalid_argument);
  CHECK_THROWS_AS(AtomicUcp(1, {{{0.0, 0.0, 0.0}, 0.5 * Eigen::MatrixXcd::Identity(1, 1)}}), std::invalid_argument);
  // Restriction rejects higher modes.
  const auto r = scalar.restricted(1);
  CHECK_NOTHROW(r.eval(TrigPoly::monomial(1, {1, 0, 0})));
  CHECK_THROWS_AS(r.eval(TrigPoly::monomial(1, {2, 0, 0})), std::invalid_argument);
}

TEST_CASE("pullbacks") {
  const auto pair = std::make_shared<const TruncationPair>(Variant::toeplitz_circle(2));
  const auto s = pair->index_set();
  // delta_0 pulled back along S, evaluated at the shift: the Fejer weight 1/2.
  const PullbackUcp ds(std::make_shared<AtomicUcp>(delta_state(0.0)), pair, Pullback::S);
  const ToeplitzOperator shift(s, {{{1, 0, 0}, 1.0}});
  CHECK(std::abs(ds.eval(shift)(0, 0) - cplx(0.5)) < 1e-15);
  CHECK(std::abs(ds.eval(ToeplitzOperator::identity(s))(0, 0) - cplx(1.0)) < 1e-15);
  // Identity map pulled back along R at f = 1.
  const PullbackUcp ir(std::make_shared<ChoiUcp>(ChoiUcp::identity(s)), pair, Pullback::R);
  CHECK(max_diff(ir.eval(TrigPoly::constant(1, 1.0)), Eigen::MatrixXcd::Identity(2, 2)) < 1e-15);
  // Wrong side.
  CHECK_THROWS_AS(PullbackUcp(std::make_shared<ChoiUcp>(ChoiUcp::identity(s)), pair, Pullback::S),
                  std::invalid_argument);

  for (const auto& v : {Variant::fejer_riesz(4), Variant::toeplitz_circle(4), Variant::torus_spherical(2, 2),
                        Variant::torus_polyhedral(LatticePolytope::cube(2), 1)}) {
    const auto p = std::make_shared<const TruncationPair>(v);
    UcpMapPtr base = p->truncated_is_toeplitz()
                         ? UcpMapPtr(std::make_shared<ChoiUcp>(sample_choi_ucp(p->index_set(), 2, 2, 3)))
                         : UcpMapPtr(std::make_shared<AtomicUcp>(sample_atomic_ucp(1, 2, 3, 3).restricted(3)));
    const PullbackUcp r(base, p, Pullback::R);
    CHECK(max_diff(r.eval(p->full_unit()), Eigen::MatrixXcd::Identity(2, 2)) < 1e-12);
    const PullbackUcp sb(std::make_shared<AtomicUcp>(sample_atomic_ucp(v.dim, 2, 3, 4)), p, Pullback::S);
    CHECK(max_diff(sb.eval(p->truncated_unit()), Eigen::MatrixXcd::Identity(2, 2)) < 1e-12);
  }
}

TEST_CASE("metric configuration") {
  MetricConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  for (int m : {1, 2, 3}) {
    cfg.m = m;
    cfg.P = 8;
    const auto k = cfg.vectors();
    CHECK(k.size() == 8);
    for (const auto& v : k) CHECK(v.norm() <= 1.0);
  }
  // Independently computed weights sum_p 2^{-p} |k_p|^2.
  cfg.m = 1;
  cfg.P = 6;
  CHECK(std::abs(cfg.weight() - 0.3060257523148148) < 1e-15);
  cfg.m = 2;
  CHECK(std::abs(cfg.weight() - 0.8520948972849801) < 1e-15);
  cfg.P = 5;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.tail_tol = 0.1;
  CHECK_NOTHROW(cfg.validate());
  cfg.P = 9;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("classical distances between point states") {
  MetricConfig cfg;
  const double w = 0.3060257523148148;
  const auto circle = SpectralTriple::continuum(1, 16);
  const auto d0 = delta_state(0.0);
  auto r = distance(d0, delta_state(kPi / 4), cfg, circle);
  CHECK(r.exact);
  CHECK(std::abs(r.value - 0.24035206382037796) <= 2e-4 * w);
  CHECK(r.gap <= cfg.tol_obj);
  r = distance(d0, delta_state(kPi), cfg, circle);
  CHECK(std::abs(r.value - 0.6120515046296297) <= 2e-4 * w);
  CHECK(distance(d0, d0, cfg, circle).value == 0.0);
  // Geodesic distance wraps around the circle.
  r = distance(d0, delta_state(kTwoPi - 0.5), cfg, circle);
  CHECK(std::abs(r.value - 0.5 * w) <= 2e-4 * w);

  // The band-limited surrogate stays below and approaches the exact value.
  const auto band = SpectralTriple::function(1, 16);
  const auto rb = distance(d0, delta_state(kPi / 4), cfg, band);
  CHECK(!rb.exact);
  CHECK(rb.value <= 0.24035206382037796 + 1e-9);
  CHECK(rb.value > 0.9 * 0.24035206382037796);
  CHECK(rb.gap <= cfg.tol_obj);
}

TEST_CASE("distance is symmetric, vanishes on the diagonal and obeys the triangle inequality") {
  const auto s = IndexSet::interval(4);
  const auto t = SpectralTriple::toeplitz(s);
  for (int m : {1, 2}) {
    MetricConfig cfg;
    cfg.m = m;
    std::vector<ChoiUcp> maps;
    for (int i = 0; i < 3; ++i) maps.push_back(sample_choi_ucp(s, m, 2, 100 * m + i));
    CHECK(distance(maps[0], maps[0], cfg, t).value == 0.0);
    double d[3][3];
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        if (i == j) continue;
        const auto r = distance(maps[i], maps[j], cfg, t);
        CHECK(r.gap <= cfg.tol_obj);
        d[i][j] = r.value;
      }
    for (int i = 0; i < 3; ++i)
      for (int j = i + 1; j < 3; ++j) CHECK(d[i][j] == d[j][i]);
    CHECK(d[0][2] <= d[0][1] + d[1][2] + 3 * cfg.tol_obj);
    CHECK(d[0][1] <= d[0][2] + d[2][1] + 3 * cfg.tol_obj);
    CHECK(d[1][2] <= d[1][0] + d[0][2] + 3 * cfg.tol_obj);
    CHECK(d[0][1] > 10 * cfg.tol_obj);
  }
}

TEST_CASE("solver agrees with the grid oracle") {
  MetricConfig cfg;
  const auto s = IndexSet::interval(2);
  const auto t = SpectralTriple::toeplitz(s);
  const auto a = sample_choi_ucp(s, 1, 2, 1), b = sample_choi_ucp(s, 1, 2, 2);
  const double oracle = distance_oracle(a, b, cfg, t);
  const auto r = distance(a, b, cfg, t);
  CHECK(r.value >= oracle - cfg.tol_obj);
  CHECK(r.value <= oracle + cfg.oracle_step + cfg.tol_obj);
  CHECK(std::abs(distance_oracle(a, b, cfg, t, cfg.oracle_step / 2) - oracle) < 1e-2);
  CHECK(distance_oracle(a, a, cfg, t) == 0.0);

  // Fejer-Riesz system of degree 1 with restricted atomic maps, m = 2.
  cfg.m = 2;
  const auto f = SpectralTriple::function(1, 1);
  const auto p = sample_atomic_ucp(1, 2, 3, 5).restricted(1), q = sample_atomic_ucp(1, 2, 2, 6).restricted(1);
  const double of = distance_oracle(p, q, cfg, f);
  const auto rf = distance(p, q, cfg, f);
  CHECK(rf.value >= of - cfg.tol_obj);
  CHECK(rf.value <= of + cfg.oracle_step + cfg.tol_obj);

  CHECK_THROWS_AS(distance_oracle(sample_choi_ucp(IndexSet::interval(4), 1, 1, 1),
                                  sample_choi_ucp(IndexSet::interval(4), 1, 1, 2), MetricConfig{},
                                  SpectralTriple::toeplitz(IndexSet::interval(4))),
                  std::invalid_argument);
}

TEST_CASE("complex test elements can only increase the distance") {
  const auto s = IndexSet::interval(3);
  const auto t = SpectralTriple::toeplitz(s);
  MetricConfig cfg;
  cfg.m = 2;
  const auto a = sample_choi_ucp(s, 2, 2, 21), b = sample_choi_ucp(s, 2, 2, 22);
  const double sa = distance(a, b, cfg, t).value;
  cfg.self_adjoint_only = false;
  const auto r = distance(a, b, cfg, t);
  CHECK(!r.certified);
  CHECK(r.value >= sa - cfg.tol_obj);
  // m = 1: a common phase suffices, so the complex problem is a single certified solve.
  cfg.m = 1;
  const auto c = sample_choi_ucp(s, 1, 2, 23), d = sample_choi_ucp(s, 1, 2, 24);
  const auto rc = distance(c, d, cfg, t);
  CHECK(rc.certified);
  CHECK(rc.gap <= cfg.tol_obj);
}

TEST_CASE("distance input validation") {
  const auto s = IndexSet::interval(2);
  const auto t = SpectralTriple::toeplitz(s);
  MetricConfig cfg;
  const auto a = sample_choi_ucp(s, 2, 1, 1), b = sample_choi_ucp(s, 1, 1, 1);
  CHECK_THROWS_AS(distance(a, b, cfg, t), std::invalid_argument);
  CHECK_THROWS_AS(distance(delta_state(0), delta_state(1), cfg, t), std::invalid_argument);
  CHECK_THROWS_AS(distance(b, b, cfg, SpectralTriple::toeplitz(IndexSet::interval(3))), std::invalid_argument);
}
