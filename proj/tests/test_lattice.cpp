#include <set>

#include "doctest.h"
#include "ucpgh/lattice.hpp"

using namespace ucpgh;

namespace {

LatticePolytope segment() { return LatticePolytope(1, {{-1, 0, 0}, {1, 0, 0}}); }

// Brute-force oracle: |S cap (S+m)| by nested loops.
long long brute_count(const std::vector<LatticePoint>& s, const LatticePoint& m) {
  long long c = 0;
  for (const auto& p : s)
    for (const auto& q : s)
      if (p - q == m) ++c;
  return c;
}

}  // namespace

TEST_CASE("summability_check examples") {
  CHECK(summability_check(LatticePolytope::cube(2)));
  CHECK(summability_check(LatticePolytope::cross_polytope(3)));
  CHECK_THROWS_AS(LatticePolytope(2, {{0, 0, 0}, {1, 0, 0}}), std::invalid_argument);
  CHECK_FALSE(summability_check(LatticePolytope(1, {{0, 0, 0}, {2, 0, 0}})));
}

TEST_CASE("vertex lists must be minimal") {
  CHECK_THROWS_AS(LatticePolytope(1, {{-1, 0, 0}, {0, 0, 0}, {1, 0, 0}}), std::invalid_argument);
  CHECK_THROWS_AS(LatticePolytope(2, {{-1, -1, 0}, {1, -1, 0}, {1, 1, 0}, {-1, 1, 0}, {0, 1, 0}}),
                  std::invalid_argument);
  const auto h = LatticePolytope::hull(2, {{-1, -1, 0}, {1, -1, 0}, {1, 1, 0}, {-1, 1, 0}, {0, 1, 0}, {0, 0, 0}});
  CHECK(h.vertices().size() == 4);
  CHECK(h.facets().size() == 4);
  CHECK(LatticePolytope::cube(3).facets().size() == 6);
  CHECK(LatticePolytope::cross_polytope(3).facets().size() == 8);
}

TEST_CASE("lattice_points examples") {
  const auto s = lattice_points(segment(), 2);
  REQUIRE(s.points.size() == 5);
  for (int i = 0; i < 5; ++i) CHECK(s.points[i] == LatticePoint{i - 2, 0, 0});
  CHECK(lattice_points(LatticePolytope::cross_polytope(2), 1).points.size() == 5);
  CHECK(lattice_points(LatticePolytope::cube(2), 2).points.size() == 25);
  CHECK_THROWS_AS(lattice_points(segment(), 0), std::invalid_argument);
  CHECK_THROWS_AS(lattice_points(LatticePolytope(1, {{0, 0, 0}, {2, 0, 0}}), 1), std::invalid_argument);
}

TEST_CASE("lattice_points agrees with direct inequality tests") {
  for (int n = 1; n <= 6; ++n) {
    std::set<LatticePoint> cross, tri;
    for (int x = -2 * n; x <= 2 * n; ++x)
      for (int y = -2 * n; y <= 2 * n; ++y) {
        if (std::abs(x) + std::abs(y) <= n) cross.insert({x, y, 0});
        // conv{(-1,-1), (2,-1), (-1,2)}: x >= -n, y >= -n, x + y <= n
        if (x >= -n && y >= -n && x + y <= n) tri.insert({x, y, 0});
      }
    const auto c = lattice_points(LatticePolytope::cross_polytope(2), n);
    CHECK(std::set<LatticePoint>(c.points.begin(), c.points.end()) == cross);
    const auto t = lattice_points(LatticePolytope(2, {{-1, -1, 0}, {2, -1, 0}, {-1, 2, 0}}), n);
    CHECK(std::set<LatticePoint>(t.points.begin(), t.points.end()) == tri);
    CHECK(std::is_sorted(t.points.begin(), t.points.end()));
  }
  // Octahedron: (2n+1) + 2 sum_{k<n} (2k^2 + 2k + 1) points.
  for (int n = 1; n <= 4; ++n) {
    long long expect = 2LL * n * n + 2LL * n + 1;
    for (int k = 0; k < n; ++k) expect += 2LL * (2LL * k * k + 2LL * k + 1);
    CHECK(static_cast<long long>(lattice_points(LatticePolytope::cross_polytope(3), n).points.size()) == expect);
  }
}

TEST_CASE("intersection_counts examples and symmetry") {
  const auto s = lattice_points(segment(), 2);
  const auto c = intersection_counts(s);
  CHECK(c.at({1, 0, 0}) == 4);
  CHECK(c.at({0, 0, 0}) == 5);
  const auto cr = lattice_points(LatticePolytope::cross_polytope(2), 1);
  const auto cc = intersection_counts(cr);
  CHECK(cc.at({1, 0, 0}) == 2);
  CHECK(cc.at({0, 0, 0}) == 5);
  for (const auto& [m, v] : cc) {
    CHECK(cc.at(-m) == v);
    CHECK(brute_count(cr.points, m) == v);
  }
  const auto sq = lattice_points(LatticePolytope::cube(2), 3);
  for (const auto& [m, v] : intersection_counts(sq)) CHECK(brute_count(sq.points, m) == v);
}

TEST_CASE("polyhedral fejer kernel examples") {
  const auto k = polyhedral_fejer_kernel(segment(), 1);
  CHECK(k.poly().size() == 5);
  CHECK(std::abs(k.hat({-2, 0, 0}) - 1.0 / 3.0) < 1e-15);
  CHECK(std::abs(k.hat({-1, 0, 0}) - 2.0 / 3.0) < 1e-15);
  CHECK(k.hat({0, 0, 0}) == cplx(1.0));
  const auto sq = polyhedral_fejer_kernel(LatticePolytope::cube(2), 1);
  CHECK(std::abs(sq.hat({1, 1, 0}) - 4.0 / 9.0) < 1e-15);
}

TEST_CASE("segment kernel reduces to the classical fejer kernel") {
  for (int n = 1; n <= 10; ++n) {
    const auto k = polyhedral_fejer_kernel(segment(), n);
    const auto f = fejer_kernel(2 * n + 1);
    CHECK(k.poly().max_abs_coeff_diff(f.poly()) < 1e-15);
    CHECK(std::abs(kernel_first_moment(k).value - kernel_first_moment(f).value) < 1e-13);
  }
}

TEST_CASE("polyhedral kernel properties for N up to 8") {
  for (const auto& p : {LatticePolytope::cube(2), LatticePolytope::cross_polytope(2),
                        LatticePolytope(2, {{-1, -1, 0}, {2, -1, 0}, {-1, 2, 0}})}) {
    std::map<LatticePoint, double> prev;
    for (int n : {1, 2, 4, 8}) {
      const auto k = polyhedral_fejer_kernel(p, n);
      const auto rep = kernel_checks(k, 1.0, 2);
      CHECK(rep.min_grid_value >= -1e-10);
      CHECK(rep.coeff_at_zero == 1.0);
      for (const auto& [m, v] : rep.window) {
        if (prev.count(m)) CHECK(v >= prev[m] - 1e-12);
        prev[m] = v;
        CHECK(v <= 1.0);
      }
    }
  }
}
