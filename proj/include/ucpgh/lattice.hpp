#pragma once

#include <map>
#include <vector>

#include "ucpgh/harmonic.hpp"

namespace ucpgh {

// Half-space normal . x <= offset with integer data.
struct Facet {
  std::array<long long, 3> normal{0, 0, 0};
  long long offset = 0;
};

class LatticePolytope {
 public:
  // Vertices must be exactly the vertex set of their hull; throws otherwise or
  // when the hull is lower dimensional.
  LatticePolytope(int dim, std::vector<LatticePoint> vertices);
  // Convex hull of arbitrary points; non-vertices are dropped.
  static LatticePolytope hull(int dim, const std::vector<LatticePoint>& points);

  static LatticePolytope cube(int dim);            // conv{(+-1, ..., +-1)}
  static LatticePolytope cross_polytope(int dim);  // conv{+-e_mu}

  int dim() const { return dim_; }
  const std::vector<LatticePoint>& vertices() const { return vertices_; }
  const std::vector<Facet>& facets() const { return facets_; }
  // x in N * conv(vertices), exact integer test.
  bool contains_dilated(const LatticePoint& x, int n) const;

 private:
  int dim_;
  std::vector<LatticePoint> vertices_;
  std::vector<Facet> facets_;
};

struct LatticePointSet {
  int dim = 1;
  int N = 0;
  std::vector<LatticePoint> points;  // sorted lexicographically
};

bool summability_check(const LatticePolytope& p);

LatticePointSet lattice_points(const LatticePolytope& p, int n);

// m -> |S cap (S + m)| over the difference set S - S.
std::map<LatticePoint, long long> intersection_counts(const std::vector<LatticePoint>& points);
inline std::map<LatticePoint, long long> intersection_counts(const LatticePointSet& s) {
  return intersection_counts(s.points);
}

// Kernel with coefficients |S cap (S + m)| / |S| for any finite S.
Kernel intersection_kernel(const std::vector<LatticePoint>& points, int dim);

Kernel polyhedral_fejer_kernel(const LatticePolytope& p, int n);

}  // namespace ucpgh
