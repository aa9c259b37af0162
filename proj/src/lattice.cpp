#include "ucpgh/lattice.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_set>

namespace ucpgh {

namespace {

using Vec = std::array<long long, 3>;

Vec to_vec(const LatticePoint& p) { return {p[0], p[1], p[2]}; }

long long dot3(const Vec& a, const Vec& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

// Rank of a list of integer vectors in their first `dim` coordinates (fraction-free elimination).
int integer_rank(std::vector<Vec> rows, int dim) {
  int rank = 0;
  for (int col = 0; col < dim && rank < static_cast<int>(rows.size()); ++col) {
    int piv = -1;
    for (int r = rank; r < static_cast<int>(rows.size()); ++r)
      if (rows[r][col] != 0) {
        piv = r;
        break;
      }
    if (piv < 0) continue;
    std::swap(rows[piv], rows[rank]);
    for (int r = 0; r < static_cast<int>(rows.size()); ++r) {
      if (r == rank || rows[r][col] == 0) continue;
      const long long a = rows[rank][col], b = rows[r][col];
      for (int c = 0; c < 3; ++c) rows[r][c] = rows[r][c] * a - rows[rank][c] * b;
      long long g = 0;
      for (int c = 0; c < 3; ++c) g = std::gcd(g, std::llabs(rows[r][c]));
      if (g > 1)
        for (int c = 0; c < 3; ++c) rows[r][c] /= g;
    }
    ++rank;
  }
  return rank;
}

Facet normalized(Vec n, long long off) {
  long long g = std::gcd(std::gcd(std::llabs(n[0]), std::llabs(n[1])), std::llabs(n[2]));
  g = std::gcd(g, std::llabs(off));
  if (g > 1) {
    for (auto& c : n) c /= g;
    off /= g;
  }
  return {n, off};
}

// Candidate hyperplanes through d affinely independent points; keeps supporting ones.
std::vector<Facet> enumerate_facets(int dim, const std::vector<LatticePoint>& pts) {
  std::vector<Facet> out;
  const std::size_t n = pts.size();
  auto add_if_supporting = [&](Vec normal, const LatticePoint& through) {
    if (normal[0] == 0 && normal[1] == 0 && normal[2] == 0) return;
    const long long off = dot3(normal, to_vec(through));
    bool le = true, ge = true;
    for (const auto& p : pts) {
      const long long v = dot3(normal, to_vec(p));
      le = le && v <= off;
      ge = ge && v >= off;
    }
    std::vector<Facet> fs;
    if (le) fs.push_back(normalized(normal, off));
    if (ge) fs.push_back(normalized({-normal[0], -normal[1], -normal[2]}, -off));
    for (const auto& f : fs) {
      bool dup = false;
      for (const auto& g : out) dup = dup || (g.normal == f.normal && g.offset == f.offset);
      if (!dup) out.push_back(f);
    }
  };

  if (dim == 1) {
    for (const auto& p : pts) add_if_supporting({1, 0, 0}, p);
  } else if (dim == 2) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        const Vec e = to_vec(pts[j] - pts[i]);
        add_if_supporting({-e[1], e[0], 0}, pts[i]);
      }
  } else {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        for (std::size_t k = j + 1; k < n; ++k) {
          const Vec a = to_vec(pts[j] - pts[i]);
          const Vec b = to_vec(pts[k] - pts[i]);
          add_if_supporting({a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]},
                            pts[i]);
        }
  }
  std::sort(out.begin(), out.end(), [](const Facet& a, const Facet& b) {
    return std::tie(a.normal, a.offset) < std::tie(b.normal, b.offset);
  });
  return out;
}

void validate_points(int dim, const std::vector<LatticePoint>& pts) {
  if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("LatticePolytope: dimension must be 1..3");
  if (pts.empty()) throw std::invalid_argument("LatticePolytope: no vertices");
  for (const auto& p : pts)
    for (int i = dim; i < kMaxDim; ++i)
      if (p[i] != 0) throw std::invalid_argument("LatticePolytope: vertex has coordinates beyond dim");
  std::vector<Vec> diffs;
  for (const auto& p : pts) diffs.push_back(to_vec(p - pts[0]));
  if (integer_rank(diffs, dim) < dim) throw std::invalid_argument("LatticePolytope: degenerate hull");
}

bool is_vertex(int dim, const LatticePoint& v, const std::vector<Facet>& facets) {
  std::vector<Vec> normals;
  for (const auto& f : facets)
    if (dot3(f.normal, to_vec(v)) == f.offset) normals.push_back(f.normal);
  return integer_rank(normals, dim) == dim;
}

}  // namespace

LatticePolytope::LatticePolytope(int dim, std::vector<LatticePoint> vertices)
    : dim_(dim), vertices_(std::move(vertices)) {
  validate_points(dim_, vertices_);
  std::sort(vertices_.begin(), vertices_.end());
  if (std::adjacent_find(vertices_.begin(), vertices_.end()) != vertices_.end())
    throw std::invalid_argument("LatticePolytope: repeated vertex");
  facets_ = enumerate_facets(dim_, vertices_);
  for (const auto& v : vertices_)
    if (!is_vertex(dim_, v, facets_))
      throw std::invalid_argument("LatticePolytope: point " + to_string(v, dim_) + " is not a vertex");
}

LatticePolytope LatticePolytope::hull(int dim, const std::vector<LatticePoint>& points) {
  std::vector<LatticePoint> pts = points;
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  validate_points(dim, pts);
  const auto facets = enumerate_facets(dim, pts);
  std::vector<LatticePoint> verts;
  for (const auto& p : pts)
    if (is_vertex(dim, p, facets)) verts.push_back(p);
  return LatticePolytope(dim, std::move(verts));
}

LatticePolytope LatticePolytope::cube(int dim) {
  std::vector<LatticePoint> v;
  for (int mask = 0; mask < (1 << dim); ++mask) {
    LatticePoint p{0, 0, 0};
    for (int i = 0; i < dim; ++i) p[i] = (mask >> i) & 1 ? 1 : -1;
    v.push_back(p);
  }
  return LatticePolytope(dim, v);
}

LatticePolytope LatticePolytope::cross_polytope(int dim) {
  std::vector<LatticePoint> v;
  for (int i = 0; i < dim; ++i)
    for (int s : {-1, 1}) {
      LatticePoint p{0, 0, 0};
      p[i] = s;
      v.push_back(p);
    }
  return LatticePolytope(dim, v);
}

bool LatticePolytope::contains_dilated(const LatticePoint& x, int n) const {
  for (const auto& f : facets_)
    if (dot3(f.normal, to_vec(x)) > static_cast<long long>(n) * f.offset) return false;
  return true;
}

bool summability_check(const LatticePolytope& p) {
  for (const auto& f : p.facets())
    if (!(0 < f.offset)) return false;
  return true;
}

LatticePointSet lattice_points(const LatticePolytope& p, int n) {
  if (n < 1) throw std::invalid_argument("lattice_points: N must be >= 1");
  if (!summability_check(p)) throw std::invalid_argument("lattice_points: origin is not interior");
  const int d = p.dim();
  std::array<int, 3> lo{0, 0, 0}, hi{0, 0, 0};
  for (int i = 0; i < d; ++i) {
    lo[i] = hi[i] = p.vertices()[0][i];
    for (const auto& v : p.vertices()) {
      lo[i] = std::min(lo[i], v[i]);
      hi[i] = std::max(hi[i], v[i]);
    }
    lo[i] *= n;
    hi[i] *= n;
  }
  LatticePointSet s;
  s.dim = d;
  s.N = n;
  LatticePoint x{0, 0, 0};
  for (x[0] = lo[0]; x[0] <= hi[0]; ++x[0])
    for (x[1] = lo[1]; x[1] <= hi[1]; ++x[1])
      for (x[2] = lo[2]; x[2] <= hi[2]; ++x[2])
        if (p.contains_dilated(x, n)) s.points.push_back(x);
  return s;
}

std::map<LatticePoint, long long> intersection_counts(const std::vector<LatticePoint>& points) {
  std::unordered_set<LatticePoint, LatticePointHash> members(points.begin(), points.end());
  std::map<LatticePoint, long long> diffs;
  for (const auto& a : points)
    for (const auto& b : points) diffs.emplace(a - b, 0);
  for (auto& [m, count] : diffs)
    for (const auto& p : points)
      if (members.count(p - m)) ++count;
  return diffs;
}

Kernel intersection_kernel(const std::vector<LatticePoint>& points, int dim) {
  if (points.empty()) throw std::invalid_argument("intersection_kernel: empty index set");
  const double size = static_cast<double>(points.size());
  TrigPoly k(dim);
  for (const auto& [m, c] : intersection_counts(points)) k.set(m, static_cast<double>(c) / size);
  return Kernel(std::move(k));
}

Kernel polyhedral_fejer_kernel(const LatticePolytope& p, int n) {
  return intersection_kernel(lattice_points(p, n).points, p.dim());
}

}  // namespace ucpgh
