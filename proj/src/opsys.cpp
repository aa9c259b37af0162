#include "ucpgh/opsys.hpp"

#include <algorithm>
#include <limits>

#include "ucpgh/linalg.hpp"
#include "ucpgh/random.hpp"

namespace ucpgh {

// ---------------------------------------------------------------- IndexSet

IndexSet::IndexSet(Kind kind, int dim, int level, std::vector<LatticePoint> points)
    : kind_(kind), dim_(dim), level_(level), points_(std::move(points)) {
  if (points_.empty()) throw std::invalid_argument("IndexSet: empty");
  for (int i = 0; i < size(); ++i) {
    if (!lookup_.emplace(points_[i], i).second) throw std::invalid_argument("IndexSet: repeated point");
  }
  std::vector<LatticePoint> diffs;
  diffs.reserve(points_.size() * points_.size());
  for (const auto& a : points_)
    for (const auto& b : points_) diffs.push_back(a - b);
  std::sort(diffs.begin(), diffs.end());
  diffs.erase(std::unique(diffs.begin(), diffs.end()), diffs.end());
  differences_ = std::move(diffs);
}

IndexSetPtr IndexSet::interval(int n) {
  if (n < 1) throw std::invalid_argument("interval: n must be >= 1");
  std::vector<LatticePoint> pts;
  for (int k = 0; k < n; ++k) pts.push_back({k, 0, 0});
  return IndexSetPtr(new IndexSet(Kind::interval, 1, n, std::move(pts)));
}

IndexSetPtr IndexSet::ball(int N, int dim) {
  if (N < 0) throw std::invalid_argument("ball: N must be >= 0");
  if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("ball: dimension must be 1..3");
  std::vector<LatticePoint> pts;
  const long long r2 = static_cast<long long>(N) * N;
  LatticePoint x{0, 0, 0};
  const int hi1 = dim > 1 ? N : 0, hi2 = dim > 2 ? N : 0;
  for (x[0] = -N; x[0] <= N; ++x[0])
    for (x[1] = -hi1; x[1] <= hi1; ++x[1])
      for (x[2] = -hi2; x[2] <= hi2; ++x[2])
        if (static_cast<long long>(x[0]) * x[0] + static_cast<long long>(x[1]) * x[1] +
                static_cast<long long>(x[2]) * x[2] <=
            r2)
          pts.push_back(x);
  return IndexSetPtr(new IndexSet(Kind::ball, dim, N, std::move(pts)));
}

IndexSetPtr IndexSet::polytope(const LatticePolytope& p, int N) {
  auto lp = lattice_points(p, N);
  auto* s = new IndexSet(Kind::polytope, p.dim(), N, std::move(lp.points));
  s->polytope_ = p;
  return IndexSetPtr(s);
}

IndexSetPtr IndexSet::custom(int dim, std::vector<LatticePoint> points) {
  std::sort(points.begin(), points.end());
  return IndexSetPtr(new IndexSet(Kind::polytope, dim, 0, std::move(points)));
}

int IndexSet::position(const LatticePoint& p) const {
  auto it = lookup_.find(p);
  return it == lookup_.end() ? -1 : it->second;
}

bool IndexSet::contains_difference(const LatticePoint& m) const {
  return std::binary_search(differences_.begin(), differences_.end(), m);
}

IndexSetPtr IndexSet::shifted(const LatticePoint& v) const {
  std::vector<LatticePoint> pts;
  for (const auto& p : points_) pts.push_back(p + v);
  auto* s = new IndexSet(kind_, dim_, level_, std::move(pts));
  s->polytope_ = polytope_;
  return IndexSetPtr(s);
}

// ---------------------------------------------------------------- Toeplitz

ToeplitzOperator::ToeplitzOperator(IndexSetPtr s, Symbol symbol) : set_(std::move(s)) {
  if (!set_) throw std::invalid_argument("ToeplitzOperator: null index set");
  for (const auto& [m, v] : symbol) {
    if (!set_->contains_difference(m))
      throw std::invalid_argument("ToeplitzOperator: symbol index outside the difference set");
    if (v != cplx(0.0)) symbol_.emplace(m, v);
  }
}

ToeplitzOperator ToeplitzOperator::identity(IndexSetPtr s) { return ToeplitzOperator(std::move(s), {{{0, 0, 0}, 1.0}}); }

cplx ToeplitzOperator::symbol(const LatticePoint& m) const {
  auto it = symbol_.find(m);
  return it == symbol_.end() ? cplx(0.0) : it->second;
}

Eigen::MatrixXcd ToeplitzOperator::matrix() const {
  const auto& pts = set_->points();
  const int n = set_->size();
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(n, n);
  for (int k = 0; k < n; ++k)
    for (int l = 0; l < n; ++l) a(k, l) = symbol(pts[k] - pts[l]);
  return a;
}

ToeplitzOperator ToeplitzOperator::adjoint() const {
  Symbol s;
  for (const auto& [m, v] : symbol_) s.emplace(-m, std::conj(v));
  return ToeplitzOperator(set_, std::move(s));
}

bool ToeplitzOperator::is_self_adjoint(double tol) const {
  for (const auto& [m, v] : symbol_)
    if (std::abs(symbol(-m) - std::conj(v)) > tol) return false;
  return true;
}

ToeplitzOperator& ToeplitzOperator::operator+=(const ToeplitzOperator& o) {
  if (!set_->same_points(*o.set_)) throw std::invalid_argument("ToeplitzOperator: index-set mismatch");
  for (const auto& [m, v] : o.symbol_) {
    const cplx s = symbol(m) + v;
    if (s == cplx(0.0))
      symbol_.erase(m);
    else
      symbol_[m] = s;
  }
  return *this;
}

ToeplitzOperator& ToeplitzOperator::operator*=(cplx s) {
  if (s == cplx(0.0)) symbol_.clear();
  for (auto& [m, v] : symbol_) v *= s;
  return *this;
}

// ---------------------------------------------------------------- Dirac

std::vector<Eigen::MatrixXcd> gamma_matrices(int d) {
  if (d < 1 || d > 3) throw std::invalid_argument("gamma_matrices: d must be 1..3");
  if (d == 1) return {Eigen::MatrixXcd::Identity(1, 1)};
  const cplx i(0.0, 1.0);
  Eigen::MatrixXcd sx(2, 2), sy(2, 2), sz(2, 2);
  sx << 0.0, 1.0, 1.0, 0.0;
  sy << 0.0, -i, i, 0.0;
  sz << 1.0, 0.0, 0.0, -1.0;
  if (d == 2) return {sx, sy};
  return {sx, sy, sz};
}

Eigen::MatrixXcd clifford_symbol(const std::vector<Eigen::MatrixXcd>& gamma, const LatticePoint& m) {
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(gamma[0].rows(), gamma[0].cols());
  for (std::size_t mu = 0; mu < gamma.size(); ++mu) out += double(m[mu]) * gamma[mu];
  return out;
}

DiracTruncation::DiracTruncation(IndexSetPtr s) : set_(std::move(s)), gamma_(gamma_matrices(set_->dim())) {}

Eigen::MatrixXcd DiracTruncation::matrix() const {
  const int s = spinor_dim(), n = set_->size();
  Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(n * s, n * s);
  for (int k = 0; k < n; ++k) d.block(k * s, k * s, s, s) = clifford_symbol(gamma_, set_->points()[k]);
  return d;
}

ToeplitzOperator toeplitz_from_function(const TrigPoly& f, IndexSetPtr s) {
  if (f.dim() != s->dim()) throw std::invalid_argument("toeplitz_from_function: dimension mismatch");
  ToeplitzOperator::Symbol sym;
  for (const auto& [m, v] : f.coeffs())
    if (s->contains_difference(m)) sym.emplace(m, v);
  return ToeplitzOperator(std::move(s), std::move(sym));
}

double operator_norm(const Eigen::MatrixXcd& a) {
  if (!all_finite(a)) throw std::invalid_argument("operator_norm: non-finite entries");
  const Eigen::Index r = a.rows(), c = a.cols();
  Eigen::MatrixXcd dil = Eigen::MatrixXcd::Zero(r + c, r + c);
  dil.topRightCorner(r, c) = a;
  dil.bottomLeftCorner(c, r) = a.adjoint();
  return spectral_radius_hermitian(dil);
}

Eigen::MatrixXcd commutator(const DiracTruncation& d, const ToeplitzOperator& t) {
  if (!d.index_set().same_points(t.index_set())) throw std::invalid_argument("commutator: index-set mismatch");
  const auto& pts = t.index_set().points();
  const int n = t.index_set().size(), s = d.spinor_dim();
  Eigen::MatrixXcd c = Eigen::MatrixXcd::Zero(n * s, n * s);
  for (int k = 0; k < n; ++k)
    for (int l = 0; l < n; ++l) {
      const LatticePoint m = pts[k] - pts[l];
      const cplx v = t.symbol(m);
      if (v != cplx(0.0)) c.block(k * s, l * s, s, s) = v * clifford_symbol(d.gamma(), m);
    }
  return c;
}

double toeplitz_lipschitz(const DiracTruncation& d, const ToeplitzOperator& t) {
  return operator_norm(commutator(d, t));
}

Bracket lipschitz_seminorm_fn(const TrigPoly& f, double tol_norm) {
  std::vector<TrigPoly> comps;
  for (int mu = 0; mu < f.dim(); ++mu) comps.push_back(f.derivative(mu));
  return sup_norm_vector(comps, tol_norm);
}

// ---------------------------------------------------------------- duality

cplx duality_pairing(const ToeplitzOperator& t, const TrigPoly& f) {
  if (t.index_set().kind() != IndexSet::Kind::interval)
    throw std::invalid_argument("duality_pairing: operator must live on interval(n)");
  const int n = t.index_set().size();
  if (f.dim() != 1) throw std::invalid_argument("duality_pairing: f must be one dimensional");
  cplx s = 0.0;
  for (const auto& [k, a] : f.coeffs()) {
    if (std::abs(k[0]) >= n) throw std::invalid_argument("duality_pairing: f has coefficients with |k| >= n");
    s += t.symbol(-k) * a;
  }
  return s;
}

namespace {

// |q|^2 on the circle for q(z) = sum_j q_j z^j.
TrigPoly abs_square(const std::vector<cplx>& q) {
  TrigPoly p(1);
  const int n = static_cast<int>(q.size());
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) p.add({j - k, 0, 0}, q[j] * std::conj(q[k]));
  return p;
}

}  // namespace

DualityReport duality_order_check(const ToeplitzOperator& t, int trials, std::uint64_t seed) {
  if (t.index_set().kind() != IndexSet::Kind::interval)
    throw std::invalid_argument("duality_order_check: operator must live on interval(n)");
  const int n = t.index_set().size();
  if (n > 8) throw std::invalid_argument("duality_order_check: n must be <= 8");
  DualityReport rep;
  rep.min_eigenvalue = min_eigenvalue(t.matrix());
  rep.psd = rep.min_eigenvalue >= -1e-10;

  // Search over q using only pairings: phi_t(|q|^2) for the value and
  // phi_t(conj(z^k) q) = (T q)_k for the descent direction.
  double shift = 0.0;
  for (const auto& [m, v] : t.symbols()) shift += std::abs(v);
  shift = std::max(shift, 1e-300);
  auto apply = [&](const std::vector<cplx>& q) {
    std::vector<cplx> out(n);
    for (int k = 0; k < n; ++k) {
      TrigPoly f(1);
      for (int l = 0; l < n; ++l) f.add({l - k, 0, 0}, q[l]);
      out[k] = duality_pairing(t, f);
    }
    return out;
  };
  auto normalize = [&](std::vector<cplx>& q) {
    double s = 0.0;
    for (const auto& v : q) s += std::norm(v);
    s = std::sqrt(s);
    if (s > 0)
      for (auto& v : q) v /= s;
  };

  Rng rng(seed);
  rep.min_pairing = std::numeric_limits<double>::infinity();
  for (int trial = 0; trial < std::max(trials, 1); ++trial) {
    std::vector<cplx> q(n);
    for (auto& v : q) v = rng.cnormal();
    normalize(q);
    // Power iteration on (shift I - T) drives q toward the bottom of the spectrum.
    for (int it = 0; it <= 60; ++it) {
      const double val = duality_pairing(t, abs_square(q)).real();
      if (val < rep.min_pairing) {
        rep.min_pairing = val;
        rep.witness = q;
      }
      const auto tq = apply(q);
      for (int k = 0; k < n; ++k) q[k] = shift * q[k] - tq[k];
      normalize(q);
    }
  }
  rep.pairing_positive = rep.min_pairing >= -1e-10;
  return rep;
}

std::vector<ToeplitzOperator> duality_corpus(int count, int n_min, int n_max, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<ToeplitzOperator> out;
  for (int i = 0; i < count; ++i) {
    const int n = n_min + i % (n_max - n_min + 1);
    auto set = IndexSet::interval(n);
    ToeplitzOperator::Symbol sym;
    const int kind = (i / (n_max - n_min + 1)) % 3;
    if (kind == 0) {
      // Compression of |b|^2 is B*B for the banded matrix B of b.
      std::vector<cplx> b(n + 1);
      for (auto& v : b) v = rng.cnormal();
      const TrigPoly p = abs_square(b);
      for (const auto& [m, v] : p.coeffs())
        if (std::abs(m[0]) < n) sym.emplace(m, v);
    } else {
      sym.emplace(LatticePoint{0, 0, 0}, rng.normal());
      for (int m = 1; m < n; ++m) {
        const cplx v = rng.cnormal();
        sym.emplace(LatticePoint{m, 0, 0}, v);
        sym.emplace(LatticePoint{-m, 0, 0}, std::conj(v));
      }
      if (kind == 2) {
        // Shift so that the smallest eigenvalue is +-0.05.
        ToeplitzOperator t(set, sym);
        const double lmin = min_eigenvalue(t.matrix());
        const double target = rng.uniform() < 0.5 ? 0.05 : -0.05;
        sym[{0, 0, 0}] += target - lmin;
      }
    }
    out.emplace_back(set, std::move(sym));
  }
  return out;
}

}  // namespace ucpgh
