#include "ucpgh/truncation.hpp"

#include <algorithm>

#include "ucpgh/fft.hpp"
#include "ucpgh/linalg.hpp"
#include "ucpgh/random.hpp"

namespace ucpgh {

// ---------------------------------------------------------------- Variant

Variant Variant::fejer_riesz(int n) {
  if (n < 1) throw std::invalid_argument("fejer_riesz: n must be >= 1");
  return {Kind::fejer_riesz, n, 1, std::nullopt};
}

Variant Variant::toeplitz_circle(int n) {
  if (n < 1) throw std::invalid_argument("toeplitz_circle: n must be >= 1");
  return {Kind::toeplitz_circle, n, 1, std::nullopt};
}

Variant Variant::torus_spherical(int d, int N) {
  if (d < 1 || d > 3) throw std::invalid_argument("torus_spherical: d must be 1..3");
  if (N < 1) throw std::invalid_argument("torus_spherical: N must be >= 1");
  return {Kind::torus_spherical, N, d, std::nullopt};
}

Variant Variant::torus_polyhedral(const LatticePolytope& p, int N) {
  if (N < 1) throw std::invalid_argument("torus_polyhedral: N must be >= 1");
  if (!summability_check(p)) throw std::invalid_argument("torus_polyhedral: origin must be interior");
  return {Kind::torus_polyhedral, N, p.dim(), p};
}

Variant Variant::identity(int n) {
  if (n < 1) throw std::invalid_argument("identity: n must be >= 1");
  return {Kind::identity, n, 1, std::nullopt};
}

std::string Variant::name() const {
  switch (kind) {
    case Kind::fejer_riesz: return "fejer_riesz";
    case Kind::toeplitz_circle: return "toeplitz_circle";
    case Kind::torus_spherical: return "torus_spherical";
    case Kind::torus_polyhedral: return "torus_polyhedral";
    case Kind::identity: return "identity";
  }
  return "unknown";
}

Variant Variant::at_level(int l) const {
  Variant v = *this;
  v.level = l;
  return v;
}

// ---------------------------------------------------------------- TruncationPair

TruncationPair::TruncationPair(Variant v) : variant_(std::move(v)) {
  switch (variant_.kind) {
    case Variant::Kind::fejer_riesz:
      kernel_ = fejer_kernel(variant_.level);
      break;
    case Variant::Kind::toeplitz_circle:
      set_ = IndexSet::interval(variant_.level);
      kernel_ = fejer_kernel(variant_.level);
      break;
    case Variant::Kind::torus_spherical:
      set_ = IndexSet::ball(variant_.level, variant_.dim);
      kernel_ = intersection_kernel(set_->points(), variant_.dim);
      break;
    case Variant::Kind::torus_polyhedral:
      set_ = IndexSet::polytope(*variant_.polytope, variant_.level);
      kernel_ = polyhedral_fejer_kernel(*variant_.polytope, variant_.level);
      break;
    case Variant::Kind::identity:
      set_ = IndexSet::interval(variant_.level);
      break;
  }
  if (set_) dirac_.emplace(set_);
}

int TruncationPair::truncated_bandwidth() const {
  if (!set_) return variant_.level - 1;
  int b = 0;
  for (const auto& m : set_->differences()) b = std::max(b, norm_inf(m));
  return b;
}

Operand TruncationPair::compress(const Operand& x) const {
  if (variant_.kind == Variant::Kind::identity) {
    const auto* t = std::get_if<ToeplitzOperator>(&x);
    if (!t || !t->index_set().same_points(*set_)) throw std::invalid_argument("compress: operand mismatch");
    return x;
  }
  const auto* f = std::get_if<TrigPoly>(&x);
  if (!f) throw std::invalid_argument("compress: expects a function");
  if (f->dim() != variant_.dim) throw std::invalid_argument("compress: dimension mismatch");
  if (variant_.kind == Variant::Kind::fejer_riesz) return convolve(*kernel_, *f);
  return toeplitz_from_function(*f, set_);
}

Operand TruncationPair::symbolize(const Operand& x) const {
  if (variant_.kind == Variant::Kind::identity) {
    const auto* t = std::get_if<ToeplitzOperator>(&x);
    if (!t || !t->index_set().same_points(*set_)) throw std::invalid_argument("symbolize: operand mismatch");
    return x;
  }
  if (variant_.kind == Variant::Kind::fejer_riesz) {
    const auto* f = std::get_if<TrigPoly>(&x);
    if (!f || f->dim() != 1 || f->max_bandwidth() > variant_.level - 1)
      throw std::invalid_argument("symbolize: operand is not in the Fejer-Riesz system");
    return *f;
  }
  const auto* t = std::get_if<ToeplitzOperator>(&x);
  if (!t || !t->index_set().same_points(*set_)) throw std::invalid_argument("symbolize: operand mismatch");
  TrigPoly out(variant_.dim);
  for (const auto& [m, v] : t->symbols()) out.set(m, kernel_->hat(m) * v);
  return out;
}

TrigPoly TruncationPair::symbolize_fn(const Operand& t) const {
  auto r = symbolize(t);
  const auto* f = std::get_if<TrigPoly>(&r);
  if (!f) throw std::invalid_argument("symbolize_fn: full side is not a function system");
  return *f;
}

Operand TruncationPair::truncated_unit() const {
  if (set_) return ToeplitzOperator::identity(set_);
  return TrigPoly::constant(1, 1.0);
}

Operand TruncationPair::full_unit() const {
  if (full_is_toeplitz()) return ToeplitzOperator::identity(set_);
  return TrigPoly::constant(variant_.dim, 1.0);
}

const Kernel& TruncationPair::roundtrip_kernel() const {
  if (!kernel_) throw std::invalid_argument("roundtrip_kernel: the identity variant has no kernel");
  return *kernel_;
}

std::pair<double, double> TruncationPair::certified_constants() const {
  std::call_once(constants_once_, [this] {
    if (!kernel_) {
      constants_ = {0.0, 0.0};
      return;
    }
    const double c = kernel_first_moment(*kernel_).certified_upper;
    constants_ = {c, c};
  });
  return constants_;
}

double operand_norm_upper(const Operand& x, const DiracTruncation* d) {
  (void)d;
  if (const auto* t = std::get_if<ToeplitzOperator>(&x)) return operator_norm(t->matrix());
  return sup_norm(std::get<TrigPoly>(x)).upper;
}

double TruncationPair::truncated_norm(const Operand& t) const { return operand_norm_upper(t, nullptr); }

double TruncationPair::truncated_lipschitz(const Operand& x) const {
  if (const auto* t = std::get_if<ToeplitzOperator>(&x)) return toeplitz_lipschitz(*dirac_, *t);
  return lipschitz_seminorm_fn(std::get<TrigPoly>(x)).upper;
}

// ---------------------------------------------------------------- sampling

TrigPoly random_self_adjoint_poly(Rng& rng, int dim, int band, double decay) {
  TrigPoly f(dim);
  LatticePoint k{0, 0, 0};
  const int b1 = dim > 1 ? band : 0, b2 = dim > 2 ? band : 0;
  for (k[0] = -band; k[0] <= band; ++k[0])
    for (k[1] = -b1; k[1] <= b1; ++k[1])
      for (k[2] = -b2; k[2] <= b2; ++k[2]) {
        if (is_positive(-k)) continue;
        const double scale = std::pow(1.0 + norm2(k), -decay);
        if (is_zero(k)) {
          f.set(k, rng.normal() * scale);
        } else {
          const cplx v = rng.cnormal() * scale;
          f.set(k, v);
          f.set(-k, std::conj(v));
        }
      }
  return f;
}

ToeplitzOperator random_self_adjoint_toeplitz(Rng& rng, const IndexSetPtr& s) {
  ToeplitzOperator::Symbol sym;
  for (const auto& m : s->differences()) {
    if (is_positive(-m)) continue;
    const double scale = 1.0 / (1.0 + norm2(m));
    if (is_zero(m)) {
      sym.emplace(m, rng.normal() * scale);
    } else {
      const cplx v = rng.cnormal() * scale;
      sym.emplace(m, v);
      sym.emplace(-m, std::conj(v));
    }
  }
  return ToeplitzOperator(s, std::move(sym));
}

double empirical_constant(const TruncationPair& pair, int trials, std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("empirical_constant: trials must be >= 1");
  if (pair.full_is_toeplitz()) return 0.0;
  Rng rng(seed);
  const int band = 4 * pair.variant().level;
  double best = 0.0;
  for (int t = 0; t < trials; ++t) {
    // Alternate between smooth and rough samples and random bandwidths.
    const int b = 1 + static_cast<int>(rng.uniform() * band);
    const TrigPoly f = random_self_adjoint_poly(rng, pair.dim(), std::min(b, band), t % 2 ? 1.0 : 2.0);
    const double lip = lipschitz_seminorm_fn(f).upper;
    if (lip <= 0.0) continue;
    const TrigPoly rt = pair.symbolize_fn(pair.compress(f));
    best = std::max(best, sup_norm(rt - f).lower / lip);
  }
  return best;
}

// ---------------------------------------------------------------- ucp_check

namespace {

using MatrixPoly = std::vector<std::vector<TrigPoly>>;  // L x L entries

MatrixPoly random_matrix_poly(Rng& rng, int dim, int l, int lo, int hi) {
  MatrixPoly h(l, std::vector<TrigPoly>(l, TrigPoly(dim)));
  for (auto& row : h)
    for (auto& e : row) {
      LatticePoint k{0, 0, 0};
      const int lo1 = dim > 1 ? lo : 0, hi1 = dim > 1 ? hi : 0;
      const int lo2 = dim > 2 ? lo : 0, hi2 = dim > 2 ? hi : 0;
      for (k[0] = lo; k[0] <= hi; ++k[0])
        for (k[1] = lo1; k[1] <= hi1; ++k[1])
          for (k[2] = lo2; k[2] <= hi2; ++k[2]) e.set(k, rng.cnormal());
    }
  return h;
}

// G = H^* H entrywise as trigonometric polynomials.
MatrixPoly gram(const MatrixPoly& h) {
  const int l = static_cast<int>(h.size());
  const int dim = h[0][0].dim();
  MatrixPoly g(l, std::vector<TrigPoly>(l, TrigPoly(dim)));
  for (int a = 0; a < l; ++a)
    for (int b = 0; b < l; ++b)
      for (int c = 0; c < l; ++c) {
        const TrigPoly ca = h[c][a].adjoint();
        for (const auto& [k1, v1] : ca.coeffs())
          for (const auto& [k2, v2] : h[c][b].coeffs()) g[a][b].add(k1 + k2, v1 * v2);
      }
  return g;
}

// min over a grid of the smallest eigenvalue of the matrix function, and max |entry| scale.
std::pair<double, double> grid_min_eigen(const MatrixPoly& g) {
  const int l = static_cast<int>(g.size());
  const int dim = g[0][0].dim();
  int band = 1;
  for (const auto& row : g)
    for (const auto& e : row) band = std::max(band, e.max_bandwidth());
  std::vector<int> grid(dim, fft_good_size(std::max(4 * band + 1, 16)));
  std::vector<std::vector<std::vector<cplx>>> vals(l, std::vector<std::vector<cplx>>(l));
  for (int a = 0; a < l; ++a)
    for (int b = 0; b < l; ++b) vals[a][b] = eval_grid(g[a][b], grid);
  double lo = std::numeric_limits<double>::infinity(), scale = 0.0;
  for (std::size_t j = 0; j < vals[0][0].size(); ++j) {
    Eigen::MatrixXcd m(l, l);
    for (int a = 0; a < l; ++a)
      for (int b = 0; b < l; ++b) m(a, b) = vals[a][b][j];
    const auto e = hermitian_eigen(m);
    lo = std::min(lo, e.values(0));
    scale = std::max(scale, e.values(l - 1));
  }
  return {lo, scale};
}

Eigen::MatrixXcd block_operator(const std::vector<std::vector<ToeplitzOperator>>& t) {
  const int l = static_cast<int>(t.size());
  const int n = t[0][0].index_set().size();
  Eigen::MatrixXcd m(l * n, l * n);
  for (int a = 0; a < l; ++a)
    for (int b = 0; b < l; ++b) m.block(a * n, b * n, n, n) = t[a][b].matrix();
  return m;
}

}  // namespace

UcpReport ucp_check(const TruncationPair& pair, Direction dir, int level_l, int trials, std::uint64_t seed) {
  if (level_l < 1 || level_l > 3) throw std::invalid_argument("ucp_check: amplification level must be 1..3");
  const int size = pair.index_set() ? pair.index_set()->size() : pair.variant().level;
  if (size > 16) throw std::invalid_argument("ucp_check: truncation size must be <= 16");
  if (pair.full_is_toeplitz()) throw std::invalid_argument("ucp_check: identity variant has no function side");

  UcpReport rep;
  rep.trials = trials;
  const int dim = pair.dim();
  const int level = pair.variant().level;
  const bool toeplitz = pair.truncated_is_toeplitz();

  // Unitality, exact.
  {
    const Operand r1 = pair.compress(TrigPoly::constant(dim, 1.0));
    bool ok;
    if (toeplitz) {
      const auto& t = std::get<ToeplitzOperator>(r1);
      ok = t.symbols().size() == 1 && t.symbol({0, 0, 0}) == cplx(1.0);
    } else {
      const auto& f = std::get<TrigPoly>(r1);
      ok = f.size() == 1 && f.coeff({0, 0, 0}) == cplx(1.0);
    }
    const TrigPoly s1 = pair.symbolize_fn(pair.truncated_unit());
    rep.unital = ok && s1.size() == 1 && s1.coeff({0, 0, 0}) == cplx(1.0);
  }

  // Identity input amplified: block identity.
  {
    MatrixPoly id(level_l, std::vector<TrigPoly>(level_l, TrigPoly(dim)));
    for (int a = 0; a < level_l; ++a) id[a][a] = TrigPoly::constant(dim, 1.0);
    if (dir == Direction::fwd && toeplitz) {
      std::vector<std::vector<ToeplitzOperator>> blocks;
      for (auto& row : id) {
        blocks.emplace_back();
        for (auto& e : row) blocks.back().push_back(std::get<ToeplitzOperator>(pair.compress(e)));
      }
      rep.identity_min_eigenvalue = min_eigenvalue(block_operator(blocks));
    } else {
      MatrixPoly out = id;
      if (dir == Direction::fwd)
        for (auto& row : out)
          for (auto& e : row) e = std::get<TrigPoly>(pair.compress(e));
      rep.identity_min_eigenvalue = grid_min_eigen(out).first;
    }
  }

  Rng rng(seed);
  rep.min_eigenvalue = std::numeric_limits<double>::infinity();
  const int band_full = std::max(level + 2, 2);
  for (int trial = 0; trial < trials; ++trial) {
    // Positivity on an amplified positive input.
    double lo, scale;
    if (dir == Direction::fwd) {
      const MatrixPoly g = gram(random_matrix_poly(rng, dim, level_l, -band_full / 2, band_full / 2));
      if (toeplitz) {
        std::vector<std::vector<ToeplitzOperator>> blocks;
        for (const auto& row : g) {
          blocks.emplace_back();
          for (const auto& e : row) blocks.back().push_back(std::get<ToeplitzOperator>(pair.compress(e)));
        }
        const auto e = hermitian_eigen(block_operator(blocks));
        lo = e.values(0);
        scale = e.values(e.values.size() - 1);
      } else {
        MatrixPoly out = g;
        for (auto& row : out)
          for (auto& e : row) e = std::get<TrigPoly>(pair.compress(e));
        std::tie(lo, scale) = grid_min_eigen(out);
      }
    } else {
      MatrixPoly out;
      if (toeplitz) {
        // Positive block Toeplitz input: compression of a positive matrix function.
        const MatrixPoly g = gram(random_matrix_poly(rng, dim, level_l, -band_full / 2, band_full / 2));
        std::vector<std::vector<ToeplitzOperator>> blocks;
        for (const auto& row : g) {
          blocks.emplace_back();
          for (const auto& e : row) blocks.back().push_back(toeplitz_from_function(e, pair.index_set()));
        }
        out.assign(level_l, std::vector<TrigPoly>(level_l, TrigPoly(dim)));
        for (int a = 0; a < level_l; ++a)
          for (int b = 0; b < level_l; ++b) out[a][b] = pair.symbolize_fn(blocks[a][b]);
      } else {
        // Positive elements of the Fejer-Riesz system: |H|^2 with H analytic of degree < n.
        out = gram(random_matrix_poly(rng, 1, level_l, 0, level - 1));
        for (auto& row : out)
          for (auto& e : row) e = pair.symbolize_fn(e);
      }
      std::tie(lo, scale) = grid_min_eigen(out);
    }
    const double rel = lo / std::max(scale, 1e-300);
    rep.min_eigenvalue = std::min(rep.min_eigenvalue, rel);
    if (rel < -1e-8) ++rep.positivity_violations;

    // Norm and Lipschitz contractivity on a self-adjoint sample.
    if (dir == Direction::fwd) {
      const TrigPoly f = random_self_adjoint_poly(rng, dim, band_full);
      const Operand r = pair.compress(f);
      if (pair.truncated_norm(r) > sup_norm(f).upper + 1e-10) ++rep.norm_violations;
      if (pair.truncated_lipschitz(r) > lipschitz_seminorm_fn(f).upper + 1e-10) ++rep.lipschitz_violations;
    } else {
      const Operand t = toeplitz ? Operand(random_self_adjoint_toeplitz(rng, pair.index_set()))
                                 : Operand(random_self_adjoint_poly(rng, 1, level - 1));
      const TrigPoly s = pair.symbolize_fn(t);
      if (sup_norm(s).lower > pair.truncated_norm(t) + 1e-10) ++rep.norm_violations;
      if (lipschitz_seminorm_fn(s).lower > pair.truncated_lipschitz(t) + 1e-10) ++rep.lipschitz_violations;
    }
  }
  if (trials == 0) rep.min_eigenvalue = rep.identity_min_eigenvalue;
  return rep;
}

}  // namespace ucpgh
