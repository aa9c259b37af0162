#include "ucpgh/harmonic.hpp"

#include <algorithm>
#include <functional>
#include <queue>
#include <sstream>

#include "ucpgh/fft.hpp"

namespace ucpgh {

std::string to_string(const LatticePoint& p, int dim) {
  std::ostringstream os;
  os << '(';
  for (int i = 0; i < dim; ++i) os << (i ? "," : "") << p[i];
  os << ')';
  return os.str();
}

// ---------------------------------------------------------------- TrigPoly

TrigPoly::TrigPoly(int dim) : dim_(dim) {
  if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("TrigPoly: dimension must be 1..3");
}

TrigPoly::TrigPoly(int dim, CoeffMap coeffs) : TrigPoly(dim) {
  for (const auto& [k, v] : coeffs) set(k, v);
}

TrigPoly TrigPoly::constant(int dim, cplx value) {
  TrigPoly p(dim);
  p.set({0, 0, 0}, value);
  return p;
}

TrigPoly TrigPoly::monomial(int dim, const LatticePoint& k, cplx value) {
  TrigPoly p(dim);
  p.set(k, value);
  return p;
}

void TrigPoly::check_point(const LatticePoint& k) const {
  for (int i = dim_; i < kMaxDim; ++i)
    if (k[i] != 0) throw std::invalid_argument("TrigPoly: index has coordinates beyond dim");
}

cplx TrigPoly::coeff(const LatticePoint& k) const {
  auto it = coeffs_.find(k);
  return it == coeffs_.end() ? cplx(0.0) : it->second;
}

void TrigPoly::set(const LatticePoint& k, cplx value) {
  check_point(k);
  if (value == cplx(0.0))
    coeffs_.erase(k);
  else
    coeffs_[k] = value;
}

void TrigPoly::add(const LatticePoint& k, cplx value) { set(k, coeff(k) + value); }

TrigPoly TrigPoly::adjoint() const {
  TrigPoly out(dim_);
  for (const auto& [k, v] : coeffs_) out.coeffs_[-k] = std::conj(v);
  return out;
}

bool TrigPoly::is_self_adjoint(double tol) const {
  for (const auto& [k, v] : coeffs_)
    if (std::abs(coeff(-k) - std::conj(v)) > tol) return false;
  return true;
}

std::array<int, 3> TrigPoly::bandwidth() const {
  std::array<int, 3> b{0, 0, 0};
  for (const auto& [k, v] : coeffs_)
    for (int i = 0; i < 3; ++i) b[i] = std::max(b[i], std::abs(k[i]));
  return b;
}

int TrigPoly::max_bandwidth() const {
  auto b = bandwidth();
  return std::max({b[0], b[1], b[2]});
}

TrigPoly TrigPoly::derivative(int mu) const {
  if (mu < 0 || mu >= dim_) throw std::invalid_argument("derivative: axis out of range");
  TrigPoly out(dim_);
  for (const auto& [k, v] : coeffs_) out.set(k, cplx(0.0, k[mu]) * v);
  return out;
}

TrigPoly& TrigPoly::operator+=(const TrigPoly& o) {
  if (o.dim_ != dim_) throw std::invalid_argument("TrigPoly: dimension mismatch");
  for (const auto& [k, v] : o.coeffs_) add(k, v);
  return *this;
}

TrigPoly& TrigPoly::operator-=(const TrigPoly& o) {
  if (o.dim_ != dim_) throw std::invalid_argument("TrigPoly: dimension mismatch");
  for (const auto& [k, v] : o.coeffs_) add(k, -v);
  return *this;
}

TrigPoly& TrigPoly::operator*=(cplx s) {
  if (s == cplx(0.0)) {
    coeffs_.clear();
    return *this;
  }
  for (auto& [k, v] : coeffs_) v *= s;
  return *this;
}

double TrigPoly::max_abs_coeff_diff(const TrigPoly& o) const {
  double m = 0.0;
  for (const auto& [k, v] : coeffs_) m = std::max(m, std::abs(v - o.coeff(k)));
  for (const auto& [k, v] : o.coeffs_) m = std::max(m, std::abs(v - coeff(k)));
  return m;
}

// ---------------------------------------------------------------- evaluation

cplx eval(const TrigPoly& f, std::span<const double> x) {
  if (static_cast<int>(x.size()) != f.dim()) throw std::invalid_argument("eval: dimension mismatch");
  cplx s = 0.0;
  for (const auto& [k, v] : f.coeffs()) {
    const double ph = dot(k, x);
    s += v * cplx(std::cos(ph), std::sin(ph));
  }
  return s;
}

namespace {

std::size_t grid_total(std::span<const int> grid) {
  std::size_t t = 1;
  for (int m : grid) t *= static_cast<std::size_t>(m);
  return t;
}

std::size_t wrap_index(const LatticePoint& k, std::span<const int> grid) {
  std::size_t idx = 0;
  for (std::size_t mu = 0; mu < grid.size(); ++mu) {
    const int m = grid[mu];
    const int r = ((k[mu] % m) + m) % m;
    idx = idx * m + r;
  }
  return idx;
}

// Direct value and gradient of a list of (k, a_k) at x.
struct Terms {
  std::vector<LatticePoint> k;
  std::vector<cplx> a;
};

Terms terms_of(const TrigPoly& f) {
  Terms t;
  for (const auto& [k, v] : f.coeffs()) {
    t.k.push_back(k);
    t.a.push_back(v);
  }
  return t;
}

}  // namespace

std::vector<cplx> eval_grid(const TrigPoly& f, std::span<const int> grid) {
  if (static_cast<int>(grid.size()) != f.dim()) throw std::invalid_argument("eval_grid: dimension mismatch");
  const auto bw = f.bandwidth();
  for (int mu = 0; mu < f.dim(); ++mu)
    if (grid[mu] <= 2 * bw[mu]) throw std::invalid_argument("eval_grid: grid too coarse for bandwidth");
  std::vector<cplx> data(grid_total(grid), 0.0);
  for (const auto& [k, v] : f.coeffs()) data[wrap_index(k, grid)] += v;
  fft_inplace(data, grid, +1);
  return data;
}

// sup_x sqrt(sum_c |f_c(x)|^2). Works on g = sum_c |f_c|^2, a real trigonometric
// polynomial of bandwidth 2B; g(x) <= g(c) + |grad g(c)| r + H r^2 / 2 on a cell of
// radius r around c, with H = sum_l |l|^2 |g^(l)|.
Bracket sup_norm_vector(std::span<const TrigPoly> comps, double tol) {
  if (comps.empty()) return {0.0, 0.0};
  const int d = comps[0].dim();
  std::array<int, 3> bw{0, 0, 0};
  bool any = false;
  for (const auto& f : comps) {
    if (f.dim() != d) throw std::invalid_argument("sup_norm: dimension mismatch");
    auto b = f.bandwidth();
    for (int i = 0; i < 3; ++i) bw[i] = std::max(bw[i], b[i]);
    any = any || !f.empty();
  }
  if (!any) return {0.0, 0.0};

  std::vector<int> grid(d);
  for (int mu = 0; mu < d; ++mu) grid[mu] = bw[mu] == 0 ? 1 : fft_good_size(std::max(8 * bw[mu], 16));
  const std::size_t total = grid_total(grid);

  std::vector<double> g(total, 0.0);
  std::vector<std::vector<double>> dg(d, std::vector<double>(total, 0.0));
  for (const auto& f : comps) {
    if (f.empty()) continue;
    auto fv = eval_grid(f, grid);
    for (std::size_t j = 0; j < total; ++j) g[j] += std::norm(fv[j]);
    for (int mu = 0; mu < d; ++mu) {
      if (bw[mu] == 0) continue;
      auto dv = eval_grid(f.derivative(mu), grid);
      for (std::size_t j = 0; j < total; ++j) dg[mu][j] += 2.0 * (std::conj(fv[j]) * dv[j]).real();
    }
  }

  // Curvature constant from the exact coefficients of g (grid has > 4B points per axis).
  double hess = 0.0;
  {
    std::vector<cplx> gh(g.begin(), g.end());
    fft_inplace(gh, grid, -1);
    std::vector<int> idx(d, 0);
    for (std::size_t j = 0; j < total; ++j) {
      std::size_t r = j;
      double l2 = 0.0;
      bool inside = true;
      for (int mu = d - 1; mu >= 0; --mu) {
        int c = static_cast<int>(r % grid[mu]);
        r /= grid[mu];
        if (c > grid[mu] / 2) c -= grid[mu];
        if (std::abs(c) > 2 * bw[mu]) inside = false;
        l2 += double(c) * c;
      }
      if (inside) hess += l2 * std::abs(gh[j]) / static_cast<double>(total);
    }
    hess *= 1.0 + 1e-12;
  }

  std::array<double, 3> half{0.0, 0.0, 0.0};
  for (int mu = 0; mu < d; ++mu) half[mu] = bw[mu] == 0 ? 0.0 : kPi / grid[mu];

  std::vector<Terms> terms;
  for (const auto& f : comps) terms.push_back(terms_of(f));

  // Per-axis tables e^{i j x_mu}, |j| <= bw_mu, shared by all terms.
  std::array<std::vector<cplx>, 3> tab;
  for (int mu = 0; mu < 3; ++mu) tab[mu].assign(2 * bw[mu] + 1, 1.0);
  auto eval_point = [&](const std::array<double, 3>& x, double& gv, std::array<double, 3>& grad) {
    for (int mu = 0; mu < d; ++mu) {
      auto& e = tab[mu];
      const int b = bw[mu];
      const cplx step(std::cos(x[mu]), std::sin(x[mu]));
      for (int j = 1; j <= b; ++j) {
        e[b + j] = e[b + j - 1] * step;
        e[b - j] = std::conj(e[b + j]);
      }
    }
    gv = 0.0;
    grad = {0.0, 0.0, 0.0};
    for (const auto& t : terms) {
      cplx fv = 0.0;
      std::array<cplx, 3> df{0.0, 0.0, 0.0};
      for (std::size_t i = 0; i < t.k.size(); ++i) {
        const auto& k = t.k[i];
        const cplx e = t.a[i] * tab[0][k[0] + bw[0]] * tab[1][k[1] + bw[1]] * tab[2][k[2] + bw[2]];
        fv += e;
        for (int mu = 0; mu < d; ++mu) df[mu] += cplx(0.0, k[mu]) * e;
      }
      gv += std::norm(fv);
      for (int mu = 0; mu < d; ++mu) grad[mu] += 2.0 * (std::conj(fv) * df[mu]).real();
    }
  };

  struct Cell {
    double bound;
    std::array<double, 3> center;
    double scale;  // half-width multiplier relative to the base cell
    bool operator<(const Cell& o) const { return bound < o.bound; }
  };
  auto cell_bound = [&](double gv, const std::array<double, 3>& grad, double scale) {
    double r2 = 0.0;
    for (int mu = 0; mu < d; ++mu) r2 += half[mu] * half[mu];
    const double r = std::sqrt(r2) * scale;
    const double gn = std::sqrt(grad[0] * grad[0] + grad[1] * grad[1] + grad[2] * grad[2]);
    return gv + gn * r + 0.5 * hess * r * r;
  };

  double lower = 0.0;
  for (double v : g) lower = std::max(lower, v);
  auto done = [&](double upper) {
    return std::sqrt(std::max(upper, 0.0)) - std::sqrt(std::max(lower, 0.0)) <= tol;
  };

  std::priority_queue<Cell> queue;
  double discarded = 0.0;
  for (std::size_t j = 0; j < total; ++j) {
    std::array<double, 3> grad{0.0, 0.0, 0.0};
    std::array<double, 3> c{0.0, 0.0, 0.0};
    std::size_t r = j;
    for (int mu = d - 1; mu >= 0; --mu) {
      c[mu] = kTwoPi * static_cast<double>(r % grid[mu]) / grid[mu];
      r /= grid[mu];
      grad[mu] = dg[mu][j];
    }
    const double b = cell_bound(g[j], grad, 1.0);
    if (done(b))
      discarded = std::max(discarded, b);
    else
      queue.push({b, c, 1.0});
  }

  int active = 0;
  for (int mu = 0; mu < d; ++mu) active += bw[mu] > 0;
  const std::size_t max_pops = 4'000'000;
  std::size_t pops = 0;
  while (!queue.empty() && !done(queue.top().bound) && pops < max_pops) {
    Cell cell = queue.top();
    queue.pop();
    ++pops;
    const double s = 0.5 * cell.scale;
    for (int mask = 0; mask < (1 << active); ++mask) {
      std::array<double, 3> c = cell.center;
      int bit = 0;
      for (int mu = 0; mu < d; ++mu) {
        if (bw[mu] == 0) continue;
        c[mu] += ((mask >> bit) & 1 ? 1.0 : -1.0) * half[mu] * s;
        ++bit;
      }
      double gv;
      std::array<double, 3> grad;
      eval_point(c, gv, grad);
      lower = std::max(lower, gv);
      const double b = cell_bound(gv, grad, s);
      if (done(b))
        discarded = std::max(discarded, b);
      else
        queue.push({b, c, s});
    }
  }
  double upper = std::max(discarded, lower);
  if (!queue.empty()) upper = std::max(upper, queue.top().bound);
  return {std::sqrt(lower), std::sqrt(upper)};
}

Bracket sup_norm(const TrigPoly& f, double tol_norm) {
  return sup_norm_vector(std::span<const TrigPoly>(&f, 1), tol_norm);
}

// ---------------------------------------------------------------- kernels

Kernel::Kernel(TrigPoly poly) : poly_(std::move(poly)) {
  if (poly_.coeff({0, 0, 0}) != cplx(1.0)) throw std::invalid_argument("Kernel: mean must be exactly 1");
  if (!poly_.is_self_adjoint(1e-15)) throw std::invalid_argument("Kernel: not self-adjoint");
  const auto bw = poly_.bandwidth();
  std::vector<int> grid(poly_.dim());
  for (int mu = 0; mu < poly_.dim(); ++mu) grid[mu] = fft_good_size(std::max(8 * bw[mu], 16));
  const auto v = eval_grid(poly_, grid);
  for (const auto& x : v)
    if (x.real() < -kKernelNegTol) throw std::domain_error("Kernel: negative value on verification grid");
}

TrigPoly convolve(const Kernel& k, const TrigPoly& f) {
  if (k.dim() != f.dim()) throw std::invalid_argument("convolve: dimension mismatch");
  TrigPoly out(f.dim());
  for (const auto& [m, a] : f.coeffs()) {
    const cplx kh = k.hat(m);
    if (kh != cplx(0.0)) out.set(m, kh * a);
  }
  return out;
}

Kernel fejer_kernel(int n) {
  if (n < 1) throw std::invalid_argument("fejer_kernel: n must be >= 1");
  TrigPoly p(1);
  for (int k = -(n - 1); k <= n - 1; ++k) p.set({k, 0, 0}, 1.0 - double(std::abs(k)) / n);
  return Kernel(std::move(p));
}

int quadrature_cells(int dim) {
  switch (dim) {
    case 1: return 2048;
    case 2: return 256;
    default: return 64;
  }
}

namespace {

double sinc(double z) { return std::abs(z) < 1e-8 ? 1.0 - z * z / 6.0 : std::sin(z) / z; }

// (1/2pi) int_{-b}^{b} u e^{i a u} du = i/pi * (sin z - z cos z)/a^2, z = a b.
cplx first_moment_factor(double a, double b) {
  if (a == 0.0) return 0.0;
  const double z = a * b;
  double num;
  if (std::abs(z) < 1e-2) {
    const double z2 = z * z;
    num = z * z2 * (1.0 / 3.0 - z2 / 30.0 + z2 * z2 / 840.0);
  } else {
    num = std::sin(z) - z * std::cos(z);
  }
  return cplx(0.0, num / (kPi * a * a));
}

// Per-cell integrals on the aligned grid with edges at -pi + j h.
struct CellIntegrals {
  std::vector<int> grid;
  double h = 0.0;
  std::vector<double> i0;                 // (2 pi)^{-d} int_Q K
  std::vector<std::vector<double>> i1;    // (2 pi)^{-d} int_Q K (x_mu - c_mu)
};

CellIntegrals cell_integrals(const Kernel& k) {
  const int d = k.dim();
  const auto bw = k.poly().bandwidth();
  int m = quadrature_cells(d);
  for (int mu = 0; mu < d; ++mu)
    while (m <= 2 * bw[mu]) m *= 2;
  CellIntegrals ci;
  ci.grid.assign(d, m);
  ci.h = kTwoPi / m;
  const double h = ci.h;
  std::size_t total = 1;
  for (int mu = 0; mu < d; ++mu) total *= m;

  auto build = [&](int moment_axis) {
    std::vector<cplx> data(total, 0.0);
    for (const auto& [kk, a] : k.poly().coeffs()) {
      cplx w = a;
      double shift = 0.0;
      for (int mu = 0; mu < d; ++mu) {
        if (mu == moment_axis)
          w *= first_moment_factor(kk[mu], h / 2);
        else
          w *= sinc(kk[mu] * h / 2) / m;
        shift += kk[mu] * (-kPi + h / 2);
      }
      w *= cplx(std::cos(shift), std::sin(shift));
      data[wrap_index(kk, ci.grid)] += w;
    }
    fft_inplace(data, ci.grid, +1);
    std::vector<double> out(total);
    for (std::size_t j = 0; j < total; ++j) out[j] = data[j].real();
    return out;
  };
  ci.i0 = build(-1);
  for (int mu = 0; mu < d; ++mu) ci.i1.push_back(build(mu));
  return ci;
}

std::array<double, 3> cell_center(std::size_t j, const CellIntegrals& ci) {
  const int d = static_cast<int>(ci.grid.size());
  std::array<double, 3> c{0.0, 0.0, 0.0};
  for (int mu = d - 1; mu >= 0; --mu) {
    const int m = ci.grid[mu];
    c[mu] = -kPi + (static_cast<double>(j % m) + 0.5) * ci.h;
    j /= m;
  }
  return c;
}

// Distance from the origin to the cell and to its farthest point.
std::pair<double, double> cell_radii(const std::array<double, 3>& c, double half, int d) {
  double lo = 0.0, hi = 0.0;
  for (int mu = 0; mu < d; ++mu) {
    const double a = std::abs(c[mu]);
    const double near = std::max(0.0, a - half);
    lo += near * near;
    hi += (a + half) * (a + half);
  }
  return {std::sqrt(lo), std::sqrt(hi)};
}

// Direct integrals over an arbitrary box (center c, half-width b) by summing the
// coefficient series; used to refine cells near the origin.
void direct_box_integrals(const Kernel& k, const std::array<double, 3>& c, double b, double& i0,
                          std::array<double, 3>& i1) {
  const int d = k.dim();
  cplx s0 = 0.0;
  std::array<cplx, 3> s1{0.0, 0.0, 0.0};
  for (const auto& [kk, a] : k.poly().coeffs()) {
    double ph = 0.0;
    std::array<double, 3> sn{1.0, 1.0, 1.0};
    std::array<cplx, 3> mf{0.0, 0.0, 0.0};
    for (int mu = 0; mu < d; ++mu) {
      ph += kk[mu] * c[mu];
      sn[mu] = sinc(kk[mu] * b) * b / kPi;
      mf[mu] = first_moment_factor(kk[mu], b);
    }
    const cplx e = a * cplx(std::cos(ph), std::sin(ph));
    cplx p0 = e;
    for (int mu = 0; mu < d; ++mu) p0 *= sn[mu];
    s0 += p0;
    for (int mu = 0; mu < d; ++mu) {
      cplx p = e * mf[mu];
      for (int nu = 0; nu < d; ++nu)
        if (nu != mu) p *= sn[nu];
      s1[mu] += p;
    }
  }
  i0 = s0.real();
  for (int mu = 0; mu < 3; ++mu) i1[mu] = s1[mu].real();
}

// Moment contribution and error bound of one box. rho is linear on boxes that avoid
// the origin in d = 1; otherwise the Taylor remainder uses |Hess rho| <= 1/rho_min.
void box_moment(int d, const std::array<double, 3>& c, double half, double i0,
                const std::array<double, 3>& i1, double& value, double& err) {
  double rho = 0.0;
  for (int mu = 0; mu < d; ++mu) rho += c[mu] * c[mu];
  rho = std::sqrt(rho);
  value = rho * i0;
  for (int mu = 0; mu < d; ++mu) value += c[mu] / rho * i1[mu];
  const double mass = std::abs(i0);
  const auto [rmin, rmax] = cell_radii(c, half, d);
  (void)rmax;
  const double r = half * std::sqrt(double(d));
  if (d == 1)
    err = 0.0;
  else if (rmin <= 0.0)
    err = 2.0 * r * mass;
  else
    err = r * r / (2.0 * rmin) * mass;
}

}  // namespace

MomentResult kernel_first_moment(const Kernel& k) {
  const int d = k.dim();
  const CellIntegrals ci = cell_integrals(k);
  const double half = ci.h / 2;
  const std::size_t total = ci.i0.size();
  const int refine = d == 2 ? 8 : 4;
  const double refine_radius = (d == 2 ? 4.0 : 2.0) * ci.h;

  double value = 0.0, err = 0.0, negative = 0.0;
  for (std::size_t j = 0; j < total; ++j) {
    const auto c = cell_center(j, ci);
    const auto [rmin, rmax] = cell_radii(c, half, d);
    (void)rmax;
    if (d >= 2 && rmin < refine_radius) {
      // Subdivide and integrate the sub-boxes directly.
      const double sh = half / refine;
      int subs = 1;
      for (int mu = 0; mu < d; ++mu) subs *= refine;
      for (int s = 0; s < subs; ++s) {
        std::array<double, 3> sc = c;
        int r = s;
        for (int mu = 0; mu < d; ++mu) {
          sc[mu] = c[mu] - half + (2 * (r % refine) + 1) * sh;
          r /= refine;
        }
        double i0;
        std::array<double, 3> i1;
        direct_box_integrals(k, sc, sh, i0, i1);
        double v, e;
        box_moment(d, sc, sh, i0, i1, v, e);
        value += v;
        err += e;
        if (i0 < 0) negative += -i0;
      }
      continue;
    }
    std::array<double, 3> i1{0.0, 0.0, 0.0};
    for (int mu = 0; mu < d; ++mu) i1[mu] = ci.i1[mu][j];
    double v, e;
    box_moment(d, c, half, ci.i0[j], i1, v, e);
    value += v;
    err += e;
    if (ci.i0[j] < 0) negative += -ci.i0[j];
  }
  // Floating point allowance for the transforms and sums.
  const double rounding = 1e-13 * (1.0 + static_cast<double>(total) * 1e-3) + 4.0 * negative;
  return {value, value + err + rounding};
}

KernelReport kernel_checks(const Kernel& k, double delta, int window_radius) {
  if (!(delta > 0.0 && delta < kPi)) throw std::invalid_argument("kernel_checks: delta must lie in (0, pi)");
  const int d = k.dim();
  KernelReport rep;
  rep.coeff_at_zero = k.hat({0, 0, 0}).real();

  const auto bw = k.poly().bandwidth();
  std::vector<int> grid(d);
  for (int mu = 0; mu < d; ++mu) grid[mu] = fft_good_size(std::max(8 * bw[mu], 16));
  const auto vals = eval_grid(k.poly(), grid);
  rep.min_grid_value = vals.empty() ? 0.0 : vals[0].real();
  for (const auto& v : vals) rep.min_grid_value = std::min(rep.min_grid_value, v.real());

  LatticePoint m{0, 0, 0};
  std::function<void(int)> walk = [&](int mu) {
    if (mu == d) {
      rep.window.emplace_back(m, k.hat(m).real());
      return;
    }
    for (int v = -window_radius; v <= window_radius; ++v) {
      m[mu] = v;
      walk(mu + 1);
    }
    m[mu] = 0;
  };
  walk(0);

  const CellIntegrals ci = cell_integrals(k);
  const double half = ci.h / 2;
  for (std::size_t j = 0; j < ci.i0.size(); ++j) {
    const auto c = cell_center(j, ci);
    const auto [rmin, rmax] = cell_radii(c, half, d);
    double rho = 0.0;
    for (int mu = 0; mu < d; ++mu) rho += c[mu] * c[mu];
    rho = std::sqrt(rho);
    if (rmin >= delta) {
      rep.outside_mass += ci.i0[j];
    } else if (rmax > delta) {
      if (rho >= delta) rep.outside_mass += ci.i0[j];
      rep.outside_mass_error += std::abs(ci.i0[j]);
    }
  }
  return rep;
}

}  // namespace ucpgh
