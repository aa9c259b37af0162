#include "ucpgh/triple.hpp"

#include <algorithm>
#include <limits>

#include "ucpgh/fft.hpp"

namespace ucpgh {

SpectralTriple SpectralTriple::toeplitz(IndexSetPtr s) {
  if (!s) throw std::invalid_argument("SpectralTriple: null index set");
  SpectralTriple t;
  t.kind_ = Kind::toeplitz;
  t.dim_ = s->dim();
  t.set_ = std::move(s);
  t.modes_ = t.set_->differences();
  for (const auto& m : t.modes_) t.band_ = std::max(t.band_, norm_inf(m));
  return t;
}

SpectralTriple SpectralTriple::function(int dim, int band, int grid_factor) {
  if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("SpectralTriple: dimension must be 1..3");
  if (band < 0) throw std::invalid_argument("SpectralTriple: negative bandwidth");
  if (grid_factor == 0) grid_factor = dim == 1 ? 8 : 16;
  if (grid_factor < 3) throw std::invalid_argument("SpectralTriple: grid factor must be >= 3");
  SpectralTriple t;
  t.kind_ = Kind::function;
  t.dim_ = dim;
  t.band_ = band;
  t.grid_ = std::max(grid_factor * band, 16);
  LatticePoint k{0, 0, 0};
  const int b1 = dim > 1 ? band : 0, b2 = dim > 2 ? band : 0;
  for (k[0] = -band; k[0] <= band; ++k[0])
    for (k[1] = -b1; k[1] <= b1; ++k[1])
      for (k[2] = -b2; k[2] <= b2; ++k[2]) t.modes_.push_back(k);
  return t;
}

SpectralTriple SpectralTriple::continuum(int dim, int band, int grid_factor) {
  auto t = function(dim, band, grid_factor);
  t.continuum_ = true;
  return t;
}

Operand SpectralTriple::basis(const LatticePoint& k) const {
  if (kind_ == Kind::toeplitz) {
    if (!set_->contains_difference(k)) throw std::invalid_argument("basis: mode outside the difference set");
    return ToeplitzOperator(set_, {{k, 1.0}});
  }
  if (norm_inf(k) > band_) throw std::invalid_argument("basis: mode outside the band");
  return TrigPoly::monomial(dim_, k);
}

Operand SpectralTriple::element(const ParamMap& pm, const Eigen::VectorXd& x) const {
  auto coeffs = pm.coefficients(x);
  for (auto it = coeffs.begin(); it != coeffs.end();) it = it->second == cplx(0.0) ? coeffs.erase(it) : std::next(it);
  if (kind_ == Kind::toeplitz) return ToeplitzOperator(set_, ToeplitzOperator::Symbol(coeffs.begin(), coeffs.end()));
  return TrigPoly(dim_, TrigPoly::CoeffMap(coeffs.begin(), coeffs.end()));
}

bool SpectralTriple::contains(const Operand& x) const {
  if (kind_ == Kind::toeplitz) {
    const auto* t = std::get_if<ToeplitzOperator>(&x);
    return t && t->index_set().same_points(*set_);
  }
  const auto* f = std::get_if<TrigPoly>(&x);
  return f && f->dim() == dim_ && f->max_bandwidth() <= band_;
}

double SpectralTriple::norm(const Operand& x) const {
  if (!contains(x)) throw std::invalid_argument("norm: operand outside the system");
  if (kind_ == Kind::toeplitz) return operator_norm(std::get<ToeplitzOperator>(x).matrix());
  return sup_norm(std::get<TrigPoly>(x)).upper;
}

double SpectralTriple::lipschitz(const Operand& x) const {
  if (!contains(x)) throw std::invalid_argument("lipschitz: operand outside the system");
  if (kind_ == Kind::toeplitz) return toeplitz_lipschitz(DiracTruncation(set_), std::get<ToeplitzOperator>(x));
  return lipschitz_seminorm_fn(std::get<TrigPoly>(x)).upper;
}

int default_full_band(const Variant& v) {
  switch (v.kind) {
    case Variant::Kind::fejer_riesz:
    case Variant::Kind::toeplitz_circle:
      return 4 * v.level;
    case Variant::Kind::torus_spherical:
    case Variant::Kind::torus_polyhedral:
      return 2 * v.level;
    case Variant::Kind::identity:
      return 0;
  }
  return 0;
}

TriplePair make_triples(const TruncationPair& pair, int full_band) {
  const Variant& v = pair.variant();
  if (v.kind == Variant::Kind::identity) {
    auto t = SpectralTriple::toeplitz(pair.index_set());
    return {t, t};
  }
  const int band = full_band > 0 ? full_band : default_full_band(v);
  if (band < pair.truncated_bandwidth())
    throw std::invalid_argument("make_triples: function-side band is below the truncated bandwidth");
  SpectralTriple trunc = v.kind == Variant::Kind::fejer_riesz ? SpectralTriple::function(1, v.level - 1)
                                                              : SpectralTriple::toeplitz(pair.index_set());
  return {trunc, SpectralTriple::continuum(v.dim, band)};
}

// ---------------------------------------------------------------- maximization

namespace {

using Point = std::array<double, 3>;

// Evaluates a trigonometric polynomial and its gradient at arbitrary points.
class PointEvaluator {
 public:
  PointEvaluator(const std::map<LatticePoint, cplx>& coeffs, int dim) : dim_(dim) {
    for (const auto& [k, v] : coeffs) {
      band_ = std::max(band_, norm_inf(k));
      k_.push_back(k);
      a_.push_back(v);
    }
    for (auto& e : exps_) e.assign(2 * band_ + 1, 1.0);
  }

  // f(y) and grad f(y) (gradient only when requested).
  void eval(const Point& y, cplx& f, std::array<cplx, 3>& grad, bool want_grad) {
    for (int mu = 0; mu < dim_; ++mu) {
      auto& e = exps_[mu];
      const cplx step = std::polar(1.0, y[mu]);
      for (int j = 1; j <= band_; ++j) {
        e[band_ + j] = e[band_ + j - 1] * step;
        e[band_ - j] = std::conj(e[band_ + j]);
      }
    }
    f = 0.0;
    grad = {0.0, 0.0, 0.0};
    for (std::size_t i = 0; i < k_.size(); ++i) {
      const auto& k = k_[i];
      const cplx term = a_[i] * exps_[0][band_ + k[0]] * exps_[1][band_ + k[1]] * exps_[2][band_ + k[2]];
      f += term;
      if (want_grad)
        for (int mu = 0; mu < dim_; ++mu) grad[mu] += cplx(0.0, k[mu]) * term;
    }
  }

  double measure(const Point& y, bool gradient) {
    cplx f;
    std::array<cplx, 3> g;
    eval(y, f, g, gradient);
    if (!gradient) return std::norm(f);
    double s = 0.0;
    for (int mu = 0; mu < dim_; ++mu) s += std::norm(g[mu]);
    return s;
  }

 private:
  int dim_;
  int band_ = 0;
  std::vector<LatticePoint> k_;
  std::vector<cplx> a_;
  std::array<std::vector<cplx>, 3> exps_;
};

struct Violations {
  std::vector<Point> points;
  double peak = 0.0;  // largest refined value, a lower bound on the sup
};

// Points where |f| > 1 (or |grad f| > 1), located by grid search and local refinement.
Violations find_violations(const std::map<LatticePoint, cplx>& coeffs, int dim, int grid, bool gradient) {
  const int m = 2 * grid;
  std::vector<int> ext(dim, m);
  std::size_t total = 1;
  for (int mu = 0; mu < dim; ++mu) total *= static_cast<std::size_t>(m);
  std::vector<double> h(total, 0.0);
  const int comps = gradient ? dim : 1;
  std::vector<cplx> buf;
  for (int c = 0; c < comps; ++c) {
    buf.assign(total, 0.0);
    for (const auto& [k, v] : coeffs) {
      std::size_t idx = 0;
      for (int mu = 0; mu < dim; ++mu) idx = idx * m + static_cast<std::size_t>(((k[mu] % m) + m) % m);
      buf[idx] += gradient ? cplx(0.0, k[c]) * v : v;
    }
    fft_inplace(buf, ext, +1);
    for (std::size_t g = 0; g < total; ++g) h[g] += std::norm(buf[g]);
  }

  // Grid local maxima above the candidate threshold.
  std::vector<std::pair<double, std::size_t>> cand;
  std::array<int, 3> idx{0, 0, 0};
  for (std::size_t g = 0; g < total; ++g) {
    std::size_t r = g;
    for (int mu = dim - 1; mu >= 0; --mu) idx[mu] = static_cast<int>(r % m), r /= m;
    if (h[g] < 0.81) continue;
    bool is_max = true;
    for (int mu = 0; mu < dim && is_max; ++mu)
      for (int s : {-1, 1}) {
        auto j = idx;
        j[mu] = (j[mu] + s + m) % m;
        std::size_t q = 0;
        for (int nu = 0; nu < dim; ++nu) q = q * m + j[nu];
        if (h[q] > h[g]) {
          is_max = false;
          break;
        }
      }
    if (is_max) cand.emplace_back(h[g], g);
  }
  std::sort(cand.begin(), cand.end(), std::greater<>());
  if (cand.size() > 400) cand.resize(400);

  PointEvaluator ev(coeffs, dim);
  const double spacing = kTwoPi / m;
  Violations out;
  for (const auto& [v0, g] : cand) {
    std::size_t r = g;
    Point y{0.0, 0.0, 0.0};
    for (int mu = dim - 1; mu >= 0; --mu) y[mu] = spacing * static_cast<double>(r % m), r /= m;
    double best = ev.measure(y, gradient);
    for (double step = spacing / 2; step > 1e-8; step /= 2) {
      bool moved = true;
      while (moved) {
        moved = false;
        for (int mu = 0; mu < dim; ++mu)
          for (int s : {-1, 1}) {
            Point z = y;
            z[mu] += s * step;
            const double v = ev.measure(z, gradient);
            if (v > best) {
              best = v;
              y = z;
              moved = true;
            }
          }
      }
    }
    out.peak = std::max(out.peak, best);
    if (best > 1.0) out.points.push_back(y);
  }
  return out;
}

// Rows of the value (1 x p) or gradient (dim x p) constraint at y.
Eigen::MatrixXd point_rows(const ParamMap& pm, const Point& y, bool gradient) {
  const int dim = pm.dim;
  const int rows = gradient ? dim : 1;
  const int comps = pm.self_adjoint ? 1 : 2;
  Eigen::MatrixXd r(rows * comps, pm.size());
  for (int i = 0; i < pm.size(); ++i) {
    std::array<cplx, 3> acc{0.0, 0.0, 0.0};
    for (const auto& [k, a] : pm.terms[i]) {
      double phase = 0.0;
      for (int mu = 0; mu < dim; ++mu) phase += k[mu] * y[mu];
      const cplx e = a * std::polar(1.0, phase);
      if (gradient)
        for (int mu = 0; mu < dim; ++mu) acc[mu] += cplx(0.0, k[mu]) * e;
      else
        acc[0] += e;
    }
    for (int q = 0; q < rows; ++q) {
      r(q * comps, i) = acc[q].real();
      if (comps == 2) r(q * comps + 1, i) = acc[q].imag();
    }
  }
  return r;
}

// Dense Hermitian LMI matrices for the complex (dilated) Toeplitz constraints.
std::vector<Eigen::MatrixXcd> dilated_toeplitz(const SpectralTriple& t, const ParamMap& pm, bool commutator) {
  const auto& s = t.index_set();
  const auto gam = gamma_matrices(s->dim());
  const int sp = commutator ? static_cast<int>(gam[0].rows()) : 1;
  const int n = s->size(), q = n * sp;
  const auto& pts = s->points();
  std::vector<Eigen::MatrixXcd> out;
  for (const auto& terms : pm.terms) {
    Eigen::MatrixXcd b = Eigen::MatrixXcd::Zero(q, q);
    for (const auto& [k, a] : terms)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          if (pts[i] - pts[j] != k) continue;
          if (commutator)
            b.block(i * sp, j * sp, sp, sp) += a * clifford_symbol(gam, k);
          else
            b(i, j) += a;
        }
    Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(2 * q, 2 * q);
    d.topRightCorner(q, q) = b;
    d.bottomLeftCorner(q, q) = b.adjoint();
    out.push_back(std::move(d));
  }
  return out;
}

std::vector<Eigen::MatrixXd> grid_rows(const SpectralTriple& t, const ParamMap& pm, bool gradient) {
  std::vector<Eigen::MatrixXd> rows;
  const int m = t.grid();
  const int dim = t.dim();
  std::size_t total = 1;
  for (int mu = 0; mu < dim; ++mu) total *= static_cast<std::size_t>(m);
  for (std::size_t g = 0; g < total; ++g) {
    Point y{0.0, 0.0, 0.0};
    std::size_t r = g;
    for (int mu = dim - 1; mu >= 0; --mu) y[mu] = kTwoPi * static_cast<double>(r % m) / m, r /= m;
    rows.push_back(point_rows(pm, y, gradient));
  }
  return rows;
}

}  // namespace

LinearMaximum maximize_over_unit_ball(const SpectralTriple& triple, const ParamMap& pm, const Eigen::VectorXd& c,
                                      const MaximizeOptions& opt) {
  if (c.size() != pm.size()) throw std::invalid_argument("maximize_over_unit_ball: objective size mismatch");
  BarrierOptions bo;
  bo.max_iter = opt.max_iter;
  LinearMaximum out;

  if (triple.kind() == SpectralTriple::Kind::toeplitz) {
    std::vector<BarrierBlockPtr> blocks;
    if (pm.self_adjoint) {
      blocks.push_back(make_toeplitz_norm_block(triple.index_set(), pm));
      blocks.push_back(make_toeplitz_commutator_block(triple.index_set(), pm));
    } else {
      blocks.push_back(make_dense_lmi_block(dilated_toeplitz(triple, pm, false)));
      blocks.push_back(make_dense_lmi_block(dilated_toeplitz(triple, pm, true)));
    }
    std::vector<BarrierBlock*> raw;
    for (auto& b : blocks) raw.push_back(b.get());
    bo.tol = opt.tol;
    const auto r = maximize_linear(c, raw, bo);
    out.x = r.x;
    out.value = r.value;
    out.upper = r.value + r.gap;
    out.newton_steps = r.newton_steps;
    return out;
  }

  // Function side: grid constraints, exchange points, certified rescaling.
  bo.tol = opt.tol / 4;
  bo.mu = 2.0;  // many nearly active grid constraints; long Newton stalls with larger steps
  const bool has_gradient = triple.band() > 0;
  std::vector<BarrierBlockPtr> fixed;
  if (pm.self_adjoint) {
    fixed.push_back(make_grid_value_block(pm, triple.grid()));
    if (has_gradient) fixed.push_back(make_grid_gradient_block(pm, triple.grid()));
  } else {
    fixed.push_back(make_dense_rows_block(grid_rows(triple, pm, false)));
    if (has_gradient) fixed.push_back(make_dense_rows_block(grid_rows(triple, pm, true)));
  }
  std::vector<Eigen::MatrixXd> extra;
  std::array<std::vector<Point>, 2> extra_points;  // value, gradient
  double best_gap = std::numeric_limits<double>::infinity();
  double best_value = 0.0;
  for (int round = 0; round <= opt.exchange_rounds; ++round) {
    std::vector<BarrierBlockPtr> extra_blocks;
    std::vector<BarrierBlock*> raw;
    for (auto& b : fixed) raw.push_back(b.get());
    if (!extra.empty()) extra_blocks.push_back(make_dense_rows_block(extra));
    for (int gradient : {0, 1})
      if (!extra_points[gradient].empty())
        extra_blocks.push_back(make_points_block(pm, extra_points[gradient], gradient == 1));
    for (auto& b : extra_blocks) raw.push_back(b.get());
    const auto r = maximize_linear(c, raw, bo);
    out.newton_steps += r.newton_steps;
    out.exchange_rounds = round;

    const auto coeffs = pm.coefficients(r.x);
    const double upper = r.value + r.gap;
    std::array<Violations, 2> viol;
    double peak = 1.0;
    for (int gradient : {0, 1}) {
      if (gradient && !has_gradient) continue;
      viol[gradient] = find_violations(coeffs, triple.dim(), triple.grid(), gradient == 1);
      peak = std::max(peak, viol[gradient].peak);
    }
    std::size_t added = 0;
    for (int gradient : {0, 1}) added += viol[gradient].points.size();
    // Certification is expensive; skip it while the located overshoot alone exceeds the target.
    if (upper - r.value / peak <= opt.tol || added == 0 || round == opt.exchange_rounds) {
      const TrigPoly f(triple.dim(), TrigPoly::CoeffMap(coeffs.begin(), coeffs.end()));
      const double cert_tol = 0.1 * opt.tol;
      const double sup_u = sup_norm(f, cert_tol).upper;
      const double lip_u = has_gradient ? lipschitz_seminorm_fn(f, cert_tol).upper : 0.0;
      const double theta = 1.0 / std::max({1.0, sup_u, lip_u});
      const double value = theta * r.value;
      if (upper - value < best_gap) {
        best_gap = upper - value;
        best_value = value;
        out.x = theta * r.x;
        out.value = value;
        out.upper = upper;
      }
      if (upper - value <= opt.tol) return out;
    }
    for (int gradient : {0, 1})
      for (const auto& y : viol[gradient].points) {
        if (pm.self_adjoint)
          extra_points[gradient].push_back(y);
        else
          extra.push_back(point_rows(pm, y, gradient == 1));
      }
    if (added == 0) break;
  }
  throw SolverError("maximize_over_unit_ball: certified gap above tolerance", best_value, best_gap);
}

}  // namespace ucpgh
