#include "ucpgh/ucpmetric.hpp"

#include <functional>
#include <limits>

#include "ucpgh/linalg.hpp"

namespace ucpgh {

bool accepts(const SystemRef& sys, const SpectralTriple& t) {
  if (sys.toeplitz != (t.kind() == SpectralTriple::Kind::toeplitz)) return false;
  if (sys.toeplitz) return sys.set && sys.set->same_points(*t.index_set());
  return sys.dim == t.dim() && (sys.max_band < 0 || t.band() <= sys.max_band);
}

namespace {

int spinor_dim_for(int d) { return static_cast<int>(gamma_matrices(d)[0].rows()); }

// PSD to 1e-10 via a shifted Cholesky factorization.
bool is_psd(const Eigen::MatrixXcd& a) {
  const Eigen::MatrixXcd h = 0.5 * (a + a.adjoint()) + 1e-10 * Eigen::MatrixXcd::Identity(a.rows(), a.cols());
  return Eigen::LLT<Eigen::MatrixXcd>(h).info() == Eigen::Success;
}

double wrap_angle(double x) {
  x = std::fmod(x, kTwoPi);
  return x < 0 ? x + kTwoPi : x;
}

double torus_distance(const std::array<double, 3>& a, const std::array<double, 3>& b, int dim) {
  double s = 0.0;
  for (int mu = 0; mu < dim; ++mu) {
    const double d = std::fabs(wrap_angle(a[mu] - b[mu]));
    const double g = std::min(d, kTwoPi - d);
    s += g * g;
  }
  return std::sqrt(s);
}

}  // namespace

// ---------------------------------------------------------------- Choi maps

ChoiUcp::ChoiUcp(IndexSetPtr set, Eigen::MatrixXcd choi, int m) : set_(std::move(set)), choi_(std::move(choi)), m_(m) {
  if (!set_) throw std::invalid_argument("ChoiUcp: null index set");
  if (m_ < 1) throw std::invalid_argument("ChoiUcp: target dimension must be positive");
  s_ = spinor_dim_for(set_->dim());
  q_ = set_->size() * s_;
  if (choi_.rows() != q_ * m_ || choi_.cols() != q_ * m_) throw std::invalid_argument("ChoiUcp: Choi matrix size");
  if (!all_finite(choi_)) throw std::invalid_argument("ChoiUcp: non-finite entries");
  Eigen::MatrixXcd unit = Eigen::MatrixXcd::Zero(m_, m_);
  for (int i = 0; i < q_; ++i) unit += choi_.block(i * m_, i * m_, m_, m_);
  if ((unit - Eigen::MatrixXcd::Identity(m_, m_)).cwiseAbs().maxCoeff() > 1e-10)
    throw std::invalid_argument("ChoiUcp: block trace is not the identity");
  if (!is_psd(choi_)) throw std::invalid_argument("ChoiUcp: Choi matrix is not positive semidefinite");
}

ChoiUcp ChoiUcp::from_isometry(IndexSetPtr set, const Eigen::MatrixXcd& v, int r) {
  if (!set) throw std::invalid_argument("ChoiUcp: null index set");
  if (r < 1) throw std::invalid_argument("ChoiUcp: dilation rank must be positive");
  const int q = set->size() * spinor_dim_for(set->dim());
  const int m = static_cast<int>(v.cols());
  if (v.rows() != q * r) throw std::invalid_argument("ChoiUcp: isometry row count");
  if ((v.adjoint() * v - Eigen::MatrixXcd::Identity(m, m)).cwiseAbs().maxCoeff() > 1e-10)
    throw std::invalid_argument("ChoiUcp: columns are not orthonormal");
  // U_{(i,a), rho} = conj V_{(i,rho), a}; C = U U^*.
  Eigen::MatrixXcd u(q * m, r);
  for (int i = 0; i < q; ++i)
    for (int a = 0; a < m; ++a)
      for (int rho = 0; rho < r; ++rho) u(i * m + a, rho) = std::conj(v(i * r + rho, a));
  return ChoiUcp(std::move(set), u * u.adjoint(), m);
}

ChoiUcp ChoiUcp::identity(IndexSetPtr set) {
  if (!set) throw std::invalid_argument("ChoiUcp: null index set");
  const int q = set->size() * spinor_dim_for(set->dim());
  return from_isometry(std::move(set), Eigen::MatrixXcd::Identity(q, q), 1);
}

Eigen::MatrixXcd ChoiUcp::eval(const Operand& x) const {
  const auto* t = std::get_if<ToeplitzOperator>(&x);
  if (!t || !t->index_set().same_points(*set_)) throw std::invalid_argument("ChoiUcp::eval: operand outside the domain");
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(m_, m_);
  const auto& pts = set_->points();
  for (const auto& [k, tk] : t->symbols()) {
    if (tk == cplx(0.0)) continue;
    for (int i = 0; i < set_->size(); ++i) {
      const int j = set_->position(pts[i] - k);
      if (j < 0) continue;
      for (int a = 0; a < s_; ++a) out += tk * choi_.block((i * s_ + a) * m_, (j * s_ + a) * m_, m_, m_);
    }
  }
  return out;
}

// ---------------------------------------------------------------- atomic maps

AtomicUcp::AtomicUcp(int dim, std::vector<Atom> atoms) : dim_(dim), atoms_(std::move(atoms)) {
  if (dim_ < 1 || dim_ > kMaxDim) throw std::invalid_argument("AtomicUcp: dimension must be 1..3");
  if (atoms_.empty()) throw std::invalid_argument("AtomicUcp: no atoms");
  m_ = static_cast<int>(atoms_[0].a.rows());
  if (m_ < 1) throw std::invalid_argument("AtomicUcp: empty weight matrix");
  Eigen::MatrixXcd sum = Eigen::MatrixXcd::Zero(m_, m_);
  for (auto& at : atoms_) {
    if (at.a.rows() != m_ || at.a.cols() != m_) throw std::invalid_argument("AtomicUcp: weight size mismatch");
    if (!all_finite(at.a) || !is_psd(at.a)) throw std::invalid_argument("AtomicUcp: weight is not positive semidefinite");
    for (int mu = 0; mu < kMaxDim; ++mu) at.x[mu] = mu < dim_ ? wrap_angle(at.x[mu]) : 0.0;
    sum += at.a;
  }
  if ((sum - Eigen::MatrixXcd::Identity(m_, m_)).cwiseAbs().maxCoeff() > 1e-10)
    throw std::invalid_argument("AtomicUcp: weights do not sum to the identity");
}

AtomicUcp AtomicUcp::restricted(int band) const {
  if (band < 0) throw std::invalid_argument("AtomicUcp::restricted: negative bandwidth");
  AtomicUcp out = *this;
  out.band_ = band;
  return out;
}

Eigen::MatrixXcd AtomicUcp::eval(const Operand& x) const {
  const auto* f = std::get_if<TrigPoly>(&x);
  if (!f || f->dim() != dim_) throw std::invalid_argument("AtomicUcp::eval: operand outside the domain");
  if (band_ >= 0 && f->max_bandwidth() > band_) throw std::invalid_argument("AtomicUcp::eval: bandwidth too large");
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(m_, m_);
  for (const auto& at : atoms_) out += ucpgh::eval(*f, std::span<const double>(at.x.data(), dim_)) * at.a;
  return out;
}

// ---------------------------------------------------------------- pullbacks

namespace {

SystemRef truncated_system(const TruncationPair& p) {
  if (p.truncated_is_toeplitz()) return {true, p.dim(), p.index_set(), -1};
  return {false, 1, nullptr, p.variant().level - 1};
}

SystemRef full_system(const TruncationPair& p) {
  if (p.full_is_toeplitz()) return {true, p.dim(), p.index_set(), -1};
  return {false, p.dim(), nullptr, -1};
}

}  // namespace

PullbackUcp::PullbackUcp(UcpMapPtr base, TruncationPairPtr pair, Pullback dir)
    : base_(std::move(base)), pair_(std::move(pair)), dir_(dir) {
  if (!base_ || !pair_) throw std::invalid_argument("PullbackUcp: null argument");
  const SystemRef want = dir_ == Pullback::R ? truncated_system(*pair_) : full_system(*pair_);
  const SystemRef have = base_->system();
  bool ok = have.toeplitz == want.toeplitz && have.dim == want.dim;
  if (ok && want.toeplitz) ok = have.set && have.set->same_points(*want.set);
  // Function-side bases must accept everything the truncation map can produce.
  if (ok && !want.toeplitz && have.max_band >= 0) ok = want.max_band >= 0 && have.max_band >= want.max_band;
  if (!ok) throw std::invalid_argument("PullbackUcp: base map lives on the wrong system");
}

SystemRef PullbackUcp::system() const {
  return dir_ == Pullback::R ? full_system(*pair_) : truncated_system(*pair_);
}

Eigen::MatrixXcd PullbackUcp::eval(const Operand& x) const {
  return base_->eval(dir_ == Pullback::R ? pair_->compress(x) : pair_->symbolize(x));
}

// ---------------------------------------------------------------- samplers

ChoiUcp sample_choi_ucp(const IndexSetPtr& set, int m, int r, std::uint64_t seed) {
  if (!set) throw std::invalid_argument("sample_choi_ucp: null index set");
  if (r < 1) throw std::invalid_argument("sample_choi_ucp: dilation rank must be positive");
  if (m < 1) throw std::invalid_argument("sample_choi_ucp: target dimension must be positive");
  const int q = set->size() * spinor_dim_for(set->dim());
  if (m > q * r) throw std::invalid_argument("sample_choi_ucp: no isometry C^m -> C^q (x) C^r");
  Rng rng(seed);
  const Eigen::MatrixXcd g = rng.cnormal_matrix(q * r, m);
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(g);
  Eigen::MatrixXcd v = qr.householderQ() * Eigen::MatrixXcd::Identity(q * r, m);
  const Eigen::MatrixXcd rr = qr.matrixQR();
  for (int a = 0; a < m; ++a) {
    const cplx d = rr(a, a);
    if (std::abs(d) > 0) v.col(a) *= d / std::abs(d);
  }
  return ChoiUcp::from_isometry(set, v, r);
}

AtomicUcp sample_atomic_ucp(int dim, int m, int atoms, std::uint64_t seed) {
  if (atoms < 1) throw std::invalid_argument("sample_atomic_ucp: need at least one atom");
  if (m < 1) throw std::invalid_argument("sample_atomic_ucp: target dimension must be positive");
  if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("sample_atomic_ucp: dimension must be 1..3");
  Rng rng(seed);
  for (int attempt = 0; attempt < 10; ++attempt) {
    std::vector<AtomicUcp::Atom> out(atoms);
    Eigen::MatrixXcd sigma = Eigen::MatrixXcd::Zero(m, m);
    for (auto& at : out) {
      for (int mu = 0; mu < dim; ++mu) at.x[mu] = rng.uniform(0.0, kTwoPi);
      const Eigen::MatrixXcd g = rng.cnormal_matrix(m, m);
      at.a = g * g.adjoint();
      sigma += at.a;
    }
    if (min_eigenvalue(sigma) <= 1e-12) continue;
    const Eigen::MatrixXcd s = inverse_sqrt_psd(sigma);
    for (auto& at : out) {
      const Eigen::MatrixXcd a = s * at.a * s;
      at.a = 0.5 * (a + a.adjoint());
    }
    if (atoms == 1) out[0].a = Eigen::MatrixXcd::Identity(m, m);
    return AtomicUcp(dim, std::move(out));
  }
  throw std::runtime_error("sample_atomic_ucp: normalizer singular after 10 draws");
}

// ---------------------------------------------------------------- configuration

namespace {

constexpr int kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};

double radical_inverse(long long i, int base) {
  double f = 1.0, r = 0.0;
  while (i > 0) {
    f /= base;
    r += f * static_cast<double>(i % base);
    i /= base;
  }
  return r;
}

}  // namespace

void MetricConfig::validate() const {
  if (m < 1 || 2 * m > static_cast<int>(std::size(kPrimes)))
    throw std::invalid_argument("MetricConfig: m must be in 1..8");
  if (P < 1 || P > 8) throw std::invalid_argument("MetricConfig: P must be in 1..8");
  if (!(tol_obj > 0) || !(tail_tol > 0) || !(oracle_step > 0))
    throw std::invalid_argument("MetricConfig: tolerances must be positive");
  if (tail_bound() > tail_tol) throw std::invalid_argument("MetricConfig: tail bound 2^(1-P) exceeds tail_tol");
  if (max_iter < 1) throw std::invalid_argument("MetricConfig: max_iter must be positive");
}

std::vector<Eigen::VectorXcd> MetricConfig::vectors() const {
  std::vector<Eigen::VectorXcd> out;
  for (long long i = 1; static_cast<int>(out.size()) < P; ++i) {
    Eigen::VectorXd u(2 * m);
    for (int j = 0; j < 2 * m; ++j) u[j] = 2.0 * radical_inverse(i, kPrimes[j]) - 1.0;
    if (u.squaredNorm() > 1.0) continue;
    Eigen::VectorXcd k(m);
    for (int j = 0; j < m; ++j) k[j] = cplx(u[2 * j], u[2 * j + 1]);
    out.push_back(std::move(k));
  }
  return out;
}

double MetricConfig::weight() const {
  double w = 0.0;
  const auto k = vectors();
  for (int p = 0; p < P; ++p) w += std::ldexp(1.0, -(p + 1)) * k[p].squaredNorm();
  return w;
}

// ---------------------------------------------------------------- distance

namespace {

// Linear maximizer over a symmetric convex set: returns the point and a certified
// upper bound on max c.x.
using LinearSolve = std::function<std::pair<Eigen::VectorXd, double>(const Eigen::VectorXd&)>;

struct Functionals {
  Eigen::MatrixXcd z;  // P x params: <(phi - psi)(b_i) k_p, k_p>
  Eigen::VectorXd w;   // 2^{-p}
};

Functionals build_functionals(const std::vector<Eigen::MatrixXcd>& delta, const MetricConfig& cfg) {
  const auto kp = cfg.vectors();
  Functionals f;
  f.z.resize(cfg.P, static_cast<Eigen::Index>(delta.size()));
  f.w.resize(cfg.P);
  for (int p = 0; p < cfg.P; ++p) {
    f.w[p] = std::ldexp(1.0, -(p + 1));
    for (std::size_t i = 0; i < delta.size(); ++i) f.z(p, i) = kp[p].dot(delta[i] * kp[p]);
  }
  return f;
}

// Flip the global sign so the first significant entry is positive; the optimum is
// invariant and swapping the two maps then yields bitwise identical work.
void canonicalize(Eigen::MatrixXcd& z) {
  const double scale = z.cwiseAbs().maxCoeff();
  for (Eigen::Index p = 0; p < z.rows(); ++p)
    for (Eigen::Index i = 0; i < z.cols(); ++i) {
      const cplx v = z(p, i);
      const double lead = v.real() != 0.0 ? v.real() : v.imag();
      if (std::abs(v) > 1e-12 * scale) {
        if (lead < 0) z = -z;
        return;
      }
    }
}

double objective(const Functionals& f, const Eigen::VectorXd& x) {
  const Eigen::VectorXcd zx = f.z * x.cast<cplx>();
  double s = 0.0;
  for (Eigen::Index p = 0; p < f.z.rows(); ++p) s += f.w[p] * std::abs(zx[p]);
  return s;
}

// max_x sum_p w_p |z_p . x| over a set invariant under x -> -x.
DistanceResult optimize(Functionals f, bool self_adjoint, int m, double tol, const LinearSolve& solve) {
  DistanceResult out;
  if (f.z.size() == 0 || f.z.cwiseAbs().maxCoeff() == 0.0) return out;
  if (self_adjoint) f.z = f.z.real().cast<cplx>();
  canonicalize(f.z);
  const int P = static_cast<int>(f.z.rows());
  // With m = 1 every k_p is a scalar, so all functionals are positive multiples of one.
  const int signs = m == 1 ? 1 : 1 << (P - 1);
  double best = 0.0, upper = 0.0;
  for (int s = 0; s < signs; ++s) {
    Eigen::VectorXd phase(P);
    for (int p = 0; p < P; ++p) phase[p] = p > 0 && ((s >> (p - 1)) & 1) ? kPi : 0.0;
    // Complex functionals with several k_p: alternate between the linear problem and
    // the phases it induces; each step is certified only for its own phases.
    const int rounds = self_adjoint || m == 1 ? 1 : 30;
    double prev = -1.0;
    for (int it = 0; it < rounds; ++it) {
      Eigen::VectorXd c = Eigen::VectorXd::Zero(f.z.cols());
      for (int p = 0; p < P; ++p) c += f.w[p] * (std::polar(1.0, -phase[p]) * f.z.row(p)).real().transpose();
      const auto [x, up] = solve(c);
      ++out.solves;
      const double val = objective(f, x);
      best = std::max(best, val);
      upper = std::max(upper, up);
      if (val <= prev + tol / 10) break;
      prev = val;
      const Eigen::VectorXcd zx = f.z * x.cast<cplx>();
      for (int p = 0; p < P; ++p)
        if (std::abs(zx[p]) > 0) phase[p] = std::arg(zx[p]);
    }
  }
  out.value = best;
  out.gap = std::max(0.0, upper - best);
  out.certified = self_adjoint || m == 1;
  return out;
}

void check_maps(const UcpMap& phi, const UcpMap& psi, const MetricConfig& cfg, const SpectralTriple& triple) {
  cfg.validate();
  if (phi.target_dim() != psi.target_dim() || phi.target_dim() != cfg.m)
    throw std::invalid_argument("distance: target dimensions differ");
  if (!accepts(phi.system(), triple) || !accepts(psi.system(), triple))
    throw std::invalid_argument("distance: maps are not defined on the given system");
}

// Differences of the two maps on each parameter's element.
std::vector<Eigen::MatrixXcd> parameter_deltas(const UcpMap& phi, const UcpMap& psi, const SpectralTriple& triple,
                                               const ParamMap& pm) {
  std::map<LatticePoint, Eigen::MatrixXcd> modes;
  for (const auto& terms : pm.terms)
    for (const auto& [k, a] : terms)
      if (!modes.count(k)) {
        const Operand b = triple.basis(k);
        modes.emplace(k, phi.eval(b) - psi.eval(b));
      }
  std::vector<Eigen::MatrixXcd> out;
  for (const auto& terms : pm.terms) {
    Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(phi.target_dim(), phi.target_dim());
    for (const auto& [k, a] : terms) d += a * modes.at(k);
    out.push_back(std::move(d));
  }
  return out;
}

// Both maps atomic on C(T^d): the supremum only sees f at the atoms, and any values
// with |f_j| <= 1 and |f_j - f_l| <= dist(x_j, x_l) extend to a feasible function.
DistanceResult atomic_distance(const AtomicUcp& a, const AtomicUcp& b, const MetricConfig& cfg) {
  const int dim = a.dim();
  if (b.dim() != dim) throw std::invalid_argument("distance: atomic maps on different tori");
  std::vector<std::array<double, 3>> pts;
  std::vector<Eigen::MatrixXcd> delta;
  auto add = [&](const AtomicUcp::Atom& at, double sign) {
    for (std::size_t j = 0; j < pts.size(); ++j)
      if (torus_distance(pts[j], at.x, dim) < 1e-12) {
        delta[j] += sign * at.a;
        return;
      }
    pts.push_back(at.x);
    delta.push_back(sign * at.a);
  };
  for (const auto& at : a.atoms()) add(at, 1.0);
  for (const auto& at : b.atoms()) add(at, -1.0);

  const int n = static_cast<int>(pts.size());
  const bool sa = cfg.self_adjoint_only;
  const int comps = sa ? 1 : 2;
  std::vector<Eigen::MatrixXd> rows;
  for (int j = 0; j < n; ++j) {
    Eigen::MatrixXd r = Eigen::MatrixXd::Zero(comps, n * comps);
    for (int c = 0; c < comps; ++c) r(c, j * comps + c) = 1.0;
    rows.push_back(r);
    for (int l = j + 1; l < n; ++l) {
      const double d = torus_distance(pts[j], pts[l], dim);
      Eigen::MatrixXd q = Eigen::MatrixXd::Zero(comps, n * comps);
      for (int c = 0; c < comps; ++c) {
        q(c, j * comps + c) = 1.0 / d;
        q(c, l * comps + c) = -1.0 / d;
      }
      rows.push_back(q);
    }
  }
  // Real parameters: f_j, or (Re f_j, Im f_j).
  std::vector<Eigen::MatrixXcd> pd;
  for (int j = 0; j < n; ++j) {
    pd.push_back(delta[j]);
    if (!sa) pd.push_back(cplx(0.0, 1.0) * delta[j]);
  }
  auto block = make_dense_rows_block(rows);
  BarrierOptions bo;
  bo.tol = std::min(cfg.tol_obj / 2, 1e-7);
  bo.max_iter = cfg.max_iter;
  const LinearSolve solve = [&](const Eigen::VectorXd& c) {
    const auto r = maximize_linear(c, {block.get()}, bo);
    return std::pair{r.x, r.value + r.gap};
  };
  auto out = optimize(build_functionals(pd, cfg), sa, cfg.m, cfg.tol_obj, solve);
  out.exact = true;
  return out;
}

}  // namespace

DistanceResult distance(const UcpMap& phi, const UcpMap& psi, const MetricConfig& cfg, const SpectralTriple& triple) {
  check_maps(phi, psi, cfg, triple);
  DistanceResult out;
  try {
    const auto* a = phi.as_atomic();
    const auto* b = psi.as_atomic();
    if (triple.is_continuum() && a && b) {
      out = atomic_distance(*a, *b, cfg);
    } else {
      const ParamMap pm = triple.params(cfg.self_adjoint_only);
      MaximizeOptions mo;
      mo.tol = cfg.tol_obj / 2;
      mo.max_iter = cfg.max_iter;
      const LinearSolve solve = [&](const Eigen::VectorXd& c) {
        const auto r = maximize_over_unit_ball(triple, pm, c, mo);
        return std::pair{r.x, r.upper};
      };
      out = optimize(build_functionals(parameter_deltas(phi, psi, triple, pm), cfg), cfg.self_adjoint_only, cfg.m,
                     cfg.tol_obj, solve);
    }
  } catch (const SolverError& e) {
    throw SolverError(std::string("distance: ") + e.what(), e.best_value(), e.gap());
  }
  out.tail_bound = cfg.tail_bound();
  return out;
}

// ---------------------------------------------------------------- oracle

namespace {

class Feasibility {
 public:
  Feasibility(const SpectralTriple& t, const ParamMap& pm) {
    const int k = pm.size();
    if (t.kind() == SpectralTriple::Kind::toeplitz) {
      const DiracTruncation dirac(t.index_set());
      for (int i = 0; i < k; ++i) {
        const auto op = std::get<ToeplitzOperator>(t.element(pm, Eigen::VectorXd::Unit(k, i)));
        norm_.push_back(op.matrix());
        lip_.push_back(cplx(0.0, 1.0) * commutator(dirac, op));
      }
      return;
    }
    if (t.dim() > 2) throw std::invalid_argument("distance_oracle: function systems of dimension <= 2 only");
    dim_ = t.dim();
    const int grid = std::max(256, 64 * t.band());
    // Between grid points a degree-B polynomial exceeds its grid maximum by at most
    // the factor 1 / (1 - (pi B / M)^2 / 2) (Bernstein on the second derivative).
    const double r = kPi * t.band() / grid;
    inflate_ = 1.0 / (1.0 - 0.5 * r * r);
    const int points = dim_ == 1 ? grid : grid * grid;
    values_.resize(points, k);
    for (int mu = 0; mu < dim_; ++mu) grads_[mu].resize(points, k);
    for (int i = 0; i < k; ++i) {
      const auto f = std::get<TrigPoly>(t.element(pm, Eigen::VectorXd::Unit(k, i)));
      std::array<TrigPoly, 2> g{TrigPoly(dim_), TrigPoly(dim_)};
      for (int mu = 0; mu < dim_; ++mu) g[mu] = f.derivative(mu);
      for (int q = 0; q < points; ++q) {
        const std::array<double, 2> y{kTwoPi * (q / (dim_ == 1 ? 1 : grid)) / grid, kTwoPi * (q % grid) / grid};
        const std::span<const double> ys(y.data(), dim_);
        values_(q, i) = ucpgh::eval(f, ys).real();
        for (int mu = 0; mu < dim_; ++mu) grads_[mu](q, i) = ucpgh::eval(g[mu], ys).real();
      }
    }
  }

  // max(||f||, ||f||_1), conservatively rounded up on function systems.
  double operator()(const Eigen::VectorXd& x) const {
    if (!norm_.empty()) {
      Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(norm_[0].rows(), norm_[0].cols());
      Eigen::MatrixXcd b = Eigen::MatrixXcd::Zero(lip_[0].rows(), lip_[0].cols());
      for (Eigen::Index i = 0; i < x.size(); ++i) {
        a += x[i] * norm_[i];
        b += x[i] * lip_[i];
      }
      return std::max(spectral_radius_hermitian(a), spectral_radius_hermitian(b));
    }
    const double v = (values_ * x).cwiseAbs().maxCoeff();
    Eigen::VectorXd g2 = (grads_[0] * x).cwiseAbs2();
    if (dim_ > 1) g2 += (grads_[1] * x).cwiseAbs2();
    return std::max(v, std::sqrt(g2.maxCoeff())) * inflate_;
  }

 private:
  std::vector<Eigen::MatrixXcd> norm_, lip_;
  int dim_ = 1;
  Eigen::MatrixXd values_;
  std::array<Eigen::MatrixXd, 2> grads_;
  double inflate_ = 1.0;
};

struct LineSearch {
  const Feasibility& feas;
  const Functionals& f;
  double step;

  // Best objective over feasible grid points x_last = j * step, |j| <= jmax, on the
  // line through x. The feasible set is convex and the objective convex, so the
  // feasible grid points form a range whose end points carry the maximum.
  double operator()(Eigen::VectorXd x, int jmax) const {
    const Eigen::Index last = x.size() - 1;
    auto g = [&](double v) {
      x[last] = v;
      return feas(x);
    };
    double lo = -jmax * step, hi = jmax * step;
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = lo, b = hi;
    double c = b - gr * (b - a), d = a + gr * (b - a);
    double gc = g(c), gd = g(d);
    while (b - a > step / 4) {
      if (gc < gd) {
        b = d, d = c, gd = gc;
        c = b - gr * (b - a), gc = g(c);
      } else {
        a = c, c = d, gc = gd;
        d = a + gr * (b - a), gd = g(d);
      }
    }
    // Closest grid point to the minimizer region.
    int j0 = static_cast<int>(std::lround(0.5 * (a + b) / step));
    j0 = std::clamp(j0, -jmax, jmax);
    if (g(j0 * step) > 1.0) {
      bool found = false;
      for (int dj : {-1, 1})
        if (std::abs(j0 + dj) <= jmax && g((j0 + dj) * step) <= 1.0) {
          j0 += dj;
          found = true;
          break;
        }
      if (!found) return -1.0;
    }
    // Extreme feasible grid indices by bisection on the index.
    auto extreme = [&](int dir) {
      int in = j0, out = dir > 0 ? jmax + 1 : -jmax - 1;
      while (std::abs(out - in) > 1) {
        const int mid = in + (out - in) / 2;
        if (g(mid * step) <= 1.0)
          in = mid;
        else
          out = mid;
      }
      return in;
    };
    double best = -1.0;
    for (int dir : {-1, 1}) {
      x[last] = extreme(dir) * step;
      best = std::max(best, objective(f, x));
    }
    return best;
  }
};

}  // namespace

double distance_oracle(const UcpMap& phi, const UcpMap& psi, const MetricConfig& cfg, const SpectralTriple& triple,
                       double step) {
  check_maps(phi, psi, cfg, triple);
  if (!cfg.self_adjoint_only) throw std::invalid_argument("distance_oracle: self-adjoint parameterization only");
  const ParamMap pm = triple.params(true);
  const int k = pm.size();
  if (k > 6) throw std::invalid_argument("distance_oracle: feasible dimension too large");
  const double h = step > 0 ? step : cfg.oracle_step;
  Functionals f = build_functionals(parameter_deltas(phi, psi, triple, pm), cfg);
  f.z = f.z.real().cast<cplx>();
  const Feasibility feas(triple, pm);
  const LineSearch line{feas, f, h};

  // Per-parameter box: |t_m| <= min(1, 1 / |m|_2).
  std::vector<int> jmax(k);
  for (int i = 0; i < k; ++i) {
    const double r = norm2(pm.terms[i].front().first);
    jmax[i] = static_cast<int>(std::floor(std::min(1.0, r > 0 ? 1.0 / r : 1.0) / h + 1e-9));
  }

  auto scan = [&](const Eigen::VectorXd& center, std::vector<int> lo, std::vector<int> hi, double s) {
    // Grid over all parameters but the last, around center in units of s.
    double best = -1.0;
    Eigen::VectorXd x = center;
    std::vector<int> j = lo;
    const int free = k - 1;
    while (true) {
      for (int i = 0; i < free; ++i) x[i] = center[i] + j[i] * s;
      bool inside = true;
      for (int i = 0; i < free; ++i) inside = inside && std::abs(x[i]) <= jmax[i] * h + 1e-12;
      if (inside) best = std::max(best, line(x, jmax[k - 1]));
      int i = 0;
      for (; i < free; ++i) {
        if (++j[i] <= hi[i]) break;
        j[i] = lo[i];
      }
      if (i == free) break;
    }
    return best;
  };

  if (k <= 3) {
    std::vector<int> lo(k - 1), hi(k - 1);
    for (int i = 0; i + 1 < k; ++i) lo[i] = -jmax[i], hi[i] = jmax[i];
    return std::max(0.0, scan(Eigen::VectorXd::Zero(k), lo, hi, h));
  }

  // Four to six parameters: coarse grid over the box, then successive halving of the
  // grid step in a window around the incumbent down to the oracle step.
  int factor = 1;
  while (true) {
    double lines = 1.0;
    for (int i = 0; i + 1 < k; ++i) lines *= 2.0 * (jmax[i] / factor) + 1.0;
    if (lines <= 2e4) break;
    factor *= 2;
  }
  double best = -1.0;
  Eigen::VectorXd arg = Eigen::VectorXd::Zero(k);
  {
    // Coarse pass recording the incumbent line.
    std::vector<int> j(k - 1);
    for (int i = 0; i + 1 < k; ++i) j[i] = -(jmax[i] / factor);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(k);
    while (true) {
      for (int i = 0; i + 1 < k; ++i) x[i] = j[i] * factor * h;
      const double v = line(x, jmax[k - 1]);
      if (v > best) best = v, arg = x;
      int i = 0;
      for (; i + 1 < k; ++i) {
        if (++j[i] <= jmax[i] / factor) break;
        j[i] = -(jmax[i] / factor);
      }
      if (i + 1 == k) break;
    }
  }
  for (int fct = factor; fct >= 1; fct /= 2) {
    const double s = fct * h;
    std::vector<int> lo(k - 1, -2), hi(k - 1, 2);
    Eigen::VectorXd x = arg;
    std::vector<int> j = lo;
    while (true) {
      for (int i = 0; i + 1 < k; ++i) x[i] = arg[i] + j[i] * s;
      bool inside = true;
      for (int i = 0; i + 1 < k; ++i) inside = inside && std::abs(x[i]) <= jmax[i] * h + 1e-12;
      if (inside) {
        const double v = line(x, jmax[k - 1]);
        if (v > best) best = v, arg = x;
      }
      int i = 0;
      for (; i + 1 < k; ++i) {
        if (++j[i] <= hi[i]) break;
        j[i] = lo[i];
      }
      if (i + 1 == k) break;
    }
  }
  return std::max(0.0, best);
}

}  // namespace ucpgh
