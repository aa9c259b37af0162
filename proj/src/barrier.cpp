#include "ucpgh/barrier.hpp"

#include <limits>

#include "ucpgh/fft.hpp"

namespace ucpgh {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double real_trace_product(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  // Re tr(a b)
  return (a.array() * b.transpose().array()).real().sum();
}

// Index of lattice point k in a row-major grid with extent m per axis, modulo m.
std::size_t wrap_index(const LatticePoint& k, int dim, int m) {
  std::size_t idx = 0;
  for (int mu = 0; mu < dim; ++mu) idx = idx * m + static_cast<std::size_t>(((k[mu] % m) + m) % m);
  return idx;
}

// Gradient and Hessian of sum_y phi(u(y)) for u_c(y) = (d_c) f(y), given the transforms
// W(q) = sum_y w(y) e^{i q.y} of the first-order weights w1_c and second-order weights
// w2_{c,cc} (upper triangle), looked up through index(q).
template <class Index>
void assemble_trig(const ParamMap& pm, bool gradient, const std::vector<std::vector<cplx>>& w1,
                   const std::vector<std::vector<cplx>>& w2, Index index, Eigen::VectorXd& grad,
                   Eigen::MatrixXd& hess) {
  const int comps = static_cast<int>(w1.size());
  // Mode factor of component c for e_k: 1 for values, i k_c for derivatives.
  auto factor = [&](int c, const LatticePoint& k) { return gradient ? cplx(0.0, k[c]) : cplx(1.0); };
  const int p = pm.size();
  for (int i = 0; i < p; ++i) {
    cplx s = 0.0;
    for (const auto& [k, a] : pm.terms[i]) {
      const std::size_t idx = index(k);
      for (int c = 0; c < comps; ++c) s += a * factor(c, k) * w1[c][idx];
    }
    grad[i] += s.real();
  }
  for (int i = 0; i < p; ++i)
    for (int j = i; j < p; ++j) {
      cplx s = 0.0;
      for (const auto& [k, a] : pm.terms[i])
        for (const auto& [kk, aa] : pm.terms[j]) {
          const std::size_t idx = index(k + kk);
          for (int c = 0; c < comps; ++c)
            for (int cc = 0; cc < comps; ++cc) {
              const auto& w = c <= cc ? w2[c * comps + cc] : w2[cc * comps + c];
              s += a * aa * factor(c, k) * factor(cc, kk) * w[idx];
            }
        }
      hess(i, j) += s.real();
      if (j != i) hess(j, i) += s.real();
    }
}

// Barrier weights of -log(1 - |u|^2): w1_c = 2 u_c / s, w2_{c,cc} = 2 delta / s + 4 u_c u_cc / s^2.
void trig_weights(const std::vector<std::vector<double>>& u, const std::vector<double>& sq,
                  std::vector<std::vector<cplx>>& w1, std::vector<std::vector<cplx>>& w2) {
  const int comps = static_cast<int>(u.size());
  const std::size_t total = sq.size();
  w1.assign(comps, std::vector<cplx>(total));
  w2.assign(comps * comps, {});
  for (int c = 0; c < comps; ++c)
    for (int cc = c; cc < comps; ++cc) w2[c * comps + cc].assign(total, 0.0);
  for (std::size_t g = 0; g < total; ++g) {
    const double inv = 1.0 / (1.0 - sq[g]);
    for (int c = 0; c < comps; ++c) {
      const double uc = u[c][g];
      w1[c][g] = 2.0 * uc * inv;
      for (int cc = c; cc < comps; ++cc)
        w2[c * comps + cc][g] = (c == cc ? 2.0 * inv : 0.0) + 4.0 * uc * u[cc][g] * inv * inv;
    }
  }
}

}  // namespace

// ---------------------------------------------------------------- ParamMap

ParamMap ParamMap::build(int dim, const std::vector<LatticePoint>& modes, bool self_adjoint) {
  ParamMap pm;
  pm.dim = dim;
  pm.self_adjoint = self_adjoint;
  std::vector<LatticePoint> sorted = modes;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  const cplx I(0.0, 1.0);
  if (self_adjoint) {
    for (const auto& m : sorted)
      if (!is_zero(m) && !std::binary_search(sorted.begin(), sorted.end(), LatticePoint(-m)))
        throw std::invalid_argument("ParamMap: mode set is not symmetric");
    if (std::binary_search(sorted.begin(), sorted.end(), LatticePoint{0, 0, 0}))
      pm.terms.push_back({{LatticePoint{0, 0, 0}, 1.0}});
    for (const auto& m : sorted) {
      if (!is_positive(m)) continue;
      pm.terms.push_back({{m, 1.0}, {-m, 1.0}});
      pm.terms.push_back({{m, I}, {-m, -I}});
    }
  } else {
    for (const auto& m : sorted) {
      pm.terms.push_back({{m, 1.0}});
      pm.terms.push_back({{m, I}});
    }
  }
  return pm;
}

std::map<LatticePoint, cplx> ParamMap::coefficients(const Eigen::VectorXd& x) const {
  if (x.size() != size()) throw std::invalid_argument("ParamMap: parameter size mismatch");
  std::map<LatticePoint, cplx> c;
  for (int i = 0; i < size(); ++i)
    for (const auto& [k, a] : terms[i]) c[k] += x[i] * a;
  return c;
}

// ---------------------------------------------------------------- Toeplitz LMI

namespace {

class ToeplitzLmiBlock : public BarrierBlock {
 public:
  ToeplitzLmiBlock(IndexSetPtr s, const ParamMap& pm, std::vector<Eigen::MatrixXcd> gammas, bool commutator)
      : set_(std::move(s)), pm_(pm), gammas_(std::move(gammas)), commutator_(commutator) {
    if (!pm_.self_adjoint) throw std::invalid_argument("toeplitz block: self-adjoint parameterization required");
    dim_ = set_->dim();
    n_ = set_->size();
    spin_ = static_cast<int>(gammas_[0].rows());
    if (spin_ > 4) throw std::invalid_argument("toeplitz block: spinor dimension above 4");
    for (const auto& g : gammas_) small_gammas_.push_back(g);
    const auto& pts = set_->points();
    for (const auto& m : set_->differences()) mode_index_.emplace(m, static_cast<int>(modes_.size())), modes_.push_back(m);
    for (const auto& t : pm_.terms)
      for (const auto& [k, a] : t)
        if (!mode_index_.count(k)) throw std::invalid_argument("toeplitz block: parameter mode outside the difference set");
    g_.reserve(modes_.size());
    for (const auto& m : modes_) g_.push_back(spinor_factor(m));
    pair_mode_.resize(static_cast<std::size_t>(n_) * n_);
    for (int a = 0; a < n_; ++a)
      for (int b = 0; b < n_; ++b) pair_mode_[static_cast<std::size_t>(a) * n_ + b] = mode_index_.at(pts[a] - pts[b]);

    // Correlation grid over S x S.
    lo_ = pts[0];
    LatticePoint hi = pts[0];
    for (const auto& p : pts)
      for (int mu = 0; mu < dim_; ++mu) lo_[mu] = std::min(lo_[mu], p[mu]), hi[mu] = std::max(hi[mu], p[mu]);
    ext_.assign(2 * dim_, 0);
    total_ = 1;
    for (int mu = 0; mu < dim_; ++mu) {
      const int l = fft_smooth_size(2 * (hi[mu] - lo_[mu] + 1) - 1);
      ext_[mu] = ext_[mu + dim_] = l;
      total_ *= static_cast<std::size_t>(l) * l;
    }
    if (total_ > (std::size_t(1) << 26)) throw std::invalid_argument("toeplitz block: index set too large");
  }

  double nu() const override { return 2.0 * n_ * spin_; }

  double value(const Eigen::VectorXd& x) override {
    factor(x);
    if (!feasible_) return kInf;
    double v = 0.0;
    for (const auto* l : {&lm_, &lp_}) v -= 2.0 * l->matrixLLT().diagonal().real().array().log().sum();
    return v;
  }

  void add_derivatives(const Eigen::VectorXd& x, Eigen::VectorXd& grad, Eigen::MatrixXd& hess) override {
    factor(x);
    if (!feasible_) throw std::logic_error("toeplitz block: derivatives requested outside the domain");
    const int q = n_ * spin_;
    const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(q, q);
    const Eigen::MatrixXcd wm = lm_.solve(id), wp = lp_.solve(id);

    // Gradient: tau(k) = tr((W- - W+) B_k) with B_k = E_k (x) G_k.
    std::vector<cplx> tau(modes_.size(), 0.0);
    const auto& pts = set_->points();
    for (int a = 0; a < n_; ++a)
      for (int b = 0; b < n_; ++b) {
        const int k = pair_mode_[static_cast<std::size_t>(b) * n_ + a];  // mode b - a
        const Eigen::MatrixXcd blk = wm.block(a * spin_, b * spin_, spin_, spin_) - wp.block(a * spin_, b * spin_, spin_, spin_);
        tau[k] += (blk * g_[k]).trace();
      }
    (void)pts;
    for (int i = 0; i < pm_.size(); ++i) {
      cplx s = 0.0;
      for (const auto& [k, c] : pm_.terms[i]) s += c * tau[mode_index_.at(k)];
      grad[i] += s.real();
    }

    // Hessian: tr(W B_k W B_k') summed over W in {W-, W+}, via correlations over S x S.
    const int r_count = static_cast<int>(gammas_.size());
    std::vector<std::vector<cplx>> z(static_cast<std::size_t>(r_count) * r_count, std::vector<cplx>(total_, 0.0));
    std::vector<std::vector<cplx>> ph(static_cast<std::size_t>(spin_) * spin_);
    for (const auto* w : {&wm, &wp}) {
      for (int al = 0; al < spin_; ++al)
        for (int be = 0; be < spin_; ++be) {
          auto& arr = ph[al * spin_ + be];
          arr.assign(total_, 0.0);
          for (int a = 0; a < n_; ++a)
            for (int b = 0; b < n_; ++b) arr[pair_offset(pts[a], pts[b])] = (*w)(a * spin_ + al, b * spin_ + be);
          fft_inplace(arr, ext_, -1);
        }
      Small m(spin_, spin_), left(spin_, spin_);
      for (std::size_t xi = 0; xi < total_; ++xi) {
        for (int al = 0; al < spin_; ++al)
          for (int be = 0; be < spin_; ++be) m(al, be) = ph[al * spin_ + be][xi];
        for (int r = 0; r < r_count; ++r) {
          left.noalias() = m * small_gammas_[r] * m.adjoint();
          for (int rr = 0; rr < r_count; ++rr)
            z[r * r_count + rr][xi] += left.cwiseProduct(small_gammas_[rr].transpose()).sum();
        }
      }
    }
    for (auto& arr : z) fft_inplace(arr, ext_, -1);
    const double norm = 1.0 / static_cast<double>(total_);

    auto gamma_kk = [&](const LatticePoint& k, const LatticePoint& kk) {
      // shift s = (k', -k)
      std::size_t idx = 0;
      for (int mu = 0; mu < dim_; ++mu) idx = idx * ext_[mu] + static_cast<std::size_t>(((kk[mu] % ext_[mu]) + ext_[mu]) % ext_[mu]);
      for (int mu = 0; mu < dim_; ++mu) {
        const int l = ext_[dim_ + mu];
        idx = idx * l + static_cast<std::size_t>(((-k[mu] % l) + l) % l);
      }
      cplx s = 0.0;
      for (int r = 0; r < r_count; ++r)
        for (int rr = 0; rr < r_count; ++rr) s += coef(r, k) * coef(rr, kk) * z[r * r_count + rr][idx];
      return s * norm;
    };
    const int p = pm_.size();
    for (int i = 0; i < p; ++i)
      for (int j = i; j < p; ++j) {
        cplx s = 0.0;
        for (const auto& [k, a] : pm_.terms[i])
          for (const auto& [kk, aa] : pm_.terms[j]) s += a * aa * gamma_kk(k, kk);
        hess(i, j) += s.real();
        if (j != i) hess(j, i) += s.real();
      }
  }

 private:
  // Spinor blocks are at most 4 x 4; fixed capacity keeps the per-frequency loop off the heap.
  using Small = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, 0, 4, 4>;

  cplx coef(int r, const LatticePoint& m) const { return commutator_ ? cplx(0.0, m[r]) : cplx(1.0); }

  Eigen::MatrixXcd spinor_factor(const LatticePoint& m) const {
    Eigen::MatrixXcd g = Eigen::MatrixXcd::Zero(gammas_[0].rows(), gammas_[0].cols());
    for (std::size_t r = 0; r < gammas_.size(); ++r) g += coef(static_cast<int>(r), m) * gammas_[r];
    return g;
  }

  std::size_t pair_offset(const LatticePoint& a, const LatticePoint& b) const {
    std::size_t idx = 0;
    for (int mu = 0; mu < dim_; ++mu) idx = idx * ext_[mu] + (a[mu] - lo_[mu]);
    for (int mu = 0; mu < dim_; ++mu) idx = idx * ext_[dim_ + mu] + (b[mu] - lo_[mu]);
    return idx;
  }

  void factor(const Eigen::VectorXd& x) {
    if (has_cache_ && x.size() == cached_x_.size() && x == cached_x_) return;
    const auto coeffs = pm_.coefficients(x);
    std::vector<cplx> t(modes_.size(), 0.0);
    for (const auto& [k, v] : coeffs) t[mode_index_.at(k)] = v;
    const int q = n_ * spin_;
    Eigen::MatrixXcd a(q, q);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) {
        const int k = pair_mode_[static_cast<std::size_t>(i) * n_ + j];
        a.block(i * spin_, j * spin_, spin_, spin_) = t[k] * g_[k];
      }
    const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(q, q);
    lm_.compute(id - a);
    lp_.compute(id + a);
    feasible_ = lm_.info() == Eigen::Success && lp_.info() == Eigen::Success &&
                (lm_.matrixLLT().diagonal().real().array() > 0).all() &&
                (lp_.matrixLLT().diagonal().real().array() > 0).all();
    cached_x_ = x;
    has_cache_ = true;
  }

  IndexSetPtr set_;
  ParamMap pm_;
  std::vector<Eigen::MatrixXcd> gammas_;
  std::vector<Small> small_gammas_;
  bool commutator_;
  int dim_ = 1, n_ = 0, spin_ = 1;
  std::vector<LatticePoint> modes_;
  std::map<LatticePoint, int> mode_index_;
  std::vector<Eigen::MatrixXcd> g_;
  std::vector<int> pair_mode_;
  LatticePoint lo_{0, 0, 0};
  std::vector<int> ext_;
  std::size_t total_ = 1;

  bool has_cache_ = false;
  bool feasible_ = false;
  Eigen::VectorXd cached_x_;
  Eigen::LLT<Eigen::MatrixXcd> lm_, lp_;
};

}  // namespace

BarrierBlockPtr make_toeplitz_norm_block(const IndexSetPtr& s, const ParamMap& pm) {
  return std::make_unique<ToeplitzLmiBlock>(s, pm, std::vector<Eigen::MatrixXcd>{Eigen::MatrixXcd::Identity(1, 1)},
                                            false);
}

BarrierBlockPtr make_toeplitz_commutator_block(const IndexSetPtr& s, const ParamMap& pm) {
  return std::make_unique<ToeplitzLmiBlock>(s, pm, gamma_matrices(s->dim()), true);
}

// ---------------------------------------------------------------- dense LMI

namespace {

class DenseLmiBlock : public BarrierBlock {
 public:
  explicit DenseLmiBlock(std::vector<Eigen::MatrixXcd> a) : a_(std::move(a)) {
    if (a_.empty()) throw std::invalid_argument("dense lmi: no matrices");
    q_ = static_cast<int>(a_[0].rows());
  }
  double nu() const override { return 2.0 * q_; }

  double value(const Eigen::VectorXd& x) override {
    factor(x);
    if (!feasible_) return kInf;
    double v = 0.0;
    for (const auto* l : {&lm_, &lp_}) v -= 2.0 * l->matrixLLT().diagonal().real().array().log().sum();
    return v;
  }

  void add_derivatives(const Eigen::VectorXd& x, Eigen::VectorXd& grad, Eigen::MatrixXd& hess) override {
    factor(x);
    if (!feasible_) throw std::logic_error("dense lmi: derivatives requested outside the domain");
    const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(q_, q_);
    const Eigen::MatrixXcd wm = lm_.solve(id), wp = lp_.solve(id);
    const int p = static_cast<int>(a_.size());
    std::vector<Eigen::MatrixXcd> bm(p), bp(p);
    for (int i = 0; i < p; ++i) {
      bm[i] = wm * a_[i];
      bp[i] = wp * a_[i];
      grad[i] += bm[i].trace().real() - bp[i].trace().real();
    }
    for (int i = 0; i < p; ++i)
      for (int j = i; j < p; ++j) {
        const double h = real_trace_product(bm[i], bm[j]) + real_trace_product(bp[i], bp[j]);
        hess(i, j) += h;
        if (j != i) hess(j, i) += h;
      }
  }

 private:
  void factor(const Eigen::VectorXd& x) {
    if (has_cache_ && x == cached_x_) return;
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(q_, q_);
    for (std::size_t i = 0; i < a_.size(); ++i) a += x[static_cast<Eigen::Index>(i)] * a_[i];
    const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(q_, q_);
    lm_.compute(id - a);
    lp_.compute(id + a);
    feasible_ = lm_.info() == Eigen::Success && lp_.info() == Eigen::Success &&
                (lm_.matrixLLT().diagonal().real().array() > 0).all() &&
                (lp_.matrixLLT().diagonal().real().array() > 0).all();
    cached_x_ = x;
    has_cache_ = true;
  }

  std::vector<Eigen::MatrixXcd> a_;
  int q_ = 0;
  bool has_cache_ = false, feasible_ = false;
  Eigen::VectorXd cached_x_;
  Eigen::LLT<Eigen::MatrixXcd> lm_, lp_;
};

}  // namespace

BarrierBlockPtr make_dense_lmi_block(std::vector<Eigen::MatrixXcd> a) {
  return std::make_unique<DenseLmiBlock>(std::move(a));
}

// ---------------------------------------------------------------- grid rows

namespace {

class GridBlock : public BarrierBlock {
 public:
  GridBlock(const ParamMap& pm, int grid, bool gradient) : pm_(pm), m_(grid), gradient_(gradient) {
    if (!pm_.self_adjoint) throw std::invalid_argument("grid block: self-adjoint parameterization required");
    dim_ = pm_.dim;
    ext_.assign(dim_, m_);
    total_ = 1;
    for (int mu = 0; mu < dim_; ++mu) total_ *= static_cast<std::size_t>(m_);
    int band = 0;
    for (const auto& t : pm_.terms)
      for (const auto& [k, a] : t) band = std::max(band, norm_inf(k));
    if (m_ <= 2 * band) throw std::invalid_argument("grid block: grid too coarse for the bandwidth");
  }

  double nu() const override { return 2.0 * static_cast<double>(total_); }

  double value(const Eigen::VectorXd& x) override {
    evaluate(x);
    double v = 0.0;
    for (std::size_t g = 0; g < total_; ++g) {
      const double s = sq_[g];
      if (!(s < 1.0)) return kInf;
      v -= std::log1p(-s);
    }
    return v;
  }

  void add_derivatives(const Eigen::VectorXd& x, Eigen::VectorXd& grad, Eigen::MatrixXd& hess) override {
    evaluate(x);
    std::vector<std::vector<cplx>> w1, w2;
    trig_weights(u_, sq_, w1, w2);
    for (auto& w : w1) fft_inplace(w, ext_, +1);
    for (auto& w : w2)
      if (!w.empty()) fft_inplace(w, ext_, +1);

    assemble_trig(pm_, gradient_, w1, w2, [&](const LatticePoint& q) { return wrap_index(q, dim_, m_); }, grad, hess);
  }

 private:
  void evaluate(const Eigen::VectorXd& x) {
    if (has_cache_ && x == cached_x_) return;
    const auto coeffs = pm_.coefficients(x);
    const int comps = gradient_ ? dim_ : 1;
    u_.assign(comps, std::vector<double>(total_, 0.0));
    sq_.assign(total_, 0.0);
    std::vector<cplx> buf;
    for (int c = 0; c < comps; ++c) {
      buf.assign(total_, 0.0);
      for (const auto& [k, v] : coeffs) buf[wrap_index(k, dim_, m_)] += gradient_ ? cplx(0.0, k[c]) * v : v;
      fft_inplace(buf, ext_, +1);
      for (std::size_t g = 0; g < total_; ++g) {
        u_[c][g] = buf[g].real();
        sq_[g] += buf[g].real() * buf[g].real();
      }
    }
    cached_x_ = x;
    has_cache_ = true;
  }

  ParamMap pm_;
  int m_;
  bool gradient_;
  int dim_ = 1;
  std::vector<int> ext_;
  std::size_t total_ = 1;
  bool has_cache_ = false;
  Eigen::VectorXd cached_x_;
  std::vector<std::vector<double>> u_;
  std::vector<double> sq_;
};

// Same constraints as GridBlock at arbitrary points; the weight transforms are direct
// sums over the points with per-axis exponential tables.
class PointsBlock : public BarrierBlock {
 public:
  PointsBlock(const ParamMap& pm, const std::vector<std::array<double, 3>>& points, bool gradient)
      : pm_(pm), gradient_(gradient), dim_(pm.dim), count_(points.size()) {
    if (!pm_.self_adjoint) throw std::invalid_argument("points block: self-adjoint parameterization required");
    for (const auto& t : pm_.terms)
      for (const auto& [k, a] : t) band_ = std::max(band_, norm_inf(k));
    span_ = 4 * band_ + 1;
    q_total_ = 1;
    for (int mu = 0; mu < dim_; ++mu) q_total_ *= static_cast<std::size_t>(span_);
    tables_.resize(count_ * dim_, std::vector<cplx>(span_));
    for (std::size_t g = 0; g < count_; ++g)
      for (int mu = 0; mu < dim_; ++mu) {
        auto& tab = tables_[g * dim_ + mu];
        const cplx step = std::polar(1.0, points[g][mu]);
        const int mid = 2 * band_;
        tab[mid] = 1.0;
        for (int j = 1; j <= mid; ++j) {
          tab[mid + j] = tab[mid + j - 1] * step;
          tab[mid - j] = std::conj(tab[mid + j]);
        }
      }
  }

  double nu() const override { return 2.0 * static_cast<double>(count_); }

  double value(const Eigen::VectorXd& x) override {
    evaluate(x);
    double v = 0.0;
    for (double s : sq_) {
      if (!(s < 1.0)) return kInf;
      v -= std::log1p(-s);
    }
    return v;
  }

  void add_derivatives(const Eigen::VectorXd& x, Eigen::VectorXd& grad, Eigen::MatrixXd& hess) override {
    evaluate(x);
    std::vector<std::vector<cplx>> w1, w2;
    trig_weights(u_, sq_, w1, w2);
    for (auto* group : {&w1, &w2})
      for (auto& w : *group)
        if (!w.empty()) w = transform(w);
    assemble_trig(pm_, gradient_, w1, w2, [&](const LatticePoint& q) { return offset(q); }, grad, hess);
  }

 private:
  std::size_t offset(const LatticePoint& q) const {
    std::size_t idx = 0;
    for (int mu = 0; mu < dim_; ++mu) idx = idx * span_ + static_cast<std::size_t>(q[mu] + 2 * band_);
    return idx;
  }

  // W(q) = sum_g w_g e^{i q.y_g} for |q|_inf <= 2 band.
  std::vector<cplx> transform(const std::vector<cplx>& w) const {
    std::vector<cplx> out(q_total_, 0.0);
    std::vector<cplx> partial;
    for (std::size_t g = 0; g < count_; ++g) {
      if (w[g] == 0.0) continue;
      // Outer product of the per-axis tables, built axis by axis.
      partial.assign(1, w[g]);
      for (int mu = 0; mu < dim_; ++mu) {
        const auto& tab = tables_[g * dim_ + mu];
        std::vector<cplx> next(partial.size() * span_);
        for (std::size_t a = 0; a < partial.size(); ++a)
          for (int j = 0; j < span_; ++j) next[a * span_ + j] = partial[a] * tab[j];
        partial.swap(next);
      }
      for (std::size_t q = 0; q < q_total_; ++q) out[q] += partial[q];
    }
    return out;
  }

  void evaluate(const Eigen::VectorXd& x) {
    if (has_cache_ && x == cached_x_) return;
    const auto coeffs = pm_.coefficients(x);
    const int comps = gradient_ ? dim_ : 1;
    u_.assign(comps, std::vector<double>(count_, 0.0));
    sq_.assign(count_, 0.0);
    const int mid = 2 * band_;
    for (std::size_t g = 0; g < count_; ++g) {
      const auto* tab = &tables_[g * dim_];
      for (const auto& [k, v] : coeffs) {
        cplx e = v;
        for (int mu = 0; mu < dim_; ++mu) e *= tab[mu][mid + k[mu]];
        for (int c = 0; c < comps; ++c) u_[c][g] += (gradient_ ? cplx(0.0, k[c]) * e : e).real();
      }
      for (int c = 0; c < comps; ++c) sq_[g] += u_[c][g] * u_[c][g];
    }
    cached_x_ = x;
    has_cache_ = true;
  }

  ParamMap pm_;
  bool gradient_;
  int dim_;
  std::size_t count_;
  int band_ = 0, span_ = 1;
  std::size_t q_total_ = 1;
  std::vector<std::vector<cplx>> tables_;  // e^{i j y_mu}, j = -2 band .. 2 band
  bool has_cache_ = false;
  Eigen::VectorXd cached_x_;
  std::vector<std::vector<double>> u_;
  std::vector<double> sq_;
};

class DenseRowsBlock : public BarrierBlock {
 public:
  explicit DenseRowsBlock(const std::vector<Eigen::MatrixXd>& rows) {
    Eigen::Index total = 0, cols = rows.empty() ? 0 : rows[0].cols();
    for (const auto& r : rows) {
      if (r.cols() != cols) throw std::invalid_argument("dense rows block: column count mismatch");
      start_.push_back(static_cast<int>(total));
      size_.push_back(static_cast<int>(r.rows()));
      total += r.rows();
    }
    a_.resize(total, cols);
    for (std::size_t g = 0; g < rows.size(); ++g) a_.middleRows(start_[g], size_[g]) = rows[g];
  }
  double nu() const override { return 2.0 * static_cast<double>(start_.size()); }

  double value(const Eigen::VectorXd& x) override {
    const Eigen::VectorXd u = a_ * x;
    double v = 0.0;
    for (std::size_t g = 0; g < start_.size(); ++g) {
      const double s = u.segment(start_[g], size_[g]).squaredNorm();
      if (!(s < 1.0)) return kInf;
      v -= std::log1p(-s);
    }
    return v;
  }

  // Per group: inner matrix 2/(1-|u|^2) I + 4/(1-|u|^2)^2 u u^T, written as B^T B with
  // rows sqrt(2 inv) r_q and 2 inv u^T r.
  void add_derivatives(const Eigen::VectorXd& x, Eigen::VectorXd& grad, Eigen::MatrixXd& hess) override {
    const Eigen::VectorXd u = a_ * x;
    Eigen::VectorXd gw(u.size());
    Eigen::MatrixXd b(a_.rows() + static_cast<Eigen::Index>(start_.size()), a_.cols());
    for (std::size_t g = 0; g < start_.size(); ++g) {
      const auto ug = u.segment(start_[g], size_[g]);
      const double inv = 1.0 / (1.0 - ug.squaredNorm());
      gw.segment(start_[g], size_[g]) = 2.0 * inv * ug;
      b.middleRows(start_[g], size_[g]) = std::sqrt(2.0 * inv) * a_.middleRows(start_[g], size_[g]);
      b.row(a_.rows() + static_cast<Eigen::Index>(g)) =
          2.0 * inv * (ug.transpose() * a_.middleRows(start_[g], size_[g]));
    }
    grad.noalias() += a_.transpose() * gw;
    hess.noalias() += b.transpose() * b;
  }

 private:
  Eigen::MatrixXd a_;
  std::vector<int> start_, size_;
};

}  // namespace

BarrierBlockPtr make_grid_value_block(const ParamMap& pm, int grid) {
  return std::make_unique<GridBlock>(pm, grid, false);
}

BarrierBlockPtr make_grid_gradient_block(const ParamMap& pm, int grid) {
  return std::make_unique<GridBlock>(pm, grid, true);
}

BarrierBlockPtr make_points_block(const ParamMap& pm, const std::vector<std::array<double, 3>>& points, bool gradient) {
  return std::make_unique<PointsBlock>(pm, points, gradient);
}

BarrierBlockPtr make_dense_rows_block(std::vector<Eigen::MatrixXd> rows) {
  return std::make_unique<DenseRowsBlock>(rows);
}

// ---------------------------------------------------------------- solver

namespace {

Eigen::VectorXd solve_spd(const Eigen::MatrixXd& h, const Eigen::VectorXd& b) {
  Eigen::LLT<Eigen::MatrixXd> llt(h);
  if (llt.info() == Eigen::Success) return llt.solve(b);
  // Regularize a numerically singular Hessian.
  const double scale = std::max(h.diagonal().cwiseAbs().maxCoeff(), 1e-300);
  for (double ridge = 1e-14; ridge < 1.0; ridge *= 100.0) {
    const Eigen::MatrixXd hr = h + ridge * scale * Eigen::MatrixXd::Identity(h.rows(), h.cols());
    llt.compute(hr);
    if (llt.info() == Eigen::Success) return llt.solve(b);
  }
  throw SolverError("barrier: Hessian is not positive definite", 0.0, kInf);
}

}  // namespace

BarrierResult maximize_linear(const Eigen::VectorXd& c, const std::vector<BarrierBlock*>& blocks,
                              const BarrierOptions& opt, const Eigen::VectorXd& x0) {
  const Eigen::Index p = c.size();
  BarrierResult res;
  res.x = x0.size() == 0 ? Eigen::VectorXd::Zero(p) : x0;
  if (res.x.size() != p) throw std::invalid_argument("maximize_linear: start point has the wrong size");
  double nu = 0.0;
  for (auto* b : blocks) nu += b->nu();

  auto barrier = [&](const Eigen::VectorXd& x) {
    double v = 0.0;
    for (auto* b : blocks) {
      v += b->value(x);
      if (!std::isfinite(v)) return kInf;
    }
    return v;
  };
  double phi = barrier(res.x);
  if (!std::isfinite(phi)) throw std::invalid_argument("maximize_linear: start point is not strictly feasible");
  if (c.cwiseAbs().maxCoeff() == 0.0) {
    res.value = 0.0;
    return res;
  }

  Eigen::VectorXd g(p);
  Eigen::MatrixXd h(p, p);
  auto derivatives = [&](const Eigen::VectorXd& x) {
    g.setZero();
    h.setZero();
    for (auto* b : blocks) b->add_derivatives(x, g, h);
  };
  derivatives(res.x);
  // Initial weight: unit Newton decrement of the objective direction.
  double t = 1.0 / std::sqrt(std::max(c.dot(solve_spd(h, c)), 1e-300));
  bool need_derivatives = false;

  for (int it = 0; it < opt.max_iter; ++it) {
    if (need_derivatives) derivatives(res.x);
    const Eigen::VectorXd gt = g - t * c;
    const Eigen::VectorXd dx = -solve_spd(h, gt);
    const double lambda = std::sqrt(std::max(-gt.dot(dx), 0.0));
    if (lambda <= 0.25) {
      const double gap = (nu + (lambda + std::sqrt(nu)) * lambda / (1.0 - lambda)) / t;
      if (gap <= opt.tol) {
        res.value = c.dot(res.x);
        res.gap = gap;
        return res;
      }
      t *= opt.mu;
      need_derivatives = false;
      continue;
    }
    // Backtracking line search on t * (-c.x) + phi(x).
    const double f0 = -t * c.dot(res.x) + phi;
    const double slope = gt.dot(dx);
    double step = 1.0;
    Eigen::VectorXd xn;
    double phin = kInf;
    for (int ls = 0; ls < 60; ++ls) {
      xn = res.x + step * dx;
      phin = barrier(xn);
      if (std::isfinite(phin) && -t * c.dot(xn) + phin <= f0 + 0.25 * step * slope) break;
      step *= 0.5;
      phin = kInf;
    }
    if (!std::isfinite(phin)) {
      res.value = c.dot(res.x);
      throw SolverError("barrier: line search failed", res.value, (nu + std::sqrt(nu)) / t);
    }
    res.x = xn;
    phi = phin;
    ++res.newton_steps;
    need_derivatives = true;
  }
  res.value = c.dot(res.x);
  throw SolverError("barrier: iteration limit reached", res.value, nu / t);
}

}  // namespace ucpgh
