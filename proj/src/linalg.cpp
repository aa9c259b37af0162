#include "ucpgh/linalg.hpp"

#include <algorithm>
#include <numeric>

namespace ucpgh {

HermitianEigen hermitian_eigen(const Eigen::MatrixXcd& input, bool want_vectors, double off_tol) {
  const Eigen::Index n = input.rows();
  if (input.cols() != n) throw std::invalid_argument("hermitian_eigen: matrix not square");
  if (!all_finite(input)) throw std::invalid_argument("hermitian_eigen: non-finite entries");
  Eigen::MatrixXcd a = 0.5 * (input + input.adjoint());
  Eigen::MatrixXcd v;
  if (want_vectors) v = Eigen::MatrixXcd::Identity(n, n);

  const double scale = std::max(1.0, a.norm());
  const double thresh = off_tol * scale;
  HermitianEigen out;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) off = std::max(off, std::abs(a(p, q)));
    out.sweeps = sweep;
    if (off <= thresh) break;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const cplx apq = a(p, q);
        const double mag = std::abs(apq);
        if (mag <= 0.01 * thresh) continue;
        const cplx phase = apq / mag;
        const double app = a(p, p).real(), aqq = a(q, q).real();
        const double theta = (aqq - app) / (2.0 * mag);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        // U = diag(1, conj(phase)) * [[c, s], [-s, c]] on the (p, q) plane.
        const cplx upp = c, upq = s;
        const cplx uqp = -s * std::conj(phase), uqq = c * std::conj(phase);
        for (Eigen::Index k = 0; k < n; ++k) {
          const cplx akp = a(k, p), akq = a(k, q);
          a(k, p) = akp * upp + akq * uqp;
          a(k, q) = akp * upq + akq * uqq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const cplx apk = a(p, k), aqk = a(q, k);
          a(p, k) = std::conj(upp) * apk + std::conj(uqp) * aqk;
          a(q, k) = std::conj(upq) * apk + std::conj(uqq) * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        a(p, p) = a(p, p).real();
        a(q, q) = a(q, q).real();
        if (want_vectors) {
          for (Eigen::Index k = 0; k < n; ++k) {
            const cplx vkp = v(k, p), vkq = v(k, q);
            v(k, p) = vkp * upp + vkq * uqp;
            v(k, q) = vkp * upq + vkq * uqq;
          }
        }
      }
    }
  }
  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index i, Eigen::Index j) { return a(i, i).real() < a(j, j).real(); });
  out.values.resize(n);
  if (want_vectors) out.vectors.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    out.values(i) = a(order[i], order[i]).real();
    if (want_vectors) out.vectors.col(i) = v.col(order[i]);
  }
  return out;
}

double min_eigenvalue(const Eigen::MatrixXcd& a) {
  if (a.rows() == 0) return 0.0;
  return hermitian_eigen(a).values(0);
}

double spectral_radius_hermitian(const Eigen::MatrixXcd& a) {
  if (a.rows() == 0) return 0.0;
  const auto e = hermitian_eigen(a);
  return std::max(std::abs(e.values(0)), std::abs(e.values(e.values.size() - 1)));
}

Eigen::MatrixXcd inverse_sqrt_psd(const Eigen::MatrixXcd& h, double floor) {
  const auto e = hermitian_eigen(h, true);
  if (e.values.size() > 0 && e.values(0) <= floor)
    throw std::domain_error("inverse_sqrt_psd: matrix is singular");
  Eigen::VectorXd d = e.values.array().rsqrt();
  return e.vectors * d.asDiagonal() * e.vectors.adjoint();
}

bool all_finite(const Eigen::MatrixXcd& a) {
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      if (!std::isfinite(a(i, j).real()) || !std::isfinite(a(i, j).imag())) return false;
  return true;
}

}  // namespace ucpgh
