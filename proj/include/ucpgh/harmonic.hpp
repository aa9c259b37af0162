#pragma once

#include <map>
#include <span>
#include <vector>

#include "ucpgh/types.hpp"

namespace ucpgh {

// f(x) = sum_k a_k e^{i k.x} on the d-torus, d <= 3. Zero coefficients are not stored.
class TrigPoly {
 public:
  using CoeffMap = std::map<LatticePoint, cplx>;

  explicit TrigPoly(int dim = 1);
  TrigPoly(int dim, CoeffMap coeffs);

  static TrigPoly constant(int dim, cplx value);
  static TrigPoly monomial(int dim, const LatticePoint& k, cplx value = 1.0);

  int dim() const { return dim_; }
  const CoeffMap& coeffs() const { return coeffs_; }
  std::size_t size() const { return coeffs_.size(); }
  bool empty() const { return coeffs_.empty(); }

  cplx coeff(const LatticePoint& k) const;
  void set(const LatticePoint& k, cplx value);
  void add(const LatticePoint& k, cplx value);

  TrigPoly adjoint() const;
  bool is_self_adjoint(double tol = 0.0) const;
  // Per-axis maximum |k_mu| over the support.
  std::array<int, 3> bandwidth() const;
  int max_bandwidth() const;
  // Partial derivative along axis mu.
  TrigPoly derivative(int mu) const;

  TrigPoly& operator+=(const TrigPoly& o);
  TrigPoly& operator-=(const TrigPoly& o);
  TrigPoly& operator*=(cplx s);
  friend TrigPoly operator+(TrigPoly a, const TrigPoly& b) { return a += b; }
  friend TrigPoly operator-(TrigPoly a, const TrigPoly& b) { return a -= b; }
  friend TrigPoly operator*(cplx s, TrigPoly a) { return a *= s; }

  double max_abs_coeff_diff(const TrigPoly& o) const;

 private:
  void check_point(const LatticePoint& k) const;
  int dim_;
  CoeffMap coeffs_;
};

// Nonnegative trigonometric polynomial with unit mean.
class Kernel {
 public:
  // Validates the invariants: dimension, self-adjointness, mean exactly one,
  // and grid nonnegativity to -1e-10.
  explicit Kernel(TrigPoly poly);
  const TrigPoly& poly() const { return poly_; }
  double mean() const { return poly_.coeff({0, 0, 0}).real(); }
  int dim() const { return poly_.dim(); }
  cplx hat(const LatticePoint& m) const { return poly_.coeff(m); }

 private:
  TrigPoly poly_;
};

constexpr double kKernelNegTol = 1e-10;

cplx eval(const TrigPoly& f, std::span<const double> x);

// Values of f on the uniform grid x_j = 2 pi j / M per axis (row-major, axis 0 slowest).
// Requires M_mu > 2 * bandwidth_mu.
std::vector<cplx> eval_grid(const TrigPoly& f, std::span<const int> grid);

// Certified bracket for sup_x (sum_c |f_c(x)|^2)^{1/2}: grid evaluation at 8x the
// bandwidth, then branch and bound with a second-order remainder bound.
Bracket sup_norm_vector(std::span<const TrigPoly> components, double tol);

Bracket sup_norm(const TrigPoly& f, double tol_norm = 1e-6);

TrigPoly convolve(const Kernel& k, const TrigPoly& f);

Kernel fejer_kernel(int n);

struct MomentResult {
  double value = 0.0;
  double certified_upper = 0.0;
};

// (2 pi)^{-d} int K(x) |x|_geo dx with a certified upper bound.
MomentResult kernel_first_moment(const Kernel& k);

struct KernelReport {
  double min_grid_value = 0.0;
  double coeff_at_zero = 0.0;
  std::vector<std::pair<LatticePoint, double>> window;  // m -> Re K^(m)
  double outside_mass = 0.0;                            // mass outside the delta ball
  double outside_mass_error = 0.0;
};

// window_radius: all m with |m|_inf <= window_radius are reported.
KernelReport kernel_checks(const Kernel& k, double delta, int window_radius = 2);

// Grid used by the kernel quadratures: cells per axis.
int quadrature_cells(int dim);

}  // namespace ucpgh
