#pragma once

#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "ucpgh/opsys.hpp"

namespace ucpgh {

// Real parameterization of an operator or function system: parameter i stands
// for the element sum_{(k, a) in terms[i]} a * e_k (Toeplitz shift E_k or
// exponential e^{ik.x}).
struct ParamMap {
  int dim = 1;
  bool self_adjoint = true;
  std::vector<std::vector<std::pair<LatticePoint, cplx>>> terms;
  int size() const { return static_cast<int>(terms.size()); }

  // Self-adjoint layout: x = [t_0; Re t_m, Im t_m for m lexicographically positive].
  // General layout: [Re t_m, Im t_m for every mode].
  static ParamMap build(int dim, const std::vector<LatticePoint>& modes, bool self_adjoint);
  // Complex coefficient of each mode for the parameter vector x.
  std::map<LatticePoint, cplx> coefficients(const Eigen::VectorXd& x) const;
};

// A self-concordant barrier term. value() returns +inf outside the open domain.
class BarrierBlock {
 public:
  virtual ~BarrierBlock() = default;
  virtual double nu() const = 0;
  virtual double value(const Eigen::VectorXd& x) = 0;
  virtual void add_derivatives(const Eigen::VectorXd& x, Eigen::VectorXd& grad, Eigen::MatrixXd& hess) = 0;
};

using BarrierBlockPtr = std::unique_ptr<BarrierBlock>;

// -I < A(x) < I for A(x) = sum_m t_m(x) E_m (x) G_m, with E_m the Toeplitz shift on the
// index set and G_m = sum_r c_r(m) Gamma_r acting on an s-dimensional spinor factor.
// The norm block has a single Gamma = [1], c = 1; the commutator block i[D, T] uses
// Gamma_r = gamma^r and c_r(m) = i m_r.
BarrierBlockPtr make_toeplitz_norm_block(const IndexSetPtr& s, const ParamMap& pm);
BarrierBlockPtr make_toeplitz_commutator_block(const IndexSetPtr& s, const ParamMap& pm);

// -I < sum_i x_i A_i < I for dense Hermitian A_i.
BarrierBlockPtr make_dense_lmi_block(std::vector<Eigen::MatrixXcd> a);

// |f(g)| < 1 (value rows) or |grad f(g)|_2 < 1 (gradient rows) on the uniform grid with
// `grid` points per axis, for the real function f parameterized by a self-adjoint ParamMap.
BarrierBlockPtr make_grid_value_block(const ParamMap& pm, int grid);
BarrierBlockPtr make_grid_gradient_block(const ParamMap& pm, int grid);

// The grid constraints at arbitrary points (self-adjoint parameterizations).
BarrierBlockPtr make_points_block(const ParamMap& pm, const std::vector<std::array<double, 3>>& points, bool gradient);

// |A_r x|_2 < 1 for explicit real row blocks A_r (one row gives an interval constraint).
BarrierBlockPtr make_dense_rows_block(std::vector<Eigen::MatrixXd> rows);

struct BarrierOptions {
  double tol = 2.5e-5;  // absolute bound on the duality gap
  double mu = 16.0;
  int max_iter = 2000;  // Newton steps
};

struct BarrierResult {
  Eigen::VectorXd x;
  double value = 0.0;  // c.x at the returned strictly feasible point
  double gap = 0.0;    // certified bound on (optimum - value) for the given blocks
  int newton_steps = 0;
};

// Maximize c.x over the intersection of the block domains, starting from the strictly
// feasible point x0 (zero when empty). Throws SolverError on non-convergence.
BarrierResult maximize_linear(const Eigen::VectorXd& c, const std::vector<BarrierBlock*>& blocks,
                              const BarrierOptions& opt = {}, const Eigen::VectorXd& x0 = {});

}  // namespace ucpgh
