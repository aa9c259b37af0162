#pragma once

#include <map>
#include <memory>
#include <optional>
#include <random>
#include <unordered_map>

#include <Eigen/Dense>

#include "ucpgh/harmonic.hpp"
#include "ucpgh/lattice.hpp"

namespace ucpgh {

class IndexSet {
 public:
  enum class Kind { interval, ball, polytope };

  static std::shared_ptr<const IndexSet> interval(int n);
  static std::shared_ptr<const IndexSet> ball(int N, int dim);
  static std::shared_ptr<const IndexSet> polytope(const LatticePolytope& p, int N);
  // Arbitrary finite set; used for translated copies.
  static std::shared_ptr<const IndexSet> custom(int dim, std::vector<LatticePoint> points);

  Kind kind() const { return kind_; }
  int dim() const { return dim_; }
  int level() const { return level_; }
  int size() const { return static_cast<int>(points_.size()); }
  const std::vector<LatticePoint>& points() const { return points_; }
  // Position of a point in `points()`, or -1.
  int position(const LatticePoint& p) const;
  // Sorted difference set S - S.
  const std::vector<LatticePoint>& differences() const { return differences_; }
  bool contains_difference(const LatticePoint& m) const;
  const std::optional<LatticePolytope>& polytope_data() const { return polytope_; }
  std::shared_ptr<const IndexSet> shifted(const LatticePoint& v) const;
  bool same_points(const IndexSet& o) const { return dim_ == o.dim_ && points_ == o.points_; }

 private:
  IndexSet(Kind kind, int dim, int level, std::vector<LatticePoint> points);
  Kind kind_;
  int dim_;
  int level_;
  std::vector<LatticePoint> points_;
  std::vector<LatticePoint> differences_;
  std::unordered_map<LatticePoint, int, LatticePointHash> lookup_;
  std::optional<LatticePolytope> polytope_;
};

using IndexSetPtr = std::shared_ptr<const IndexSet>;

// Matrix with entries (k, l) = t_{k-l} on an index set.
class ToeplitzOperator {
 public:
  using Symbol = std::map<LatticePoint, cplx>;

  ToeplitzOperator(IndexSetPtr s, Symbol symbol);
  static ToeplitzOperator identity(IndexSetPtr s);

  const IndexSet& index_set() const { return *set_; }
  const IndexSetPtr& index_set_ptr() const { return set_; }
  const Symbol& symbols() const { return symbol_; }
  cplx symbol(const LatticePoint& m) const;

  Eigen::MatrixXcd matrix() const;
  ToeplitzOperator adjoint() const;
  bool is_self_adjoint(double tol = 0.0) const;

  ToeplitzOperator& operator+=(const ToeplitzOperator& o);
  ToeplitzOperator& operator*=(cplx s);
  friend ToeplitzOperator operator+(ToeplitzOperator a, const ToeplitzOperator& b) { return a += b; }
  friend ToeplitzOperator operator*(cplx s, ToeplitzOperator a) { return a *= s; }

 private:
  IndexSetPtr set_;
  Symbol symbol_;
};

std::vector<Eigen::MatrixXcd> gamma_matrices(int d);

// Truncated Dirac operator: block (k, l) = delta_{kl} sum_mu k_mu gamma^mu.
class DiracTruncation {
 public:
  explicit DiracTruncation(IndexSetPtr s);
  const IndexSet& index_set() const { return *set_; }
  const IndexSetPtr& index_set_ptr() const { return set_; }
  const std::vector<Eigen::MatrixXcd>& gamma() const { return gamma_; }
  int spinor_dim() const { return static_cast<int>(gamma_[0].rows()); }
  Eigen::MatrixXcd matrix() const;

 private:
  IndexSetPtr set_;
  std::vector<Eigen::MatrixXcd> gamma_;
};

// Sum_mu m_mu gamma^mu.
Eigen::MatrixXcd clifford_symbol(const std::vector<Eigen::MatrixXcd>& gamma, const LatticePoint& m);

ToeplitzOperator toeplitz_from_function(const TrigPoly& f, IndexSetPtr s);

double operator_norm(const Eigen::MatrixXcd& a);

Eigen::MatrixXcd commutator(const DiracTruncation& d, const ToeplitzOperator& t);

// ||[D, T]|| for a Toeplitz operator.
double toeplitz_lipschitz(const DiracTruncation& d, const ToeplitzOperator& t);

// Brackets sup_x |grad f(x)|_2.
Bracket lipschitz_seminorm_fn(const TrigPoly& f, double tol_norm = 1e-6);

// sum_k t_{-k} a_k for t on interval(n).
cplx duality_pairing(const ToeplitzOperator& t, const TrigPoly& f);

struct DualityReport {
  bool psd = false;
  double min_eigenvalue = 0.0;
  bool pairing_positive = false;
  double min_pairing = 0.0;            // over normalized q
  std::vector<cplx> witness;           // coefficients of q attaining min_pairing
  bool agree() const { return psd == pairing_positive; }
};

DualityReport duality_order_check(const ToeplitzOperator& t, int trials, std::uint64_t seed);

// Random Hermitian Toeplitz matrices on interval(n), n in [n_min, n_max], mixing PSD
// and indefinite cases.
std::vector<ToeplitzOperator> duality_corpus(int count, int n_min, int n_max, std::uint64_t seed);

}  // namespace ucpgh
