#pragma once

#include <memory>

#include "ucpgh/triple.hpp"

namespace ucpgh {

// The operator system a UCP map is defined on.
struct SystemRef {
  bool toeplitz = true;
  int dim = 1;
  IndexSetPtr set;    // Toeplitz systems only
  int max_band = -1;  // function systems: largest accepted bandwidth, -1 for all of C(T^d)
};

bool accepts(const SystemRef& sys, const SpectralTriple& t);

class AtomicUcp;

// A unital completely positive map from an operator system into M_m.
class UcpMap {
 public:
  virtual ~UcpMap() = default;
  virtual int target_dim() const = 0;
  virtual SystemRef system() const = 0;
  virtual Eigen::MatrixXcd eval(const Operand& x) const = 0;
  virtual const AtomicUcp* as_atomic() const { return nullptr; }
};

using UcpMapPtr = std::shared_ptr<const UcpMap>;

// x -> V^*(x (x) I_r)V on Toeplitz matrices T (x) I_s over l^2(S) (x) C^s, stored as the
// Choi matrix C = sum_{ij} E_ij (x) phi(E_ij) of size q*m with q = |S| * s.
class ChoiUcp : public UcpMap {
 public:
  ChoiUcp(IndexSetPtr set, Eigen::MatrixXcd choi, int m);
  // V has q * r rows (row (i, rho) -> i * r + rho) and m orthonormal columns.
  static ChoiUcp from_isometry(IndexSetPtr set, const Eigen::MatrixXcd& v, int r);
  static ChoiUcp identity(IndexSetPtr set);

  int target_dim() const override { return m_; }
  SystemRef system() const override { return {true, set_->dim(), set_, -1}; }
  Eigen::MatrixXcd eval(const Operand& x) const override;

  const IndexSetPtr& index_set() const { return set_; }
  int spinor_dim() const { return s_; }
  int domain_size() const { return q_; }
  const Eigen::MatrixXcd& choi() const { return choi_; }

 private:
  IndexSetPtr set_;
  Eigen::MatrixXcd choi_;
  int m_, s_, q_;
};

// f -> sum_j f(x_j) A_j on functions over T^d.
class AtomicUcp : public UcpMap {
 public:
  struct Atom {
    std::array<double, 3> x{0.0, 0.0, 0.0};
    Eigen::MatrixXcd a;
  };
  AtomicUcp(int dim, std::vector<Atom> atoms);
  // Same map restricted to functions of bandwidth <= band.
  AtomicUcp restricted(int band) const;

  int target_dim() const override { return m_; }
  SystemRef system() const override { return {false, dim_, nullptr, band_}; }
  Eigen::MatrixXcd eval(const Operand& x) const override;
  const AtomicUcp* as_atomic() const override { return this; }

  int dim() const { return dim_; }
  const std::vector<Atom>& atoms() const { return atoms_; }

 private:
  int dim_, m_;
  int band_ = -1;
  std::vector<Atom> atoms_;
};

enum class Pullback { R, S };

// R*: phi_n -> phi_n o compress, a map on the full system.
// S*: phi -> phi o symbolize, a map on the truncated system.
class PullbackUcp : public UcpMap {
 public:
  PullbackUcp(UcpMapPtr base, TruncationPairPtr pair, Pullback dir);
  int target_dim() const override { return base_->target_dim(); }
  SystemRef system() const override;
  Eigen::MatrixXcd eval(const Operand& x) const override;
  Pullback direction() const { return dir_; }
  const UcpMapPtr& base() const { return base_; }

 private:
  UcpMapPtr base_;
  TruncationPairPtr pair_;
  Pullback dir_;
};

// Haar isometry C^m -> C^q (x) C^r. Throws when m > q * r.
ChoiUcp sample_choi_ucp(const IndexSetPtr& set, int m, int r, std::uint64_t seed);
// Throws when the normalizer stays singular after 10 draws.
AtomicUcp sample_atomic_ucp(int dim, int m, int atoms, std::uint64_t seed);

struct MetricConfig {
  int m = 1;
  int P = 6;  // at most 8
  bool self_adjoint_only = true;
  double tol_obj = 1e-4;
  double tail_tol = 0.05;
  double oracle_step = 1e-2;
  int max_iter = 2000;

  void validate() const;
  // First P points of a Halton sequence in [-1, 1]^{2m}, kept when inside the unit ball.
  std::vector<Eigen::VectorXcd> vectors() const;
  // sum_p 2^{-p} |k_p|^2.
  double weight() const;
  double tail_bound() const { return 2.0 * std::ldexp(1.0, -P); }
};

struct DistanceResult {
  double value = 0.0;       // objective at a certified feasible element
  double gap = 0.0;         // upper bound minus value
  double tail_bound = 0.0;  // omitted weights beyond P
  bool exact = false;       // atomic maps on C(T^d): finite LP over the atoms
  bool certified = true;    // false for the phase-alternation heuristic
  int solves = 0;
};

DistanceResult distance(const UcpMap& phi, const UcpMap& psi, const MetricConfig& cfg, const SpectralTriple& triple);

// Exhaustive grid search over the coefficient box with step cfg.oracle_step (or the
// given step). Self-adjoint parameterizations with at most 6 parameters only.
double distance_oracle(const UcpMap& phi, const UcpMap& psi, const MetricConfig& cfg, const SpectralTriple& triple,
                       double step = 0.0);

}  // namespace ucpgh
