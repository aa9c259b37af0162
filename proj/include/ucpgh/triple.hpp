#pragma once

#include <array>

#include "ucpgh/barrier.hpp"
#include "ucpgh/truncation.hpp"

namespace ucpgh {

// The operator system of a spectral triple together with its norm and Lipschitz
// seminorm: either a Toeplitz system on an index set with the truncated Dirac
// operator, or band-limited functions on T^d with the gradient seminorm.
class SpectralTriple {
 public:
  enum class Kind { toeplitz, function };

  static SpectralTriple toeplitz(IndexSetPtr s);
  // Functions with |k|_inf <= band; constraints are imposed on a grid with
  // max(grid_factor * band, 16) points per axis. grid_factor 0 picks 8 on the circle
  // and 16 on higher tori, where exchange points are slower to settle.
  static SpectralTriple function(int dim, int band, int grid_factor = 0);
  // Band-limited surrogate for C(T^d) itself rather than a finite function system.
  static SpectralTriple continuum(int dim, int band, int grid_factor = 0);

  Kind kind() const { return kind_; }
  int dim() const { return dim_; }
  const IndexSetPtr& index_set() const { return set_; }
  int band() const { return band_; }
  int grid() const { return grid_; }
  bool is_continuum() const { return continuum_; }
  // All Fourier modes of the system.
  const std::vector<LatticePoint>& modes() const { return modes_; }
  ParamMap params(bool self_adjoint) const { return ParamMap::build(dim_, modes_, self_adjoint); }

  Operand basis(const LatticePoint& k) const;
  Operand element(const ParamMap& pm, const Eigen::VectorXd& x) const;
  bool contains(const Operand& x) const;

  // Upper bounds.
  double norm(const Operand& x) const;
  double lipschitz(const Operand& x) const;

 private:
  Kind kind_ = Kind::toeplitz;
  int dim_ = 1;
  IndexSetPtr set_;
  int band_ = 0;
  int grid_ = 16;
  bool continuum_ = false;
  std::vector<LatticePoint> modes_;
};

struct TriplePair {
  SpectralTriple truncated;
  SpectralTriple full;
};

// Triples on both sides of a truncation. full_band <= 0 selects the default
// bandwidth of the function side: 4n on the circle, 2N on the torus.
TriplePair make_triples(const TruncationPair& pair, int full_band = 0);
int default_full_band(const Variant& v);

struct LinearMaximum {
  Eigen::VectorXd x;     // certified feasible point
  double value = 0.0;    // c.x at that point
  double upper = 0.0;    // certified upper bound on the maximum over the feasible set
  int newton_steps = 0;
  int exchange_rounds = 0;
};

struct MaximizeOptions {
  double tol = 1e-4;  // required upper - value
  int max_iter = 2000;
  int exchange_rounds = 20;
};

// Maximize c.x over elements with norm <= 1 and Lipschitz seminorm <= 1.
// Throws SolverError if the certified gap stays above opt.tol.
LinearMaximum maximize_over_unit_ball(const SpectralTriple& triple, const ParamMap& pm, const Eigen::VectorXd& c,
                                      const MaximizeOptions& opt = {});

}  // namespace ucpgh
