#pragma once

#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <variant>

#include "ucpgh/opsys.hpp"
#include "ucpgh/random.hpp"

namespace ucpgh {

struct Variant {
  enum class Kind { fejer_riesz, toeplitz_circle, torus_spherical, torus_polyhedral, identity };
  Kind kind = Kind::fejer_riesz;
  int level = 1;  // n for the circle variants, N for the torus variants
  int dim = 1;
  std::optional<LatticePolytope> polytope;

  static Variant fejer_riesz(int n);
  static Variant toeplitz_circle(int n);
  static Variant torus_spherical(int d, int N);
  static Variant torus_polyhedral(const LatticePolytope& p, int N);
  // R = S = identity on the Toeplitz system of interval(n); constants are zero.
  static Variant identity(int n);

  std::string name() const;
  Variant at_level(int level) const;
};

// Elements of a truncated or full system.
using Operand = std::variant<ToeplitzOperator, TrigPoly>;

class TruncationPair {
 public:
  explicit TruncationPair(Variant v);

  const Variant& variant() const { return variant_; }
  int dim() const { return variant_.dim; }
  // Index set of the Toeplitz system; null for fejer_riesz.
  const IndexSetPtr& index_set() const { return set_; }
  bool truncated_is_toeplitz() const { return static_cast<bool>(set_); }
  bool full_is_toeplitz() const { return variant_.kind == Variant::Kind::identity; }
  // Largest |m|_inf of a Fourier mode present in the truncated system.
  int truncated_bandwidth() const;

  // R: full -> truncated.
  Operand compress(const Operand& f) const;
  Operand compress(const TrigPoly& f) const { return compress(Operand(f)); }
  // S: truncated -> full.
  Operand symbolize(const Operand& t) const;
  TrigPoly symbolize_fn(const Operand& t) const;

  Operand truncated_unit() const;
  Operand full_unit() const;

  // Throws for the identity variant.
  const Kernel& roundtrip_kernel() const;
  // (c_fwd, c_bwd); cached after the first call.
  std::pair<double, double> certified_constants() const;

  // Norm and Lipschitz seminorm on either side (upper bounds for functions).
  double truncated_norm(const Operand& t) const;
  double truncated_lipschitz(const Operand& t) const;

 private:
  Variant variant_;
  IndexSetPtr set_;
  std::optional<Kernel> kernel_;
  std::optional<DiracTruncation> dirac_;
  mutable std::once_flag constants_once_;
  mutable std::pair<double, double> constants_{0.0, 0.0};
};

using TruncationPairPtr = std::shared_ptr<const TruncationPair>;

double operand_norm_upper(const Operand& x, const DiracTruncation* d);

double empirical_constant(const TruncationPair& pair, int trials, std::uint64_t seed);

enum class Direction { fwd, bwd };

struct UcpReport {
  bool unital = false;
  double identity_min_eigenvalue = 0.0;
  double min_eigenvalue = 0.0;  // over all amplified positive samples, normalized by input scale
  int positivity_violations = 0;
  int norm_violations = 0;
  int lipschitz_violations = 0;
  int trials = 0;
  bool ok() const {
    return unital && positivity_violations == 0 && norm_violations == 0 && lipschitz_violations == 0;
  }
};

UcpReport ucp_check(const TruncationPair& pair, Direction dir, int level_l, int trials, std::uint64_t seed);

// Random self-adjoint trigonometric polynomial with |k|_inf <= band, coefficients
// decaying like 1 / (1 + |k|)^decay.
TrigPoly random_self_adjoint_poly(Rng& rng, int dim, int band, double decay = 1.0);
ToeplitzOperator random_self_adjoint_toeplitz(Rng& rng, const IndexSetPtr& s);

}  // namespace ucpgh
