#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ucpgh {

using cplx = std::complex<double>;

// Points of Z^d for d <= 3; unused trailing coordinates are zero.
using LatticePoint = std::array<int, 3>;

constexpr int kMaxDim = 3;
constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;

struct Bracket {
  double lower = 0.0;
  double upper = 0.0;
  double width() const { return upper - lower; }
};

inline LatticePoint operator+(const LatticePoint& a, const LatticePoint& b) {
  return {a[0] + b[0], a[1] + b[1], a[2] + b[2]};
}
inline LatticePoint operator-(const LatticePoint& a, const LatticePoint& b) {
  return {a[0] - b[0], a[1] - b[1], a[2] - b[2]};
}
inline LatticePoint operator-(const LatticePoint& a) { return {-a[0], -a[1], -a[2]}; }

inline bool is_zero(const LatticePoint& a) { return a[0] == 0 && a[1] == 0 && a[2] == 0; }

// Lexicographic positivity: first nonzero coordinate is positive.
inline bool is_positive(const LatticePoint& a) {
  for (int v : a) {
    if (v != 0) return v > 0;
  }
  return false;
}

inline double norm2(const LatticePoint& a) {
  return std::sqrt(double(a[0]) * a[0] + double(a[1]) * a[1] + double(a[2]) * a[2]);
}

inline int norm_inf(const LatticePoint& a) {
  return std::max({std::abs(a[0]), std::abs(a[1]), std::abs(a[2])});
}

inline double dot(const LatticePoint& k, std::span<const double> x) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += k[i] * x[i];
  return s;
}

struct LatticePointHash {
  std::size_t operator()(const LatticePoint& p) const noexcept {
    std::uint64_t h = 1469598103934665603ull;
    for (int v : p) {
      h ^= static_cast<std::uint64_t>(static_cast<std::uint32_t>(v));
      h *= 1099511628211ull;
    }
    return static_cast<std::size_t>(h);
  }
};

std::string to_string(const LatticePoint& p, int dim);

// Raised when an iterative solver stops before meeting its tolerance.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, double best_value, double gap)
      : std::runtime_error(what), best_value_(best_value), gap_(gap) {}
  double best_value() const { return best_value_; }
  double gap() const { return gap_; }

 private:
  double best_value_;
  double gap_;
};

}  // namespace ucpgh
