#include "ucpgh/fft.hpp"

#include <fftw3.h>

#include <mutex>

namespace ucpgh {

namespace {
std::mutex planner_mutex;
}

void fft_inplace(std::vector<cplx>& data, std::span<const int> dims, int sign) {
  std::size_t total = 1;
  for (int n : dims) total *= static_cast<std::size_t>(n);
  if (total != data.size()) throw std::invalid_argument("fft_inplace: extent mismatch");
  if (total == 0) return;
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  fftw_plan plan;
  {
    // FFTW's planner is not thread safe; execution is.
    std::lock_guard<std::mutex> lock(planner_mutex);
    plan = fftw_plan_dft(static_cast<int>(dims.size()), dims.data(), buf, buf,
                         sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  std::lock_guard<std::mutex> lock(planner_mutex);
  fftw_destroy_plan(plan);
}

namespace {
template <std::size_t K>
int smooth_at_least(int n, const int (&primes)[K]) {
  for (int m = std::max(n, 1);; ++m) {
    int r = m;
    for (int p : primes) {
      while (r % p == 0) r /= p;
    }
    if (r == 1) return m;
  }
}
}  // namespace

int fft_good_size(int n) {
  static const int primes[] = {2, 3, 5};
  return smooth_at_least(n, primes);
}

int fft_smooth_size(int n) {
  static const int primes[] = {2, 3, 5, 7, 11, 13};
  return smooth_at_least(n, primes);
}

}  // namespace ucpgh
