#pragma once

#include <span>
#include <vector>

#include "ucpgh/types.hpp"

namespace ucpgh {

// In-place multidimensional DFT over a row-major array with extents `dims`.
// sign = -1 computes sum_x a(x) e^{-i xi.x}, sign = +1 the unnormalized inverse.
void fft_inplace(std::vector<cplx>& data, std::span<const int> dims, int sign);

// Smallest size >= n whose only prime factors are 2, 3 and 5.
int fft_good_size(int n);
// Same with factors up to 13, which FFTW also handles with direct codelets.
int fft_smooth_size(int n);

}  // namespace ucpgh
