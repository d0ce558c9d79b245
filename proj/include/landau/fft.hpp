#pragma once
#include <vector>

#include "landau/grid.hpp"

namespace landau {

// Unnormalized in-place 2D DFT on an n x n row-major array.
// sign = -1: forward (e^{-2 pi i k.x/n}), sign = +1: backward.
void fft2(std::vector<cplx>& a, int n, int sign);

// Unnormalized in-place 1D DFT of length a.size().
void fft1(std::vector<cplx>& a, int sign);

std::vector<cplx> forward_transform(const ComplexField& f);
std::vector<cplx> forward_transform(const RealField& f);

// (f*g)(x) = int f(y) g(x-y) dy, via DFTs.
ComplexField convolve_periodic(const ComplexField& f, const ComplexField& g);
RealField convolve_periodic(const RealField& f, const RealField& g);

// Signed integer frequency of DFT index k on an n-point axis.
inline int dft_frequency(int k, int n) { return k <= n / 2 ? k : k - n; }

}  // namespace landau
