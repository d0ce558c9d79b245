#pragma once
#include <complex>
#include <vector>

namespace landau {

using cplx = std::complex<double>;

// Half-width K of a lattice sum and a guaranteed bound on the dropped terms.
struct TruncationPolicy {
  int K = 1;
  double tail_bound = 0.0;
};

// Largest half-width any lattice sum may use before giving up.
constexpr int kTruncationBudget = 4096;

// Smallest K >= 1 such that prefactor * (two one-sided tails starting at
// |u| >= (K+1/2) delta) <= tol, with the polynomial majorant coefficients a.
// Throws TruncationError past the budget.
TruncationPolicy certify_lattice_sum(const std::vector<double>& a, double delta, double prefactor,
                                     double tol);

struct ThetaValue {
  cplx value;
  TruncationPolicy policy;
};

// theta(z, tau) = sum_k exp(i pi tau k^2 + 2 i pi k z); absolute tail <= tol.
ThetaValue theta(cplx z, cplx tau, double tol = 1e-15);

}  // namespace landau
