#include "landau/theta.hpp"

#include <cmath>
#include <numbers>

#include "landau/errors.hpp"
#include "landau/hermite.hpp"
#include "landau/reduce.hpp"

namespace landau {

TruncationPolicy certify_lattice_sum(const std::vector<double>& a, double delta, double prefactor,
                                     double tol) {
  if (!(tol > 0.0)) throw TruncationError("truncation tolerance must be positive");
  for (int K = 1; K <= kTruncationBudget; ++K) {
    const double tail = 2.0 * prefactor * hermite_gaussian_tail(a, (K + 0.5) * delta, delta);
    if (tail <= tol) return TruncationPolicy{K, tail};
  }
  throw TruncationError("lattice sum cannot be certified to tolerance " + std::to_string(tol) +
                        " within K <= " + std::to_string(kTruncationBudget));
}

ThetaValue theta(cplx z, cplx tau, double tol) {
  const double t = tau.imag();
  if (!(t > 0.0)) throw ConfigError("theta requires Im(tau) > 0");
  if (!(tol > 0.0)) throw TruncationError("truncation tolerance must be positive");
  const double pi = std::numbers::pi;
  // |term_k| = exp(-pi t (k + y/t)^2 + pi y^2/t); centre the window on k0 = -y/t.
  const double y = z.imag();
  const double k0 = -y / t;
  const long kc = std::lround(k0);
  const double peak = pi * y * y / t;
  int K = 1;
  double tail = 0.0;
  for (;; ++K) {
    if (K > kTruncationBudget) throw TruncationError("theta: tail not certified within budget");
    // Dropped |k - k0| >= K + 1/2; consecutive ratios <= exp(-2 pi t (K+1)).
    const double e = peak - pi * t * (K + 0.5) * (K + 0.5);
    const double ratio = std::exp(-2.0 * pi * t * (K + 1));
    tail = 2.0 * std::exp(e) / (1.0 - ratio);
    if (tail <= tol) break;
  }
  const cplx I(0.0, 1.0);
  const cplx v = pairwise_sum_of(std::size_t(2 * K + 1), [&](std::size_t i) {
    const double k = double(kc - K + long(i));
    return std::exp(I * pi * tau * k * k + 2.0 * I * pi * k * z);
  });
  return ThetaValue{v, TruncationPolicy{K, tail}};
}

}  // namespace landau
