#include "landau/hermite.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "landau/errors.hpp"

namespace landau {

void hermite_all(int nmax, double x, double* out) {
  out[0] = 1.0;
  if (nmax >= 1) out[1] = 2.0 * x;
  for (int n = 1; n < nmax; ++n) out[n + 1] = 2.0 * x * out[n] - 2.0 * n * out[n - 1];
}

double hermite(int n, double x, HermiteForm form) {
  if (n < 0) throw ConfigError("Hermite index must be non-negative");
  double h0 = 1.0, h1 = 2.0 * x;
  double hn = n == 0 ? h0 : h1;
  for (int k = 1; k < n; ++k) {
    hn = 2.0 * x * h1 - 2.0 * k * h0;
    h0 = h1;
    h1 = hn;
  }
  return form == HermiteForm::polynomial ? hn : hn * std::exp(-0.5 * x * x);
}

double hermite_function_norm_sq(int n) {
  double f = std::sqrt(std::numbers::pi);
  for (int k = 1; k <= n; ++k) f *= 2.0 * k;
  return f;
}

double hermite_gaussian_tail(const std::vector<double>& a, double U, double delta) {
  // f_j(u) = (2u+j)^j e^{-u^2/2} decreases for u(2u+j) >= 2j, and
  // f_j(u+delta)/f_j(u) <= exp(2 j delta/(2u+j) - u delta - delta^2/2) =: rho_j(u),
  // itself decreasing in u. So the tail is at most f_j(U)/(1 - rho_j(U)).
  double total = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    if (a[j] == 0.0) continue;
    const double jj = double(j);
    if (U * (2.0 * U + jj) < 2.0 * jj) return std::numeric_limits<double>::infinity();
    const double rho = std::exp(2.0 * jj * delta / (2.0 * U + jj) - U * delta - 0.5 * delta * delta);
    if (!(rho < 1.0)) return std::numeric_limits<double>::infinity();
    const double logf = jj * std::log(2.0 * U + jj) - 0.5 * U * U;
    total += a[j] * std::exp(logf) / (1.0 - rho);
  }
  return total;
}

double laguerre(int n, double alpha, double x) {
  if (n < 0) return 0.0;
  double l0 = 1.0, l1 = 1.0 + alpha - x;
  if (n == 0) return l0;
  for (int k = 1; k < n; ++k) {
    const double l2 = ((2.0 * k + 1.0 + alpha - x) * l1 - (k + alpha) * l0) / (k + 1.0);
    l0 = l1;
    l1 = l2;
  }
  return l1;
}

double hermite_square_fourier(int n, double w) {
  return hermite_function_norm_sq(n) * std::exp(-0.25 * w * w) * laguerre(n, 0.0, 0.5 * w * w);
}

double hermite_square_fourier_deriv(int n, double w) {
  // d/dw L_n(w^2/2) = -w L^{(1)}_{n-1}(w^2/2)
  const double s = 0.5 * w * w;
  return hermite_function_norm_sq(n) * std::exp(-0.25 * w * w) *
         (-0.5 * w * laguerre(n, 0.0, s) - w * laguerre(n - 1, 1.0, s));
}

double hermite_function_sup(int n) {
  double f = 1.0;
  for (int k = 1; k <= n; ++k) f *= 2.0 * k;
  return 1.0865 * std::sqrt(f);
}

}  // namespace landau
