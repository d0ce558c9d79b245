#include "landau/config.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "landau/errors.hpp"

namespace landau {

TorusConfig build_config(double L, int d, double hbar, int q, int N) {
  if (!(L > 0.0) || !std::isfinite(L)) throw ConfigError("L must be positive");
  if (d < 1) throw ConfigError("d must be a positive integer");
  if (!(hbar > 0.0) || !std::isfinite(hbar)) throw ConfigError("hbar must be positive");
  if (q < 0) throw ConfigError("q must be non-negative");
  if (N < 1) throw ConfigError("N must be positive");
  // 0 <= N/d - q < 1, decided on integers.
  if (N < q * d || N >= (q + 1) * d)
    throw ConfigError("filling inconsistent with q: N/d - q = " +
                      std::to_string(double(N) / d - q) + " is outside [0,1)");
  TorusConfig c;
  c.L = L;
  c.d = d;
  c.hbar = hbar;
  c.q = q;
  c.N = N;
  c.b = 2.0 * std::numbers::pi * d * hbar / (L * L);
  c.l_b = std::sqrt(hbar / c.b);
  c.r = double(N - q * d) / double(d);
  return c;
}

}  // namespace landau
