#include "landau/localizer.hpp"

#include <cmath>

#include "landau/torus.hpp"

namespace landau {
namespace {

double bump_profile(double s2) { return s2 < 1.0 ? std::exp(-1.0 / (1.0 - s2)) : 0.0; }

struct Sampled {
  RealField g, gx, gy;
};

Sampled sample(double lambda, const Grid& grid, bool with_gradient) {
  const int n = grid.size;
  const double L = grid.L;
  const double a = 2.0 * lambda / L;  // s = a |x|
  Sampled out{RealField(grid), RealField(grid), RealField(grid)};
  for (int i = 0; i < n; ++i) {
    const double x = wrap_displacement(grid.coord(i), L);
    for (int j = 0; j < n; ++j) {
      const double y = wrap_displacement(grid.coord(j), L);
      const double s2 = a * a * (x * x + y * y);
      const double g = bump_profile(s2);
      out.g(i, j) = g;
      if (with_gradient && g > 0.0) {
        // d/dx exp(-1/(1-u)) = -exp(...) / (1-u)^2 * du/dx, u = a^2 |x|^2
        const double f = -g / ((1.0 - s2) * (1.0 - s2)) * 2.0 * a * a;
        out.gx(i, j) = f * x;
        out.gy(i, j) = f * y;
      }
    }
  }
  // The origin always carries exp(-1), so the norm is positive; once the support
  // shrinks below a cell the discrete bump is the unit spike at 0.
  const double nrm = norm_l2(out.g);
  for (auto& v : out.g.values()) v /= nrm;
  for (auto& v : out.gx.values()) v /= nrm;
  for (auto& v : out.gy.values()) v /= nrm;
  return out;
}

}  // namespace

Localizer build_localizer(double lambda, const Grid& grid) {
  if (!(lambda >= 1.0)) throw ConfigError("localizer scale lambda must be >= 1");
  const double radius = grid.L / (2.0 * lambda);
  if (radius / grid.spacing() < 8.0)
    throw ConfigError("localizer support radius L/(2 lambda) is resolved by fewer than 8 grid cells");
  Sampled s = sample(lambda, grid, true);
  return Localizer{lambda, radius, std::move(s.g), std::move(s.gx), std::move(s.gy)};
}

RealField sample_bump(double lambda, const Grid& grid) {
  if (!(lambda >= 1.0)) throw ConfigError("localizer scale lambda must be >= 1");
  return sample(lambda, grid, false).g;
}

double bump_gradient_ratio() {
  // phi(s) = exp(-1/(1-s^2)); ratio = 4 * int phi'(s)^2 s ds / int phi(s)^2 s ds on [0,1].
  static const double ratio = [] {
    const int n = 1 << 16;  // composite Simpson; the integrands vanish to all orders at s=1
    const double h = 1.0 / n;
    double i0 = 0.0, i1 = 0.0;
    for (int k = 0; k <= n; ++k) {
      const double s = k * h;
      const double w = (k == 0 || k == n) ? 1.0 : (k % 2 ? 4.0 : 2.0);
      const double p = bump_profile(s * s);
      const double dp = s < 1.0 ? -p * 2.0 * s / ((1.0 - s * s) * (1.0 - s * s)) : 0.0;
      i0 += w * p * p * s;
      i1 += w * dp * dp * s;
    }
    return 4.0 * i1 / i0;
  }();
  return ratio;
}

double default_lambda(int d) { return std::pow(double(d), 0.25); }

}  // namespace landau
