#pragma once
#include "landau/grid.hpp"

namespace landau {

// g_lambda(x) = lambda g(lambda x) for the radial bump g = c exp(-1/(1-|2x/L|^2))
// on |x| < L/2, centred at the origin and wrapped periodically. The constant is
// fixed on the grid so that the discrete L^2 norm is exactly 1.
struct Localizer {
  double lambda = 1.0;
  double radius = 0.0;  // L/(2 lambda)
  RealField samples;
  RealField grad_x;  // analytic gradient, same constant
  RealField grad_y;
};

// Throws ConfigError unless lambda >= 1 and the support radius spans >= 8 cells.
Localizer build_localizer(double lambda, const Grid& grid);

// Same sampling without the resolution requirement (used by mollification
// sweeps that push lambda past the grid scale). Unit discrete L^2 norm.
RealField sample_bump(double lambda, const Grid& grid);

// ||grad g||^2 / ||g||^2 for the base bump with L = 1, by 1D radial quadrature.
double bump_gradient_ratio();

// ||grad g_lambda||^2 = lambda^2 ||grad g||^2 for unit-norm g on a torus of side L.
inline double localizer_gradient_norm_sq(double lambda, double L) {
  return lambda * lambda * bump_gradient_ratio() / (L * L);
}

// Default scale lambda = d^{1/4}.
double default_lambda(int d);

}  // namespace landau
