#include "landau/torus.hpp"

#include <cmath>

namespace landau {

double wrap_displacement(double t, double L) {
  double u = std::fmod(t, L);
  if (u < -0.5 * L) u += L;
  if (u >= 0.5 * L) u -= L;
  return u;
}

double torus_distance(Point x, Point y, double L) {
  return std::hypot(wrap_displacement(x.x - y.x, L), wrap_displacement(x.y - y.y, L));
}

}  // namespace landau
