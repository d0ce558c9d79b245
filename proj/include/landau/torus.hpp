#pragma once
#include "landau/grid.hpp"

namespace landau {

// min over r in LZ^2 of |x - y + r|
double torus_distance(Point x, Point y, double L);

// Component-wise reduction of a displacement into [-L/2, L/2).
double wrap_displacement(double t, double L);

}  // namespace landau
