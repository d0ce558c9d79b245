#pragma once
#include <string>
#include <vector>

#include "landau/grid.hpp"

namespace landau {

enum class PotentialFamily { zero, cosine, fourier, gaussian_periodic };

// One lattice mode k = (2 pi / L)(m1, m2) with coefficient c: V = sum c e^{i k.x}.
struct FourierMode {
  int m1 = 0;
  int m2 = 0;
  cplx c{0.0, 0.0};
};

struct PotentialSpec {
  PotentialFamily family = PotentialFamily::zero;
  double amplitude = 0.0;  // v0 for cosine, w0 for gaussian_periodic
  double sigma = 0.0;      // gaussian width, in length units
  std::vector<FourierMode> modes;

  static PotentialSpec zero() { return {}; }
  static PotentialSpec cosine(double v0);
  static PotentialSpec gaussian_periodic(double w0, double sigma);
  static PotentialSpec fourier(std::vector<FourierMode> modes);
};

std::string to_string(PotentialFamily f);
PotentialFamily parse_family(const std::string& s);

// Throws ConfigError on negative widths, missing Hermitian partners, or (for
// interactions) coefficient sets not invariant under the square point group.
void validate_potential(const PotentialSpec& spec, bool interaction = false);

// Fourier coefficients representable on the grid (|m| < size/2 on each axis).
std::vector<FourierMode> fourier_coefficients(const PotentialSpec& spec, const Grid& grid);

RealField synthesize_potential(const PotentialSpec& spec, const Grid& grid);

// ||g_lambda^2 * V - V||_{L^2}; with interaction = true, the two-body analogue
// ||(g_lambda^2 (x) g_lambda^2) * w - w||_{L^2(Omega^2)} = L ||g^2*g^2*w - w||.
double mollification_error(const PotentialSpec& spec, double lambda, const Grid& grid,
                           bool interaction = false);

// True when w(x) = w(-x) on the grid to tol (relative to sup|w|).
bool is_even_on_grid(const RealField& w, double tol = 1e-12);

}  // namespace landau
