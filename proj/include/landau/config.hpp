#pragma once

namespace landau {

// Physical parameters of the magnetic torus. Inputs are (L, d, hbar, q, N);
// b, l_b and r are derived so that flux quantization and the filling are exact.
struct TorusConfig {
  double L = 1.0;
  int d = 1;
  double hbar = 1.0;
  int q = 0;
  int N = 1;
  double b = 0.0;    // 2*pi*d*hbar / L^2
  double l_b = 0.0;  // sqrt(hbar / b)
  double r = 0.0;    // N/d - q, in [0, 1)

  double hbar_b() const { return hbar * b; }
  // E_n = 2 hbar b (n + 1/2)
  double level_energy(int n) const { return hbar * b * (2.0 * n + 1.0); }
  // r/(q+r) = (N - q d)/N, evaluated from integers.
  double partial_mass() const { return double(N - q * d) / double(N); }
  // 1/((q+r) L^2) = d/(N L^2); also the one-body Pauli ceiling 1/(2 pi l_b^2 N).
  double pauli_cap() const { return double(d) / (double(N) * L * L); }
  // Uniform minimizer of the partial-level problem when V = 0.
  double rho0() const { return double(N - q * d) / (double(N) * L * L); }
  // 1/(2 pi l_b^2) = d/L^2
  double level_density() const { return double(d) / (L * L); }
};

TorusConfig build_config(double L, int d, double hbar, int q, int N);

}  // namespace landau
