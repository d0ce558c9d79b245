#pragma once
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "landau/config.hpp"
#include "landau/grid.hpp"
#include "landau/localizer.hpp"
#include "landau/orbitals.hpp"

namespace landau {

// A function on the truncated phase space [0, n_max] x grid (k = 1), or on its
// square (k = 2). Cells are ordered X = n * grid.count() + (i * size + j); for
// k = 2 the value of (X1, X2) sits at X1 * cells() + X2.
struct PhaseSpaceDensity {
  int n_max = 0;
  Grid grid;
  int k = 1;
  std::vector<double> values;
  // One-body lower symbols only: the mass of every level above n_max, aggregated, i.e. the
  // out-of-span part Tr[gamma g_R Q g_R] with Q the complement of the resolved levels on the grid.
  // Empty when not computed.
  std::vector<double> overflow;

  std::size_t cells() const { return std::size_t(n_max + 1) * grid.count(); }
  double& operator()(int n, int i, int j) { return values[std::size_t(n) * grid.count() + std::size_t(i) * grid.size + j]; }
  double operator()(int n, int i, int j) const { return values[std::size_t(n) * grid.count() + std::size_t(i) * grid.size + j]; }

  RealField slice(int n) const;     // k = 1
  double level_mass(int n) const;   // k = 1: int m(n, R) dR
  double integral() const;          // int m d eta^{(x)k} over the resolved levels
  double overflow_mass() const;     // int overflow dR, 0 if absent
  double sup() const;
  double min() const;
  RealField density() const;        // k = 1: sum_n m(n, .) plus the overflow slice
  PhaseSpaceDensity marginal() const;  // k = 2 -> k = 1, integrating out the second slot
};

PhaseSpaceDensity make_phase_space_density(int n_max, const Grid& grid, int k = 1);

// A k-body density matrix in the orbital basis: matrix(i, j) = <phi_i, gamma phi_j>
// with phi the orbitals (k = 1) or ordered pairs a * count + b (k = 2).
struct DensityMatrix {
  std::shared_ptr<const OrbitalSet> basis;
  int k = 1;
  Eigen::MatrixXcd matrix;

  int dim() const { return int(matrix.rows()); }
  double trace() const { return matrix.trace().real(); }
};

// Validates shape, Hermiticity (1e-12) and positivity (eigenvalues >= -1e-10).
DensityMatrix make_density_matrix(std::shared_ptr<const OrbitalSet> basis, Eigen::MatrixXcd matrix, int k = 1);

// M_{(n l), a}(R) = <g_R psi_{nl}, psi_a>, for every l and every a in the basis.
// Index [l * count + a].
std::vector<ComplexField> localized_overlaps(const OrbitalSet& set, const Localizer& loc, int n);

// m(n, R) = Tr[gamma Pi_{n,R}] (k = 1) or Tr[gamma Pi_{X1} (x) Pi_{X2}] (k = 2), n <= n_max.
PhaseSpaceDensity lower_symbol(const DensityMatrix& gamma, const Localizer& loc, int n_max);

// gamma_m = (2 pi l_b^2) int m(X) Pi_X d eta(X), compressed to the orbital basis of `set`.
// The overflow slice, having no level, is ignored.
DensityMatrix upper_symbol_matrix(const PhaseSpaceDensity& m, std::shared_ptr<const OrbitalSet> set,
                                  const Localizer& loc);

// 1 + (g^2 * (2 pi l_b^2 Pi_n(z,z) - 1)) for n = 0..n_top: the exact weight of
// 2 pi l_b^2 Tr[Pi_{n,R}] in the trace of an upper symbol.
std::vector<RealField> trace_weights(const TorusConfig& cfg, const Localizer& loc, int n_top);

// Tr[gamma_m] over the full space: sum_n int m(n,R) weight_n(R) dR.
double upper_symbol_trace(const PhaseSpaceDensity& m, const std::vector<RealField>& weights);

// m_rho: cap on levels n < q, rho on level q. Throws ConfigError unless rho lies in the qLL domain.
PhaseSpaceDensity build_saturated_density(const RealField& rho, const TorusConfig& cfg);

// Checks 0 <= rho <= cap (1e-12 relative slack) and int rho = mass (1e-10 relative).
void check_qll_domain(const RealField& rho, const TorusConfig& cfg);

// sum_n E_n int m_n + int V rho_m + iint w(x-y) rho_m(x) rho_m(y) for k = 1; for k = 2 the
// one-body terms use the marginal and the interaction uses the two-point density.
double semiclassical_energy(const PhaseSpaceDensity& m, const RealField& V, const RealField& w,
                            const TorusConfig& cfg);

// Tr[L gamma] against sum_{n <= n_max} E_n int m_n - (hbar lambda)^2 ||grad g||^2,
// with the energy carried by levels above n_max measured through [pi, g_R] = -i hbar grad g_R.
struct KineticIdentity {
  double trace_kinetic = 0.0;   // Tr[L gamma]
  double symbol_energy = 0.0;   // sum_{n <= n_max} E_n int m_n
  double leakage = 0.0;         // energy above n_max
  double gradient_term = 0.0;   // hbar^2 lambda^2 ||grad g||^2 by radial quadrature
  double residual = 0.0;        // |Tr[L gamma] - (symbol_energy + leakage - gradient_term Tr gamma)|
};

KineticIdentity kinetic_identity(const DensityMatrix& gamma, const PhaseSpaceDensity& m, const Localizer& loc);

// Lemma-style trace correction of a one-body symbol bounded by the Pauli cap 1/(2 pi l_b^2 N).
struct MassCorrection {
  PhaseSpaceDensity m;
  double tau = 0.0;
  int n1 = 0;
  bool added = false;     // deficit case
  double change_sup = 0.0;
  double trace = 0.0;
};

// n1 = smallest integer with n1 L^2 / (2 pi l_b^2 N) > 1.
int correction_level(const TorusConfig& cfg);

// Works on the resolved levels; the result carries no overflow.
MassCorrection mass_correct(const PhaseSpaceDensity& m, const TorusConfig& cfg, const Localizer& loc);

}  // namespace landau
