#pragma once
#include <vector>

#include "landau/config.hpp"
#include "landau/grid.hpp"
#include "landau/theta.hpp"

namespace landau {

struct OrbitalIndex {
  int n = 0;
  int l = 0;
};

enum class EvalMethod { direct, poisson };
enum class Ladder { raise, lower };

// c_n = (-i/sqrt 2)^n / (pi^{1/4} sqrt(n!))
cplx orbital_constant(int n);
// Constant of the resummed form: pi^{1/4} 2^{(1-n)/2} / sqrt(n!).
cplx poisson_constant(int n);

// A state at fixed intra-level index l in Landau gauge:
//   (L l_b)^{-1/2} e^{2 i pi l x/L} sum_k e^{2 i pi k d x/L} P(u_k) e^{-u_k^2/2},
//   u_k = (y + kL + lL/d)/l_b,  P = sum_j alpha_j H_j.
// psi_{nl} has alpha = c_n e_n; a and a^dagger act on alpha in closed form.
struct LandauSeries {
  int l = 0;
  std::vector<cplx> alpha;
};

void check_index(OrbitalIndex idx, const TorusConfig& cfg);

LandauSeries orbital_series(OrbitalIndex idx);
LandauSeries apply_ladder(const LandauSeries& s, Ladder which);

cplx evaluate(const LandauSeries& s, Point z, const TorusConfig& cfg, double tol = 1e-14,
              TruncationPolicy* used = nullptr);
ComplexField sample(const LandauSeries& s, const TorusConfig& cfg, const Grid& grid,
                    double tol = 1e-14, TruncationPolicy* used = nullptr);

// psi_{nl}(z) by the direct lattice sum or by its Poisson resummation.
cplx eigenfunction(OrbitalIndex idx, Point z, const TorusConfig& cfg, double tol = 1e-14,
                   EvalMethod method = EvalMethod::direct, TruncationPolicy* used = nullptr);

// (a psi_{nl})(z) or (a^dagger psi_{nl})(z), term by term.
cplx apply_ladder(OrbitalIndex idx, Point z, const TorusConfig& cfg, Ladder which,
                  double tol = 1e-14);

// Lowest-level orbital through the Jacobi theta function (cross-check of the sum form).
cplx lll_theta_form(int l, Point z, const TorusConfig& cfg, double tol = 1e-15);

struct OrbitalValidation {
  double gram_deviation = 0.0;       // max |Gram - Id|
  double boundary_residual = 0.0;    // magnetic-periodic conditions at edge samples
  double ladder_residual = 0.0;      // grid sup-norm of ladder identities
  double periodicity_residual = 0.0; // |psi| shifts by L/d in x and L in y
  double kinetic_residual = 0.0;     // relative error of 2 hbar b (|a psi|^2 + 1/2)
};

struct OrbitalSetOptions {
  double gram_tol = 1e-8;
  double boundary_tol = 1e-10;
  double ladder_tol = 1e-8;
  double periodicity_tol = 1e-10;
  double kinetic_tol = 1e-8;
  int edge_samples = 64;
  bool validate = true;
};

// Grid samples of psi_{nl}, n <= n_max, in canonical order a = n d + l.
struct OrbitalSet {
  TorusConfig config;
  int n_max = 0;
  Grid grid;
  std::vector<ComplexField> samples;
  TruncationPolicy policy;
  std::vector<cplx> c;        // c_n
  std::vector<cplx> c_tilde;  // resummed constants
  OrbitalValidation validation;

  int count() const { return int(samples.size()); }
  int index(int n, int l) const { return n * config.d + l; }
  OrbitalIndex at(int a) const { return {a / config.d, a % config.d}; }
  const ComplexField& operator[](int a) const { return samples[std::size_t(a)]; }
};

// Samples and validates; throws ValidationError naming the failing diagnostic.
OrbitalSet build_orbital_set(const TorusConfig& cfg, int n_max, const Grid& grid,
                             double tol = 1e-14, const OrbitalSetOptions& opts = {});

// Landau-gauge magnetic translation e^{-i y0 x / l_b^2} f(. - z0) of a
// magnetic-periodic field. z0 must be a grid multiple unless interpolate is set,
// in which case spectral shifts are used along each axis.
ComplexField magnetic_translate(const ComplexField& f, Point z0, const TorusConfig& cfg,
                                bool interpolate = false);

}  // namespace landau
