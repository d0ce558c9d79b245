#pragma once
#include <array>
#include <optional>
#include <vector>

#include "landau/config.hpp"
#include "landau/grid.hpp"

namespace landau {

// min int V rho + iint w(x-y) rho(x) rho(y) over 0 <= rho <= cap, int rho = mass.
struct QllProblem {
  RealField V;
  RealField w;  // even on the grid
  double mass = 0.0;
  double cap = 0.0;
  std::vector<cplx> w_hat;  // h^2 * DFT(w), filled by make_qll_problem

  const Grid& grid() const { return V.grid(); }
};

// mass = r/(q+r), cap = 1/((q+r) L^2). Rejects odd w, grid mismatch, q = r = 0.
QllProblem make_qll_problem(const TorusConfig& cfg, RealField V, RealField w);
// Explicit constraints; requires 0 <= mass <= cap L^2.
QllProblem make_qll_problem(RealField V, RealField w, double mass, double cap);

double qll_energy(const RealField& rho, const QllProblem& p);
RealField qll_gradient(const RealField& rho, const QllProblem& p);  // V + 2 w*rho

// Euclidean projection onto the constraint set: clip(rho - mu, 0, cap). mu by bisection
// on the mass, then solved exactly on the free cells.
RealField project_onto_domain(const RealField& rho, const QllProblem& p, double* mu = nullptr);

// KKT violation for the multiplier mu that minimizes it: |grad - mu| on free cells,
// (mu - grad)_+ where rho = 0, (grad - mu)_+ where rho = cap.
struct KktReport {
  double residual = 0.0;
  double mu = 0.0;
  int free_cells = 0;
};
KktReport kkt_report(const RealField& rho, const RealField& grad, double cap);

struct QllOptions {
  double tol = 1e-10;        // on both the fixed-point and the KKT residual
  int max_iterations = 20000;
  double armijo = 1e-4;
  double backtrack = 0.5;
  double min_step = 1e-12;
  double max_step = 1e12;
  std::optional<RealField> start;  // projected before use
};

struct QllLogRecord {
  int iteration = 0;
  double energy = 0.0;
  double residual = 0.0;
  double kkt = 0.0;
  double step = 0.0;
};

struct QllSolution {
  RealField rho;
  double energy = 0.0;
  double kkt_residual = 0.0;
  double residual = 0.0;  // ||rho - P(rho - s grad)||_inf / s at the last step s
  double mu = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<QllLogRecord> log;
};

// Projected gradient, Barzilai-Borwein steps with monotone Armijo backtracking.
QllSolution minimize_qll(const QllProblem& p, const QllOptions& opts = {});

// Greedy fill for w = 0: cells sorted by V ascending, ties by cell index.
RealField bathtub_oracle(const RealField& V, double mass, double cap);

struct FilledLevelConstants {
  double E_qr = 0.0;  // (q^2 + 2qr + r)/(q + r)
  double E_V = 0.0;   // q/((q+r) L^2) int V
  double E_w = 0.0;   // (q^2 + 2qr)/((q+r)^2 L^4) iint w
};
FilledLevelConstants filled_level_constants(const TorusConfig& cfg, const RealField& V, const RealField& w);

// |E_sc[m_rho] - (hbar b E^{q,r} + E_V + E_w + E_qLL[rho])|, absolute; `scale` receives the
// magnitude used for relative comparisons.
double decomposition_check(const RealField& rho, const TorusConfig& cfg, const RealField& V, const RealField& w,
                           double* scale = nullptr);

}  // namespace landau
