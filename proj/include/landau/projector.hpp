#pragma once
#include <array>
#include <vector>

#include <Eigen/Dense>

#include "landau/config.hpp"
#include "landau/grid.hpp"
#include "landau/localizer.hpp"
#include "landau/orbitals.hpp"
#include "landau/theta.hpp"

namespace landau {

// Truncation of the double (k, q) sums: k runs over |u_k| <= window, where
// u_k = (x_1 + k L/d)/l_b, and the inner q sum keeps |u_k + q L/l_b| <= window.
// policy.K counts window / (L/(d l_b)) steps; policy.tail_bound bounds the dropped part.
struct PairTruncation {
  double window = 0.0;
  TruncationPolicy policy;
};

// Kernel of the level-n projector in Landau gauge:
//   e^{i(y1 y2 - x1 x2)/l_b^2} / (||h_n||^2 L l_b)
//   sum_{k,q} h_n(u_k(x1)) h_n(u_k(y1) + qL/l_b) e^{2 i pi k (y2-x2)/L + 2 i pi d q y2/L}.
struct ProjectorKernel {
  int n = 0;
  TorusConfig config;
  PairTruncation trunc;

  cplx operator()(Point x, Point y) const;
};

ProjectorKernel make_projector_kernel(int n, const TorusConfig& cfg, double tol = 1e-14);
cplx projector_kernel(int n, Point x, Point y, const TorusConfig& cfg, double tol = 1e-14);

// K(xs_i, ys_j). Hermite values are tabulated once per point and the k sum is
// a matrix product.
Eigen::MatrixXcd kernel_matrix(const ProjectorKernel& K, const std::vector<Point>& xs,
                               const std::vector<Point>& ys);
// Square version on one point set; Hermiticity is enforced by averaging with the
// adjoint, and a ValidationError is raised if that moves any entry by > 1e-12 max|K|.
Eigen::MatrixXcd kernel_matrix(const ProjectorKernel& K, const std::vector<Point>& pts);

// Diagonal Pi_n(z,z) on a grid, together with the deviation 2 pi l_b^2 Pi_n(z,z) - 1
// evaluated without cancellation: the q = 0 part by Poisson summation, the rest directly.
struct DiagonalField {
  RealField values;
  RealField deviation;
  double sup_deviation = 0.0;
  double min_value = 0.0;
  PairTruncation trunc;
};

DiagonalField diagonal_field(int n, const TorusConfig& cfg, const Grid& grid, double tol = 1e-14);

// (pi Pi_n)(z,z) for the kinetic momentum pi = -i hbar grad - A, A = (-b y, 0).
// The components carry the factor b; the q = 0 part is Poisson-resummed.
struct MomentumDiagonal {
  ComplexField px, py;
  std::array<cplx, 2> reference{};  // whole-plane value
  double sup_deviation = 0.0;       // sup |(pi Pi_n)(z,z) - reference| / b
};

MomentumDiagonal momentum_diagonal(int n, const TorusConfig& cfg, const Grid& grid, double tol = 1e-14);

// int (h_n'(u), u h_n(u)) h_n(u) e^{-u^2} du by composite Simpson quadrature.
std::array<double, 2> hermite_reference_integral(int n);

// (b / l_b) / (2 pi ||h_n||^2) * int (i h_n', u h_n) h_n e^{-u^2} du
std::array<cplx, 2> momentum_reference(int n, const TorusConfig& cfg);

// Pi_{n,R} = g(. - R) Pi_n g(. - R) = sum_l |g_R psi_{nl}><g_R psi_{nl}|.
class LocalizedProjector {
 public:
  explicit LocalizedProjector(std::vector<ComplexField> vectors);

  ComplexField apply(const ComplexField& f) const;
  double trace() const;
  // <f, Pi f> / <f, f>
  double rayleigh(const ComplexField& f) const;
  const std::vector<ComplexField>& vectors() const { return v_; }

 private:
  std::vector<ComplexField> v_;
};

// R must be a grid point.
LocalizedProjector localized_projector(const OrbitalSet& set, int n, Point R, const Localizer& loc);

// sup_R |Tr[Pi_{n,R}] 2 pi l_b^2 - 1| = sup_R |int g_R^2 (2 pi l_b^2 Pi_n(z,z) - 1)|.
double localized_trace_error(const DiagonalField& diag, const Localizer& loc);

// Reconstruction of f through sum_{n <= n_max} int dR Pi_{n,R} using every orbital of the set.
// leakage = (||f||^2 - int dR ||P g_R f||^2)^{1/2} bounds ||f - recon|| exactly.
struct IdentityCheck {
  ComplexField reconstruction;
  double residual = 0.0;
  double leakage = 0.0;
};

IdentityCheck resolution_of_identity(const OrbitalSet& set, const Localizer& loc, const ComplexField& f);

struct KernelStudyRow {
  int n = 0;
  int d = 0;
  int grid = 0;
  double l_b = 0.0;
  double lambda = 0.0;
  double deviation = 0.0;           // sup |2 pi l_b^2 Pi_n(z,z) - 1|
  double deviation_over_lb = 0.0;
  double momentum_deviation = 0.0;  // sup |(pi Pi_n)(z,z) - reference| / b
  double momentum_over_lb = 0.0;
  double reference_x = 0.0;         // int h_n' h_n e^{-u^2}
  double reference_y = 0.0;         // int u h_n^2 e^{-u^2}
  double trace_error = 0.0;         // |int Pi_n(z,z) - d| / d
  double localized_trace_error = 0.0;
};

// One row per (n, d) with L and hbar fixed; the grid is max(128, 8d) rounded up to a power of two.
std::vector<KernelStudyRow> kernel_convergence_study(const std::vector<int>& n_list,
                                                     const std::vector<int>& d_list,
                                                     double L = 1.0, double hbar = 1.0,
                                                     double tol = 1e-14);

// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace landau
