#pragma once
#include <cstdint>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "landau/config.hpp"
#include "landau/husimi.hpp"
#include "landau/orbitals.hpp"
#include "landau/potential.hpp"

namespace landau {

// Slater determinants over M orbitals (index n*d + l) with N particles, as bitmasks.
// |S> = c^dag_{i1} ... c^dag_{iN} |0> with i1 < ... < iN. Enumerated in increasing
// integer order (Gosper), which is the colex order; rank() inverts it.
struct FockBasis {
  int M = 0;
  int N = 0;
  std::vector<std::uint64_t> states;

  std::size_t size() const { return states.size(); }
  std::size_t rank(std::uint64_t mask) const;
};

constexpr std::size_t kDefaultDimensionBudget = 100000;

std::uint64_t binomial(int n, int k);
// ConfigError if M > 63, N > M, N < 1 or C(M, N) exceeds the budget.
std::shared_ptr<const FockBasis> make_fock_basis(int M, int N, std::size_t budget = kDefaultDimensionBudget);

struct FockVector {
  std::shared_ptr<const FockBasis> basis;
  Eigen::VectorXcd coeffs;
};

// <psi_a | V | psi_b> by grid quadrature; ValidationError if the raw matrix is not
// Hermitian to 1e-10 (relative to max |V_ab|, at least 1).
Eigen::MatrixXcd one_body_matrix(const RealField& V, const OrbitalSet& set);

// W[a,b,c,d] = iint conj(psi_a(x)) conj(psi_b(y)) w(x-y) psi_c(x) psi_d(y).
struct TwoBodyTensor {
  int M = 0;
  std::vector<cplx> W;

  cplx operator()(int a, int b, int c, int d) const {
    return W[((std::size_t(a) * M + b) * M + c) * M + d];
  }
  double max_abs() const;
  double hermiticity_residual() const;  // max |W[a,b,c,d] - conj(W[c,d,a,b])|
  double exchange_residual() const;     // max |W[a,b,c,d] - W[b,a,d,c]|
};

// Pair densities contracted against hat w (FFT); ConfigError unless w is even.
TwoBodyTensor two_body_tensor(const RealField& w, const OrbitalSet& set);

// H = sum_a E_{n(a)} n_a + sum V_ab c^dag_a c_b + (1/(N-1)) sum W[a,b,c,d] c^dag_a c^dag_b c_d c_c,
// the last term being (2/(N-1)) * (1/2) sum W c^dag c^dag c c. Matrix-free; rows are generated on demand.
// Two-body amplitudes below drop_tol * max are skipped (they are rounding residue of selection rules).
class Hamiltonian {
 public:
  Hamiltonian(const TorusConfig& cfg, int n_max, const Eigen::MatrixXcd& V, const TwoBodyTensor& W,
              std::size_t budget = kDefaultDimensionBudget, double drop_tol = 1e-14);

  const FockBasis& basis() const { return *basis_; }
  std::shared_ptr<const FockBasis> basis_ptr() const { return basis_; }
  std::size_t dim() const { return basis_->size(); }
  int particles() const { return basis_->N; }

  Eigen::VectorXcd apply(const Eigen::VectorXcd& x) const;
  Eigen::MatrixXcd dense() const;
  const Eigen::VectorXd& diagonal() const { return diag_; }
  // max_T sum_S |H_TS|, an upper bound for ||H||
  double norm_bound() const;

 private:
  struct Move {
    int a, b;
    cplx amp;
  };
  template <class F>
  void row(std::size_t t, F&& f) const;

  std::shared_ptr<const FockBasis> basis_;
  Eigen::VectorXd diag_;
  std::vector<std::vector<std::pair<int, cplx>>> hops_;  // [c] -> (a, V_ac), a != c
  std::vector<std::vector<Move>> pairs_;                  // [c*M+d], c < d -> off-diagonal moves
  std::vector<double> pair_diag_;                         // [c*M+d] -> U[(c,d),(c,d)]
};

Hamiltonian build_hamiltonian(const TorusConfig& cfg, int n_max, const Eigen::MatrixXcd& V, const TwoBodyTensor& W,
                              std::size_t budget = kDefaultDimensionBudget);

struct GroundStateOptions {
  std::size_t dense_limit = 2000;
  int krylov = 200;       // Lanczos vectors kept before an explicit restart
  int max_restarts = 30;
  double tol = 1e-10;     // ||H psi - E psi|| <= tol ||H||
  std::uint64_t seed = 1;
};

struct GroundState {
  double energy = 0.0;
  FockVector psi;
  double residual = 0.0;  // ||H psi - E psi||
  double norm = 0.0;      // the ||H|| used in the stopping rule
  int iterations = 0;     // matrix-vector products
  std::string method;     // "dense" or "lanczos"
};

// ConvergenceError when Lanczos exhausts its restarts.
GroundState ground_state(const Hamiltonian& H, const GroundStateOptions& opts = {});

double expectation(const Hamiltonian& H, const FockVector& psi);

// gamma^(1) (k = 1, trace 1) with matrix(i,j) = <psi| c^dag_j c_i |psi>/N, or
// gamma^(2) (k = 2, trace 1) with matrix((a,b),(c,d)) = <psi| c^dag_c c^dag_d c_b c_a |psi>/(N(N-1)).
DensityMatrix reduced_density(const FockVector& psi, int k, std::shared_ptr<const OrbitalSet> set);

// Determinant of the orbitals given as columns of C (M x N): amplitude det C[S, :].
FockVector slater_state(std::shared_ptr<const FockBasis> basis, const Eigen::MatrixXcd& C);

// Tr[(L + V) gamma] + Tr[w gamma_2], gamma_2 = N/(N-1) (1 - Ex) gamma (x) gamma.
// ValidationError unless Tr gamma = 1 and 0 <= gamma <= 1/N (1e-10).
double hartree_fock_energy(const DensityMatrix& gamma, const TorusConfig& cfg, const Eigen::MatrixXcd& V,
                           const TwoBodyTensor& W);

// Tr[Ex gamma (x) gamma] by contracting the swapped tensor entrywise.
cplx exchange_trace(const Eigen::MatrixXcd& gamma);

// gamma^(2) of the determinant from correlators vs N/(N-1)(1 - Ex) gamma^(1)(x)gamma^(1);
// max entry difference. ConfigError unless the columns of C are orthonormal to 1e-12.
double wick_check(const Eigen::MatrixXcd& C, std::shared_ptr<const OrbitalSet> set);

// Tr[(L + V) gamma1] + Tr[w gamma2] for reduced densities of the same state.
double reduced_energy(const DensityMatrix& g1, const DensityMatrix& g2, const TorusConfig& cfg,
                      const Eigen::MatrixXcd& V, const TwoBodyTensor& W);

// rho(x) = sum gamma_ij psi_i(x) conj(psi_j(x)), integrating to Tr gamma.
RealField one_body_density(const DensityMatrix& gamma);

// Ground-state file: "LTGS" magic, u32 version, u32 d, u32 n_max, u32 N, u64 dim, u64 orbital-order
// hash, then dim (re, im) pairs; all little-endian, doubles IEEE-754.
std::uint64_t orbital_order_hash(int d, int n_max, int N);
void save_ground_state(const std::string& path, const FockVector& psi, int d, int n_max);
FockVector load_ground_state(const std::string& path, int d, int n_max);

struct MeanFieldRow {
  int d = 0;
  int N = 0;
  int n_max = 0;
  bool reduced_levels = false;  // fell back to a smaller n_max to fit the budget
  std::size_t dim = 0;
  std::string method;
  double residual = 0.0;
  double norm = 0.0;  // ||H|| used by the stopping rule
  double energy_per_particle = 0.0;
  double E_qr = 0.0, E_V = 0.0, E_w = 0.0, E_qll = 0.0;
  double prediction = 0.0;      // hbar b E^{q,r} + E_V + E_w + E_qLL^0
  double gap = 0.0;             // |E/N - prediction|
  double l1_distance = 0.0;     // || rho_psi - (q/(L^2 (q+r)) + rho*) ||_1
  // E/N at n_max minus E/N at n_max + 1 (NaN when n_max + 1 is over budget)
  double truncation_bias = std::numeric_limits<double>::quiet_NaN();
  // E/N at the fallback n_max minus E/N at n_max, for rows that did not fall back
  double fallback_bias = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> level_occupation;  // Husimi mass per level 0..n_max
  double overflow = 0.0;                 // Husimi mass above n_max
  double occupation_above_q = 0.0;       // 1 - sum_{n <= q} level mass
  RealField density;                     // rho_psi^(1)
  FockVector psi;
};

struct MeanFieldOptions {
  int q = 1;
  std::vector<std::pair<int, int>> sweep;  // (d, N)
  PotentialSpec V, w;
  int n_max = 3;
  int fallback_n_max = 2;
  int grid = 64;
  double L = 1.0;
  double hbar = 1.0;
  double lambda = 0.0;  // 0: default_lambda(d)
  std::size_t budget = kDefaultDimensionBudget;
  bool bias = true;
  GroundStateOptions solver;
};

// Finite-N ground states against the mean-field prediction. ConfigError if r differs across the sweep.
std::vector<MeanFieldRow> mean_field_study(const MeanFieldOptions& opts);

}  // namespace landau
