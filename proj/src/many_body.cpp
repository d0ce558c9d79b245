#include "landau/many_body.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>

#include "landau/errors.hpp"
#include "landau/fft.hpp"
#include "landau/localizer.hpp"
#include "landau/parallel.hpp"
#include "landau/qll.hpp"
#include "landau/reduce.hpp"

namespace landau {
namespace {

using Mask = std::uint64_t;

constexpr Mask bit(int i) { return Mask{1} << i; }

// parity of the occupied orbitals below i: the sign of moving c_i / c^dag_i to its slot
inline int parity_below(Mask m, int i) { return std::popcount(m & (bit(i) - 1)) & 1; }

const std::array<std::array<std::uint64_t, 65>, 65>& binomial_table() {
  static const auto table = [] {
    std::array<std::array<std::uint64_t, 65>, 65> t{};
    for (int n = 0; n <= 64; ++n) {
      t[n][0] = 1;
      for (int k = 1; k <= n; ++k) t[n][k] = t[n - 1][k - 1] + (k <= n - 1 ? t[n - 1][k] : 0);
    }
    return t;
  }();
  return table;
}

template <class F>
void for_each_bit(Mask m, F&& f) {
  while (m) {
    f(std::countr_zero(m));
    m &= m - 1;
  }
}

// Chunked accumulation with private matrices summed in chunk order. The chunk count is
// fixed, so results do not depend on the number of threads.
template <class F>
Eigen::MatrixXcd accumulate_chunks(std::size_t n, Eigen::Index rows, Eigen::Index cols, F&& f) {
  const std::size_t chunks = std::max<std::size_t>(1, std::min<std::size_t>(64, n));
  std::vector<Eigen::MatrixXcd> part(chunks, Eigen::MatrixXcd::Zero(rows, cols));
  parallel_for(chunks, [&](std::size_t c) {
    for (std::size_t s = n * c / chunks; s < n * (c + 1) / chunks; ++s) f(s, part[c]);
  });
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(rows, cols);
  for (const auto& p : part) out += p;
  return out;
}

void put_u32(std::ostream& o, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  o.write(reinterpret_cast<const char*>(b), 4);
}

void put_u64(std::ostream& o, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  o.write(reinterpret_cast<const char*>(b), 8);
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) throw ValidationError("ground-state file truncated");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= std::uint32_t(b[i]) << (8 * i);
  return v;
}

std::uint64_t get_u64(std::istream& in) {
  unsigned char b[8];
  if (!in.read(reinterpret_cast<char*>(b), 8)) throw ValidationError("ground-state file truncated");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t(b[i]) << (8 * i);
  return v;
}

void require_tensor(const TwoBodyTensor& W, int M) {
  if (W.M != M || W.W.size() != std::size_t(M) * M * M * M)
    throw ConfigError("two-body tensor does not match the orbital count");
}

double one_body_trace(const Eigen::MatrixXcd& g, const TorusConfig& cfg, const Eigen::MatrixXcd& V) {
  double e = 0.0;
  for (Eigen::Index a = 0; a < g.rows(); ++a) e += cfg.level_energy(int(a) / cfg.d) * g(a, a).real();
  // Tr[V gamma] = sum gamma_ij V_ji
  return e + (g.cwiseProduct(V.transpose())).sum().real();
}

}  // namespace

std::uint64_t binomial(int n, int k) {
  if (n < 0 || k < 0 || k > n || n > 64) return 0;
  return binomial_table()[n][k];
}

std::size_t FockBasis::rank(Mask mask) const {
  const auto& t = binomial_table();
  std::size_t r = 0;
  int k = 1;
  for_each_bit(mask, [&](int p) { r += t[p][k++]; });
  return r;
}

std::shared_ptr<const FockBasis> make_fock_basis(int M, int N, std::size_t budget) {
  if (M < 1 || M > 63) throw ConfigError("orbital count must lie in [1, 63]");
  if (N < 1 || N > M) throw ConfigError("particle number must lie in [1, orbital count]");
  const std::uint64_t dim = binomial(M, N);
  if (dim > budget)
    throw ConfigError("Fock dimension C(" + std::to_string(M) + "," + std::to_string(N) + ") = " +
                      std::to_string(dim) + " exceeds the budget " + std::to_string(budget));
  auto b = std::make_shared<FockBasis>();
  b->M = M;
  b->N = N;
  b->states.reserve(dim);
  Mask v = bit(N) - 1;
  for (std::uint64_t i = 0; i < dim; ++i) {
    b->states.push_back(v);
    const Mask t = v | (v - 1);
    v = (t + 1) | (((~t & (t + 1)) - 1) >> (std::countr_zero(v) + 1));
  }
  return b;
}

Eigen::MatrixXcd one_body_matrix(const RealField& V, const OrbitalSet& set) {
  require_same_grid(V.grid(), set.grid);
  const int M = set.count();
  std::vector<ComplexField> Vpsi;
  Vpsi.reserve(std::size_t(M));
  for (int b = 0; b < M; ++b) {
    ComplexField f(set.grid);
    for (std::size_t k = 0; k < f.values().size(); ++k) f[k] = V[k] * set[b][k];
    Vpsi.push_back(std::move(f));
  }
  Eigen::MatrixXcd out(M, M);
  parallel_for(std::size_t(M) * M, [&](std::size_t t) {
    const int a = int(t / M), b = int(t % M);
    out(a, b) = inner(set[a], Vpsi[std::size_t(b)]);
  });
  const double scale = std::max(1.0, out.cwiseAbs().maxCoeff());
  if ((out - out.adjoint()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw ValidationError("one-body matrix is not Hermitian to 1e-10");
  return 0.5 * (out + out.adjoint());
}

double TwoBodyTensor::max_abs() const {
  double m = 0.0;
  for (const auto& v : W) m = std::max(m, std::abs(v));
  return m;
}

double TwoBodyTensor::hermiticity_residual() const {
  double r = 0.0;
  for (int a = 0; a < M; ++a)
    for (int b = 0; b < M; ++b)
      for (int c = 0; c < M; ++c)
        for (int d = 0; d < M; ++d) r = std::max(r, std::abs((*this)(a, b, c, d) - std::conj((*this)(c, d, a, b))));
  return r;
}

double TwoBodyTensor::exchange_residual() const {
  double r = 0.0;
  for (int a = 0; a < M; ++a)
    for (int b = 0; b < M; ++b)
      for (int c = 0; c < M; ++c)
        for (int d = 0; d < M; ++d) r = std::max(r, std::abs((*this)(a, b, c, d) - (*this)(b, a, d, c)));
  return r;
}

TwoBodyTensor two_body_tensor(const RealField& w, const OrbitalSet& set) {
  require_same_grid(w.grid(), set.grid);
  if (!is_even_on_grid(w)) throw ConfigError("interaction must be even, w(x) = w(-x)");
  const Grid& g = set.grid;
  const int n = g.size;
  const int M = set.count();
  const Eigen::Index G2 = Eigen::Index(g.count());
  const double h2 = g.spacing() * g.spacing();
  const std::vector<cplx> what = forward_transform(w);

  // columns a*M + c: rho_ac = conj(psi_a) psi_c; Q: w * rho
  Eigen::MatrixXcd P(G2, Eigen::Index(M) * M), Q(G2, Eigen::Index(M) * M);
  parallel_for(std::size_t(M) * M, [&](std::size_t t) {
    const int a = int(t / M), c = int(t % M);
    std::vector<cplx> f(g.count());
    for (std::size_t k = 0; k < f.size(); ++k) {
      f[k] = std::conj(set[a][k]) * set[c][k];
      P(Eigen::Index(k), Eigen::Index(t)) = f[k];
    }
    fft2(f, n, -1);
    const double s = h2 / (double(n) * n);
    for (std::size_t k = 0; k < f.size(); ++k) f[k] *= what[k] * s;
    fft2(f, n, +1);
    for (std::size_t k = 0; k < f.size(); ++k) Q(Eigen::Index(k), Eigen::Index(t)) = f[k];
  });
  // R(ac, bd) = h^2 sum_x rho_ac(x) (w*rho_bd)(x)
  const Eigen::MatrixXcd R = h2 * (P.transpose() * Q);
  TwoBodyTensor T;
  T.M = M;
  T.W.resize(std::size_t(M) * M * M * M);
  for (int a = 0; a < M; ++a)
    for (int b = 0; b < M; ++b)
      for (int c = 0; c < M; ++c)
        for (int d = 0; d < M; ++d)
          T.W[((std::size_t(a) * M + b) * M + c) * M + d] = R(Eigen::Index(a) * M + c, Eigen::Index(b) * M + d);
  return T;
}

Hamiltonian::Hamiltonian(const TorusConfig& cfg, int n_max, const Eigen::MatrixXcd& V, const TwoBodyTensor& W,
                         std::size_t budget, double drop_tol) {
  if (n_max < 0) throw ConfigError("n_max must be >= 0");
  const int M = (n_max + 1) * cfg.d;
  if (V.rows() != M || V.cols() != M) throw ConfigError("one-body matrix does not match the orbital count");
  require_tensor(W, M);
  if (cfg.N < 2) throw ConfigError("the interacting Hamiltonian needs N >= 2");
  basis_ = make_fock_basis(M, cfg.N, budget);

  const double kappa = 1.0 / double(cfg.N - 1);
  hops_.assign(std::size_t(M), {});
  for (int c = 0; c < M; ++c)
    for (int a = 0; a < M; ++a)
      if (a != c && V(a, c) != cplx{}) hops_[std::size_t(c)].push_back({a, V(a, c)});

  pairs_.assign(std::size_t(M) * M, {});
  pair_diag_.assign(std::size_t(M) * M, 0.0);
  const double cut = drop_tol * 2.0 * kappa * W.max_abs();
  for (int c = 0; c < M; ++c)
    for (int d = c + 1; d < M; ++d) {
      auto& list = pairs_[std::size_t(c) * M + d];
      for (int a = 0; a < M; ++a)
        for (int b = a + 1; b < M; ++b) {
          const cplx u = 2.0 * kappa * (W(a, b, c, d) - W(a, b, d, c));
          if (a == c && b == d) {
            pair_diag_[std::size_t(c) * M + d] = u.real();
          } else if (std::abs(u) > cut) {
            list.push_back({a, b, u});
          }
        }
    }

  std::vector<double> one(static_cast<std::size_t>(M));
  for (int a = 0; a < M; ++a) one[std::size_t(a)] = cfg.level_energy(a / cfg.d) + V(a, a).real();
  const std::size_t D = basis_->size();
  diag_.resize(Eigen::Index(D));
  parallel_for(D, [&](std::size_t t) {
    const Mask T = basis_->states[t];
    double e = 0.0;
    for_each_bit(T, [&](int c) {
      e += one[std::size_t(c)];
      for_each_bit(T & ~(bit(c + 1) - 1), [&](int d) { e += pair_diag_[std::size_t(c) * M + d]; });
    });
    diag_[Eigen::Index(t)] = e;
  });
}

// f(s, <S|H|T>) for every S reached from T, the diagonal included.
template <class F>
void Hamiltonian::row(std::size_t t, F&& f) const {
  const int M = basis_->M;
  const Mask T = basis_->states[t];
  f(t, cplx(diag_[Eigen::Index(t)], 0.0));
  for_each_bit(T, [&](int c) {
    const Mask T1 = T ^ bit(c);
    const int s1 = parity_below(T, c);
    for (const auto& [a, v] : hops_[std::size_t(c)]) {
      if (T1 & bit(a)) continue;
      const int s = s1 ^ parity_below(T1, a);
      f(basis_->rank(T1 | bit(a)), s ? -v : v);
    }
  });
  for_each_bit(T, [&](int c) {
    const int s1 = parity_below(T, c);
    const Mask T1 = T ^ bit(c);
    for_each_bit(T1 & ~(bit(c + 1) - 1), [&](int d) {
      const int s2 = s1 ^ parity_below(T1, d);
      const Mask T2 = T1 ^ bit(d);
      for (const Move& mv : pairs_[std::size_t(c) * M + d]) {
        if ((T2 & bit(mv.a)) || (T2 & bit(mv.b))) continue;
        const int s3 = s2 ^ parity_below(T2, mv.b);
        const Mask T3 = T2 | bit(mv.b);
        const int s = s3 ^ parity_below(T3, mv.a);
        f(basis_->rank(T3 | bit(mv.a)), s ? -mv.amp : mv.amp);
      }
    });
  });
}

Eigen::VectorXcd Hamiltonian::apply(const Eigen::VectorXcd& x) const {
  if (std::size_t(x.size()) != dim()) throw ConfigError("vector does not match the Fock dimension");
  Eigen::VectorXcd y(x.size());
  // y_T = sum_S H_TS x_S with H_TS = conj(<S|H|T>)
  parallel_for(dim(), [&](std::size_t t) {
    cplx acc{};
    row(t, [&](std::size_t s, cplx h) { acc += std::conj(h) * x[Eigen::Index(s)]; });
    y[Eigen::Index(t)] = acc;
  });
  return y;
}

Eigen::MatrixXcd Hamiltonian::dense() const {
  const Eigen::Index D = Eigen::Index(dim());
  Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(D, D);
  parallel_for(dim(), [&](std::size_t t) {
    row(t, [&](std::size_t s, cplx h) { H(Eigen::Index(s), Eigen::Index(t)) += h; });
  });
  return H;
}

double Hamiltonian::norm_bound() const {
  std::vector<double> r(dim());
  parallel_for(dim(), [&](std::size_t t) {
    double acc = 0.0;
    row(t, [&](std::size_t, cplx h) { acc += std::abs(h); });
    r[t] = acc;
  });
  return r.empty() ? 0.0 : *std::max_element(r.begin(), r.end());
}

Hamiltonian build_hamiltonian(const TorusConfig& cfg, int n_max, const Eigen::MatrixXcd& V, const TwoBodyTensor& W,
                              std::size_t budget) {
  return Hamiltonian(cfg, n_max, V, W, budget);
}

namespace {

GroundState finish(const Hamiltonian& H, Eigen::VectorXcd v, double theta, double norm, int mv, const char* method) {
  v.normalize();
  const Eigen::VectorXcd r = H.apply(v) - theta * v;
  GroundState gs;
  gs.energy = theta;
  gs.psi = FockVector{H.basis_ptr(), std::move(v)};
  gs.residual = r.norm();
  gs.norm = norm;
  gs.iterations = mv + 1;
  gs.method = method;
  return gs;
}

// Lanczos with full reorthogonalization and thick restarts: the projected matrix is
// accumulated from explicit inner products, so restarted Ritz blocks need no special case.
GroundState lanczos(const Hamiltonian& H, const GroundStateOptions& o) {
  const Eigen::Index n = Eigen::Index(H.dim());
  const int K = std::max(8, std::min<int>(o.krylov, int(n)));
  const int keep = std::max(1, K / 4);
  std::mt19937_64 rng(o.seed);
  std::normal_distribution<double> nd;
  auto random_vector = [&] {
    Eigen::VectorXcd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = cplx(nd(rng), nd(rng));
    return v;
  };

  Eigen::MatrixXcd Vb(n, K + 1);
  Eigen::MatrixXcd Hm = Eigen::MatrixXcd::Zero(K, K);
  Vb.col(0) = random_vector().normalized();
  int j0 = 0;  // columns already carrying their projected entries
  int mv = 0;
  double norm = 0.0;
  for (int restart = 0; restart <= o.max_restarts; ++restart) {
    for (int j = j0; j < K; ++j) {
      Eigen::VectorXcd w = H.apply(Vb.col(j));
      ++mv;
      Eigen::VectorXcd c = Vb.leftCols(j + 1).adjoint() * w;
      w.noalias() -= Vb.leftCols(j + 1) * c;
      const Eigen::VectorXcd c2 = Vb.leftCols(j + 1).adjoint() * w;
      w.noalias() -= Vb.leftCols(j + 1) * c2;
      c += c2;
      Hm.block(0, j, j + 1, 1) = c;
      Hm.block(j, 0, 1, j + 1) = c.adjoint();
      Hm(j, j) = c[j].real();

      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(Hm.topLeftCorner(j + 1, j + 1));
      const auto& th = es.eigenvalues();
      norm = std::max({norm, std::abs(th[0]), std::abs(th[j])});
      double beta = w.norm();
      const double est = beta * std::abs(es.eigenvectors()(j, 0));
      const bool breakdown = beta <= 1e-14 * std::max(norm, 1.0);
      if (est <= 0.5 * o.tol * norm || breakdown || j + 1 == int(n)) {
        const Eigen::VectorXcd y = Vb.leftCols(j + 1) * es.eigenvectors().col(0);
        GroundState gs = finish(H, y, th[0], norm, mv, "lanczos");
        mv = gs.iterations;
        if (gs.residual <= o.tol * norm || j + 1 == int(n)) return gs;
        if (breakdown) {
          // invariant subspace without the answer: continue from a fresh direction
          w = random_vector();
          for (int pass = 0; pass < 2; ++pass) w -= Vb.leftCols(j + 1) * (Vb.leftCols(j + 1).adjoint() * w);
          beta = w.norm();
        }
      }
      Vb.col(j + 1) = w / beta;
      if (j + 1 == K) {
        // thick restart on the lowest Ritz vectors plus the residual direction
        const Eigen::MatrixXcd S = es.eigenvectors().leftCols(keep);
        const Eigen::MatrixXcd Y = Vb.leftCols(K) * S;
        const Eigen::VectorXcd r = Vb.col(K);
        Vb.leftCols(keep) = Y;
        Vb.col(keep) = r;
        Hm.setZero();
        for (int i = 0; i < keep; ++i) Hm(i, i) = th[i];
        // couplings of the residual direction are recomputed when column `keep` is expanded
        j0 = keep;
      }
    }
  }
  throw ConvergenceError("Lanczos did not reach the residual tolerance within the restart budget");
}

}  // namespace

GroundState ground_state(const Hamiltonian& H, const GroundStateOptions& opts) {
  if (H.dim() <= opts.dense_limit) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H.dense());
    const auto& th = es.eigenvalues();
    const double norm = std::max(std::abs(th[0]), std::abs(th[th.size() - 1]));
    GroundState gs = finish(H, es.eigenvectors().col(0), th[0], norm, 0, "dense");
    if (gs.residual > opts.tol * std::max(norm, 1e-300))
      throw ConvergenceError("dense eigensolver residual above tolerance");
    return gs;
  }
  return lanczos(H, opts);
}

double expectation(const Hamiltonian& H, const FockVector& psi) {
  return psi.coeffs.dot(H.apply(psi.coeffs)).real() / psi.coeffs.squaredNorm();
}

DensityMatrix reduced_density(const FockVector& psi, int k, std::shared_ptr<const OrbitalSet> set) {
  if (!psi.basis) throw ConfigError("Fock vector without a basis");
  const FockBasis& B = *psi.basis;
  if (!set || set->count() != B.M) throw ConfigError("orbital set does not match the Fock basis");
  if (std::size_t(psi.coeffs.size()) != B.size()) throw ConfigError("Fock vector does not match its basis");
  const int M = B.M, N = B.N;
  const double nrm = psi.coeffs.squaredNorm();
  if (!(nrm > 0.0)) throw ConfigError("zero Fock vector");
  const Eigen::VectorXcd& x = psi.coeffs;

  if (k == 1) {
    // G(i, j) = <psi| c^dag_j c_i |psi>
    Eigen::MatrixXcd G = accumulate_chunks(B.size(), M, M, [&](std::size_t s, Eigen::MatrixXcd& acc) {
      const Mask S = B.states[s];
      const cplx xs = x[Eigen::Index(s)];
      if (xs == cplx{}) return;
      for_each_bit(S, [&](int i) {
        const Mask S1 = S ^ bit(i);
        const int s1 = parity_below(S, i);
        for (int j = 0; j < M; ++j) {
          if (S1 & bit(j)) continue;
          const int sg = s1 ^ parity_below(S1, j);
          const cplx xt = x[Eigen::Index(B.rank(S1 | bit(j)))];
          acc(i, j) += (sg ? -1.0 : 1.0) * std::conj(xt) * xs;
        }
      });
    });
    return make_density_matrix(std::move(set), G / (nrm * N), 1);
  }
  if (k == 2) {
    if (N < 2) throw ConfigError("two-body density needs N >= 2");
    // G((a,b),(c,d)) = <psi| c^dag_c c^dag_d c_b c_a |psi>
    const Eigen::Index M2 = Eigen::Index(M) * M;
    Eigen::MatrixXcd G = accumulate_chunks(B.size(), M2, M2, [&](std::size_t s, Eigen::MatrixXcd& acc) {
      const Mask S = B.states[s];
      const cplx xs = x[Eigen::Index(s)];
      if (xs == cplx{}) return;
      for_each_bit(S, [&](int a) {
        const Mask S1 = S ^ bit(a);
        const int s1 = parity_below(S, a);
        for_each_bit(S1, [&](int b) {
          const Mask S2 = S1 ^ bit(b);
          const int s2 = s1 ^ parity_below(S1, b);
          for (int d = 0; d < M; ++d) {
            if (S2 & bit(d)) continue;
            const Mask S3 = S2 | bit(d);
            const int s3 = s2 ^ parity_below(S2, d);
            for (int c = 0; c < M; ++c) {
              if (S3 & bit(c)) continue;
              const int sg = s3 ^ parity_below(S3, c);
              const cplx xt = x[Eigen::Index(B.rank(S3 | bit(c)))];
              acc(Eigen::Index(a) * M + b, Eigen::Index(c) * M + d) += (sg ? -1.0 : 1.0) * std::conj(xt) * xs;
            }
          }
        });
      });
    });
    return make_density_matrix(std::move(set), G / (nrm * N * (N - 1)), 2);
  }
  throw ConfigError("reduced densities have body order 1 or 2");
}

FockVector slater_state(std::shared_ptr<const FockBasis> basis, const Eigen::MatrixXcd& C) {
  if (!basis) throw ConfigError("slater_state needs a basis");
  if (C.rows() != basis->M || C.cols() != basis->N) throw ConfigError("orbital matrix must be M x N");
  Eigen::VectorXcd x(Eigen::Index(basis->size()));
  parallel_for(basis->size(), [&](std::size_t s) {
    Eigen::MatrixXcd sub(basis->N, basis->N);
    int r = 0;
    for_each_bit(basis->states[s], [&](int a) { sub.row(r++) = C.row(a); });
    x[Eigen::Index(s)] = sub.determinant();
  });
  return FockVector{std::move(basis), std::move(x)};
}

cplx exchange_trace(const Eigen::MatrixXcd& g) {
  const Eigen::Index M = g.rows();
  // (gamma (x) gamma)((a,b),(c,d)) = gamma_ac gamma_bd; Ex swaps the row pair
  cplx t{};
  for (Eigen::Index a = 0; a < M; ++a)
    for (Eigen::Index b = 0; b < M; ++b) t += g(b, a) * g(a, b);
  return t;
}

double hartree_fock_energy(const DensityMatrix& gamma, const TorusConfig& cfg, const Eigen::MatrixXcd& V,
                           const TwoBodyTensor& W) {
  if (gamma.k != 1) throw ConfigError("Hartree-Fock energy takes a one-body density matrix");
  const Eigen::MatrixXcd& g = gamma.matrix;
  const int M = int(g.rows());
  const int N = cfg.N;
  if (N < 2) throw ConfigError("Hartree-Fock energy needs N >= 2");
  if (V.rows() != M) throw ConfigError("one-body matrix does not match the density matrix");
  require_tensor(W, M);
  if (std::abs(gamma.trace() - 1.0) > 1e-10) throw ValidationError("Tr gamma must be 1");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(g, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-10 || es.eigenvalues().maxCoeff() > 1.0 / N + 1e-10)
    throw ValidationError("gamma violates 0 <= gamma <= 1/N");

  cplx direct{}, exch{};
  for (int a = 0; a < M; ++a)
    for (int b = 0; b < M; ++b)
      for (int c = 0; c < M; ++c)
        for (int d = 0; d < M; ++d) {
          const cplx w = W(c, d, a, b);
          direct += g(a, c) * g(b, d) * w;
          exch += g(b, c) * g(a, d) * w;
        }
  return one_body_trace(g, cfg, V) + double(N) / (N - 1) * (direct - exch).real();
}

double reduced_energy(const DensityMatrix& g1, const DensityMatrix& g2, const TorusConfig& cfg,
                      const Eigen::MatrixXcd& V, const TwoBodyTensor& W) {
  if (g1.k != 1 || g2.k != 2) throw ConfigError("reduced_energy takes (gamma1, gamma2)");
  const int M = int(g1.matrix.rows());
  require_tensor(W, M);
  cplx e2{};
  for (int a = 0; a < M; ++a)
    for (int b = 0; b < M; ++b)
      for (int c = 0; c < M; ++c)
        for (int d = 0; d < M; ++d) e2 += g2.matrix(Eigen::Index(a) * M + b, Eigen::Index(c) * M + d) * W(c, d, a, b);
  return one_body_trace(g1.matrix, cfg, V) + e2.real();
}

double wick_check(const Eigen::MatrixXcd& C, std::shared_ptr<const OrbitalSet> set) {
  if (!set || C.rows() != set->count()) throw ConfigError("orbital matrix does not match the orbital set");
  const int N = int(C.cols());
  if (N < 2) throw ConfigError("Wick check needs N >= 2");
  const Eigen::MatrixXcd gram = C.adjoint() * C;
  if ((gram - Eigen::MatrixXcd::Identity(N, N)).cwiseAbs().maxCoeff() > 1e-12)
    throw ConfigError("Wick check needs orthonormal orbitals");
  const int M = int(C.rows());
  const FockVector psi = slater_state(make_fock_basis(M, N, std::numeric_limits<std::size_t>::max()), C);
  const DensityMatrix g2 = reduced_density(psi, 2, set);
  const Eigen::MatrixXcd g = C * C.adjoint() / double(N);
  const double f = double(N) / (N - 1);
  double r = 0.0;
  for (int a = 0; a < M; ++a)
    for (int b = 0; b < M; ++b)
      for (int c = 0; c < M; ++c)
        for (int d = 0; d < M; ++d) {
          const cplx wick = f * (g(a, c) * g(b, d) - g(b, c) * g(a, d));
          r = std::max(r, std::abs(g2.matrix(Eigen::Index(a) * M + b, Eigen::Index(c) * M + d) - wick));
        }
  return r;
}

RealField one_body_density(const DensityMatrix& gamma) {
  if (gamma.k != 1) throw ConfigError("one_body_density takes a one-body density matrix");
  const OrbitalSet& set = *gamma.basis;
  const int M = set.count();
  RealField rho(set.grid);
  parallel_for(set.grid.count(), [&](std::size_t k) {
    cplx acc{};
    for (int i = 0; i < M; ++i) {
      cplx row{};
      for (int j = 0; j < M; ++j) row += gamma.matrix(i, j) * std::conj(set[j][k]);
      acc += set[i][k] * row;
    }
    rho[k] = acc.real();
  });
  return rho;
}

std::uint64_t orbital_order_hash(int d, int n_max, int N) {
  // FNV-1a over the orbital labels (n, l) in storage order
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&](std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xffu;
      h *= 1099511628211ull;
    }
  };
  mix(std::uint64_t(d));
  mix(std::uint64_t(n_max));
  mix(std::uint64_t(N));
  for (int a = 0; a < (n_max + 1) * d; ++a) {
    mix(std::uint64_t(a / d));
    mix(std::uint64_t(a % d));
  }
  return h;
}

void save_ground_state(const std::string& path, const FockVector& psi, int d, int n_max) {
  if (!psi.basis || psi.basis->M != (n_max + 1) * d) throw ConfigError("Fock vector does not match (d, n_max)");
  std::ofstream o(path, std::ios::binary | std::ios::trunc);
  if (!o) throw ConfigError("cannot open " + path + " for writing");
  o.write("LTGS", 4);
  put_u32(o, 1);
  put_u32(o, std::uint32_t(d));
  put_u32(o, std::uint32_t(n_max));
  put_u32(o, std::uint32_t(psi.basis->N));
  put_u64(o, std::uint64_t(psi.coeffs.size()));
  put_u64(o, orbital_order_hash(d, n_max, psi.basis->N));
  for (Eigen::Index i = 0; i < psi.coeffs.size(); ++i) {
    put_u64(o, std::bit_cast<std::uint64_t>(psi.coeffs[i].real()));
    put_u64(o, std::bit_cast<std::uint64_t>(psi.coeffs[i].imag()));
  }
  if (!o) throw ConfigError("failed writing " + path);
}

FockVector load_ground_state(const std::string& path, int d, int n_max) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path);
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, "LTGS", 4) != 0) throw ValidationError("not a ground-state file");
  if (get_u32(in) != 1) throw ValidationError("unsupported ground-state file version");
  const int fd = int(get_u32(in)), fn = int(get_u32(in)), N = int(get_u32(in));
  if (fd != d || fn != n_max) throw ValidationError("ground-state file was written for a different (d, n_max)");
  const std::uint64_t dim = get_u64(in);
  if (get_u64(in) != orbital_order_hash(d, n_max, N)) throw ValidationError("orbital-order hash mismatch");
  auto basis = make_fock_basis((n_max + 1) * d, N, std::numeric_limits<std::size_t>::max());
  if (dim != basis->size()) throw ValidationError("ground-state dimension does not match C(M, N)");
  Eigen::VectorXcd x(static_cast<Eigen::Index>(dim));
  for (std::uint64_t i = 0; i < dim; ++i) {
    const double re = std::bit_cast<double>(get_u64(in));
    const double im = std::bit_cast<double>(get_u64(in));
    x[Eigen::Index(i)] = cplx(re, im);
  }
  return FockVector{std::move(basis), std::move(x)};
}

namespace {

struct Solved {
  GroundState gs;
  std::shared_ptr<const OrbitalSet> set;
};

Solved solve_at(const TorusConfig& cfg, int n_max, const Grid& grid, const RealField& V, const RealField& w,
                const MeanFieldOptions& o) {
  auto set = std::make_shared<const OrbitalSet>(build_orbital_set(cfg, n_max, grid));
  const Eigen::MatrixXcd Vm = one_body_matrix(V, *set);
  const TwoBodyTensor W = two_body_tensor(w, *set);
  const Hamiltonian H(cfg, n_max, Vm, W, o.budget);
  return {ground_state(H, o.solver), std::move(set)};
}

}  // namespace

std::vector<MeanFieldRow> mean_field_study(const MeanFieldOptions& o) {
  if (o.sweep.empty()) throw ConfigError("empty sweep");
  std::vector<MeanFieldRow> rows;
  double r0 = -1.0;
  for (const auto& [d, N] : o.sweep) {
    const TorusConfig cfg = build_config(o.L, d, o.hbar, o.q, N);
    if (r0 >= 0.0 && std::abs(cfg.r - r0) > 1e-12) throw ConfigError("the sweep must keep r fixed");
    r0 = cfg.r;
    MeanFieldRow row;
    row.d = d;
    row.N = N;
    row.n_max = o.n_max;
    if (binomial((o.n_max + 1) * d, N) > o.budget) {
      row.n_max = o.fallback_n_max;
      row.reduced_levels = true;
    }
    const Grid grid = make_grid(o.grid, o.L);
    const RealField V = synthesize_potential(o.V, grid);
    const RealField w = synthesize_potential(o.w, grid);
    const Solved s = solve_at(cfg, row.n_max, grid, V, w, o);
    row.dim = s.gs.psi.basis->size();
    row.method = s.gs.method;
    row.residual = s.gs.residual;
    row.norm = s.gs.norm;
    row.energy_per_particle = s.gs.energy / N;

    const FilledLevelConstants k = filled_level_constants(cfg, V, w);
    const QllSolution qll = minimize_qll(make_qll_problem(cfg, V, w));
    if (!qll.converged) throw ConvergenceError("qLL minimization did not converge");
    row.E_qr = k.E_qr;
    row.E_V = k.E_V;
    row.E_w = k.E_w;
    row.E_qll = qll.energy;
    row.prediction = cfg.hbar_b() * k.E_qr + k.E_V + k.E_w + qll.energy;
    row.gap = std::abs(row.energy_per_particle - row.prediction);

    const DensityMatrix g1 = reduced_density(s.gs.psi, 1, s.set);
    RealField rho = one_body_density(g1);
    const double filled = double(o.q) * d / (double(N) * o.L * o.L);
    RealField diff(grid);
    for (std::size_t i = 0; i < grid.count(); ++i) diff[i] = std::abs(rho[i] - filled - qll.rho[i]);
    row.l1_distance = integrate(diff);
    row.density = std::move(rho);
    row.psi = s.gs.psi;

    const Localizer loc = build_localizer(o.lambda > 0.0 ? o.lambda : default_lambda(d), grid);
    const PhaseSpaceDensity m = lower_symbol(g1, loc, row.n_max);
    double low = 0.0;
    for (int n = 0; n <= row.n_max; ++n) {
      row.level_occupation.push_back(m.level_mass(n));
      if (n <= o.q) low += row.level_occupation.back();
    }
    row.overflow = m.overflow_mass();
    row.occupation_above_q = 1.0 - low;

    if (o.bias) {
      if (binomial((row.n_max + 2) * d, N) <= o.budget) {
        const Solved hi = solve_at(cfg, row.n_max + 1, grid, V, w, o);
        row.truncation_bias = row.energy_per_particle - hi.gs.energy / N;
      }
      if (!row.reduced_levels && o.fallback_n_max < row.n_max) {
        const Solved lo = solve_at(cfg, o.fallback_n_max, grid, V, w, o);
        row.fallback_bias = lo.gs.energy / N - row.energy_per_particle;
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace landau
