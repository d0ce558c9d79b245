#include <bit>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"
#include "landau/many_body.hpp"
#include "landau/potential.hpp"

using namespace landau;

namespace {

std::shared_ptr<const OrbitalSet> orbitals(int d, int N, int n_max, int G, int q = -1) {
  if (q < 0) q = N / d;
  const TorusConfig cfg = build_config(1.0, d, 1.0, q, N);
  return std::make_shared<const OrbitalSet>(build_orbital_set(cfg, n_max, make_grid(G, 1.0)));
}

Eigen::MatrixXcd random_orthonormal(int M, int N, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  Eigen::MatrixXcd A(M, N);
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < N; ++j) A(i, j) = cplx(nd(rng), nd(rng));
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(A);
  return qr.householderQ() * Eigen::MatrixXcd::Identity(M, N);
}

struct Model {
  std::shared_ptr<const OrbitalSet> set;
  Eigen::MatrixXcd V;
  TwoBodyTensor W;
};

Model weak_model(int d, int N, int n_max, int G = 64, double v0 = 0.4, double w0 = 0.6) {
  Model m;
  m.set = orbitals(d, N, n_max, G);
  const Grid& g = m.set->grid;
  m.V = one_body_matrix(synthesize_potential(PotentialSpec::cosine(v0), g), *m.set);
  m.W = two_body_tensor(synthesize_potential(PotentialSpec::gaussian_periodic(w0, 0.12), g), *m.set);
  return m;
}

}  // namespace

TEST_CASE("fock basis: colex enumeration, ranks and budget") {
  for (auto [M, N] : {std::pair{8, 3}, {12, 6}, {20, 1}, {10, 10}}) {
    auto b = make_fock_basis(M, N);
    REQUIRE(b->size() == binomial(M, N));
    for (std::size_t i = 0; i < b->size(); ++i) {
      CHECK(std::popcount(b->states[i]) == N);
      CHECK(b->states[i] < (std::uint64_t{1} << M));
      CHECK(b->rank(b->states[i]) == i);
      if (i) CHECK(b->states[i] > b->states[i - 1]);
    }
  }
  CHECK(binomial(24, 9) == 1307504);
  CHECK_THROWS_AS(make_fock_basis(24, 9), ConfigError);
  CHECK_THROWS_AS(make_fock_basis(64, 2), ConfigError);
  CHECK_THROWS_AS(make_fock_basis(4, 5), ConfigError);
  CHECK(make_fock_basis(18, 9)->size() == 48620);
}

TEST_CASE("one-body matrix: zero, constant and general potentials") {
  auto set = orbitals(3, 4, 1, 64);
  const Grid& g = set->grid;
  CHECK(one_body_matrix(RealField(g), *set).cwiseAbs().maxCoeff() == 0.0);
  RealField c(g);
  for (auto& v : c.values()) v = 2.5;
  const Eigen::MatrixXcd Vc = one_body_matrix(c, *set);
  CHECK((Vc - 2.5 * Eigen::MatrixXcd::Identity(6, 6)).cwiseAbs().maxCoeff() < 1e-8);

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1, 1);
  RealField r(g);
  for (auto& v : r.values()) v = u(rng);
  const Eigen::MatrixXcd Vr = one_body_matrix(r, *set);
  CHECK((Vr - Vr.adjoint()).cwiseAbs().maxCoeff() == 0.0);
  // entry against a plain quadrature
  cplx direct{};
  const double h2 = g.spacing() * g.spacing();
  for (std::size_t k = 0; k < g.count(); ++k) direct += std::conj((*set)[1][k]) * r[k] * (*set)[4][k];
  CHECK(std::abs(Vr(1, 4) - h2 * direct) < 1e-12);
}

TEST_CASE("two-body tensor: constant interaction, symmetries, odd interaction") {
  auto set = orbitals(3, 4, 1, 64);
  const Grid& g = set->grid;
  RealField c(g);
  for (auto& v : c.values()) v = 0.7;
  const TwoBodyTensor Wc = two_body_tensor(c, *set);
  double err = 0.0;
  for (int a = 0; a < 6; ++a)
    for (int b = 0; b < 6; ++b)
      for (int cc = 0; cc < 6; ++cc)
        for (int d = 0; d < 6; ++d)
          err = std::max(err, std::abs(Wc(a, b, cc, d) - ((a == cc && b == d) ? 0.7 : 0.0)));
  CHECK(err < 1e-8);

  const TwoBodyTensor W = two_body_tensor(synthesize_potential(PotentialSpec::gaussian_periodic(1.0, 0.1), g), *set);
  CHECK(W.hermiticity_residual() < 1e-10);
  CHECK(W.exchange_residual() < 1e-10);
  CHECK(W.max_abs() > 0.0);

  RealField odd(g);
  for (int i = 0; i < g.size; ++i)
    for (int j = 0; j < g.size; ++j) odd(i, j) = std::sin(2 * std::numbers::pi * g.coord(i));
  CHECK_THROWS_AS(two_body_tensor(odd, *set), ConfigError);
}

TEST_CASE("two-body tensor: FFT path against brute-force double quadrature") {
  const TorusConfig cfg = build_config(1.0, 2, 1.0, 0, 1);
  OrbitalSetOptions opts;
  opts.validate = false;
  const OrbitalSet set = build_orbital_set(cfg, 0, make_grid(16, 1.0), 1e-14, opts);
  REQUIRE(set.count() == 2);
  const Grid& g = set.grid;
  const RealField w = synthesize_potential(PotentialSpec::gaussian_periodic(1.0, 0.2), g);
  const TwoBodyTensor W = two_body_tensor(w, set);
  const int n = g.size;
  const double h4 = std::pow(g.spacing(), 4);
  double diff = 0.0;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int c = 0; c < 2; ++c)
        for (int d = 0; d < 2; ++d) {
          cplx s{};
          for (int i1 = 0; i1 < n; ++i1)
            for (int j1 = 0; j1 < n; ++j1)
              for (int i2 = 0; i2 < n; ++i2)
                for (int j2 = 0; j2 < n; ++j2) {
                  const double wx = w((i1 - i2 + n) % n, (j1 - j2 + n) % n);
                  s += std::conj(set[a](i1, j1)) * std::conj(set[b](i2, j2)) * wx * set[c](i1, j1) * set[d](i2, j2);
                }
          diff = std::max(diff, std::abs(W(a, b, c, d) - h4 * s));
        }
  CHECK(diff <= 1e-8);
}

TEST_CASE("hamiltonian: free diagonal, Hermiticity, matvec against dense") {
  {
    auto set = orbitals(3, 4, 1, 64);
    const TorusConfig& cfg = set->config;
    TwoBodyTensor W0{6, std::vector<cplx>(6 * 6 * 6 * 6)};
    const Hamiltonian H(cfg, 1, Eigen::MatrixXcd::Zero(6, 6), W0);
    const Eigen::MatrixXcd D = H.dense();
    for (std::size_t t = 0; t < H.dim(); ++t) {
      double e = 0.0;
      for (int a = 0; a < 6; ++a)
        if (H.basis().states[t] >> a & 1) e += cfg.level_energy(a / 3);
      CHECK(D(Eigen::Index(t), Eigen::Index(t)).real() == doctest::Approx(e).epsilon(1e-14));
    }
    CHECK((D - Eigen::MatrixXcd(D.diagonal().asDiagonal())).cwiseAbs().maxCoeff() == 0.0);
  }
  const Model m = weak_model(3, 4, 1);
  const Hamiltonian H(m.set->config, 1, m.V, m.W);
  const Eigen::MatrixXcd D = H.dense();
  CHECK((D - D.adjoint()).cwiseAbs().maxCoeff() <= 1e-12 * D.cwiseAbs().maxCoeff());
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd;
  Eigen::VectorXcd x(Eigen::Index(H.dim()));
  for (auto& v : x) v = cplx(nd(rng), nd(rng));
  CHECK((H.apply(x) - D * x).cwiseAbs().maxCoeff() < 1e-12 * D.cwiseAbs().maxCoeff() * x.norm());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(D, Eigen::EigenvaluesOnly);
  CHECK(H.norm_bound() >= es.eigenvalues().cwiseAbs().maxCoeff());
  // particle number is a basis property: every state carries exactly N particles
  for (auto s : H.basis().states) CHECK(std::popcount(s) == 4);
  CHECK_THROWS_AS(Hamiltonian(m.set->config, 2, m.V, m.W), ConfigError);
}

TEST_CASE("ground state: exact Pauli fillings without potentials") {
  auto run = [](int d, int N, int n_max, int q) {
    auto set = orbitals(d, N, n_max, 64, q);
    const int M = set->count();
    TwoBodyTensor W0{M, std::vector<cplx>(std::size_t(M) * M * M * M)};
    const Hamiltonian H(set->config, n_max, Eigen::MatrixXcd::Zero(M, M), W0);
    return std::pair{ground_state(H), set->config.hbar_b()};
  };
  for (int n_max : {0, 1, 2}) {
    auto [gs, hb] = run(4, 3, n_max, 0);
    CHECK(std::abs(gs.energy - 3 * hb) <= 1e-9 * 3 * hb);
  }
  for (int n_max : {1, 2}) {
    auto [gs, hb] = run(4, 6, n_max, 1);
    CHECK(std::abs(gs.energy - 10 * hb) <= 1e-9 * 10 * hb);
    CHECK(std::abs(gs.energy / 6 - hb * 5.0 / 3.0) <= 1e-9 * hb);
  }
}

TEST_CASE("ground state: Lanczos with restarts agrees with the dense solve") {
  const Model m = weak_model(4, 5, 1);
  const Hamiltonian H(m.set->config, 1, m.V, m.W);
  REQUIRE(H.dim() == 56);
  const GroundState dense = ground_state(H);
  CHECK(dense.method == "dense");
  GroundStateOptions o;
  o.dense_limit = 0;
  o.krylov = 10;
  const GroundState lz = ground_state(H, o);
  CHECK(lz.method == "lanczos");
  CHECK(std::abs(lz.energy - dense.energy) <= 1e-9 * std::abs(dense.energy));
  for (const GroundState* g : {&dense, &lz}) {
    CHECK(g->residual <= 1e-10 * g->norm);
    CHECK(std::abs(g->psi.coeffs.norm() - 1.0) <= 1e-12);
    CHECK(std::abs(expectation(H, g->psi) - g->energy) <= 1e-10 * std::abs(g->energy));
  }
  o.max_restarts = 0;
  o.krylov = 8;
  o.tol = 1e-16;
  CHECK_THROWS_AS(ground_state(H, o), ConvergenceError);
}

TEST_CASE("Slater determinants: Hartree-Fock energy, Wick form of gamma, variational bound") {
  const Model m = weak_model(3, 3, 1);
  const TorusConfig& cfg = m.set->config;
  const Hamiltonian H(cfg, 1, m.V, m.W);
  const GroundState gs = ground_state(H);
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 6; ++trial) {
    Eigen::MatrixXcd C = random_orthonormal(6, 3, rng);
    if (trial == 0) C = Eigen::MatrixXcd::Identity(6, 3);  // kinetic minimizer: lowest level filled
    const FockVector psi = slater_state(H.basis_ptr(), C);
    CHECK(std::abs(psi.coeffs.norm() - 1.0) < 1e-12);
    const DensityMatrix g1 = reduced_density(psi, 1, m.set);
    CHECK((g1.matrix - C * C.adjoint() / 3.0).cwiseAbs().maxCoeff() < 1e-12);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> e2(reduced_density(psi, 2, m.set).matrix, Eigen::EigenvaluesOnly);
    CHECK(std::abs(e2.eigenvalues().maxCoeff() - 2.0 / (3 * 2)) < 1e-12);
    const double hf = hartree_fock_energy(g1, cfg, m.V, m.W);
    const double e = expectation(H, psi);
    CHECK(std::abs(hf - e / 3) <= 1e-10 * std::max(1.0, std::abs(hf)));
    CHECK(gs.energy <= 3 * hf + gs.residual);
  }
}

TEST_CASE("Wick check: random triples, minimal pair, non-orthonormal input") {
  std::mt19937_64 rng(2);
  auto set = orbitals(3, 3, 1, 64);
  for (int t = 0; t < 3; ++t) CHECK(wick_check(random_orthonormal(6, 3, rng), set) <= 1e-12);
  auto set2 = orbitals(2, 2, 0, 64);
  CHECK(wick_check(random_orthonormal(2, 2, rng), set2) <= 1e-13);
  Eigen::MatrixXcd bad = random_orthonormal(6, 3, rng);
  bad.col(1) += 0.1 * bad.col(0);
  CHECK_THROWS_AS(wick_check(bad, set), ConfigError);
}

TEST_CASE("Hartree-Fock: exchange trace, zero interaction, Pauli violation") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> nd;
  for (int t = 0; t < 5; ++t) {
    Eigen::MatrixXcd A(7, 7);
    for (int i = 0; i < 7; ++i)
      for (int j = 0; j < 7; ++j) A(i, j) = cplx(nd(rng), nd(rng));
    Eigen::MatrixXcd g = A * A.adjoint();
    g /= g.trace().real();
    CHECK(std::abs(exchange_trace(g) - (g * g).trace()) <= 1e-12);
  }
  const Model m = weak_model(3, 4, 1);
  const TorusConfig& cfg = m.set->config;
  TwoBodyTensor W0{6, std::vector<cplx>(6 * 6 * 6 * 6)};
  const Eigen::MatrixXcd C = random_orthonormal(6, 4, rng);
  const DensityMatrix g = make_density_matrix(m.set, C * C.adjoint() / 4.0);
  double one = 0.0;
  for (int a = 0; a < 6; ++a) one += cfg.level_energy(a / 3) * g.matrix(a, a).real();
  one += (m.V * g.matrix).trace().real();
  CHECK(hartree_fock_energy(g, cfg, m.V, W0) == doctest::Approx(one).epsilon(1e-13));

  Eigen::MatrixXcd peaked = Eigen::MatrixXcd::Zero(6, 6);
  peaked(0, 0) = 0.7;
  peaked(1, 1) = 0.3;
  CHECK_THROWS_AS(hartree_fock_energy(make_density_matrix(m.set, peaked), cfg, m.V, m.W), ValidationError);
}

TEST_CASE("reduced densities of an interacting ground state") {
  const Model m = weak_model(3, 4, 1);
  const TorusConfig& cfg = m.set->config;
  const int N = 4, M = 6;
  const Hamiltonian H(cfg, 1, m.V, m.W);
  const GroundState gs = ground_state(H);
  const DensityMatrix g1 = reduced_density(gs.psi, 1, m.set);
  const DensityMatrix g2 = reduced_density(gs.psi, 2, m.set);
  CHECK(std::abs(g1.trace() - 1.0) <= 1e-12);
  CHECK(std::abs(g2.trace() - 1.0) <= 1e-12);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> e1(g1.matrix), e2(g2.matrix);
  CHECK(e1.eigenvalues().minCoeff() >= -1e-10);
  CHECK(e1.eigenvalues().maxCoeff() <= 1.0 / N + 1e-10);
  CHECK(e2.eigenvalues().minCoeff() >= -1e-10);
  // correlated states may exceed the determinant value 2/(N(N-1)); Yang's bound is 1/(N-1)
  CHECK(e2.eigenvalues().maxCoeff() <= 1.0 / (N - 1) + 1e-10);

  double ptr = 0.0, sym = 0.0, anti = 0.0;
  for (int a = 0; a < M; ++a)
    for (int c = 0; c < M; ++c) {
      cplx s{};
      for (int b = 0; b < M; ++b) s += g2.matrix(a * M + b, c * M + b);
      ptr = std::max(ptr, std::abs(s - g1.matrix(a, c)));
      for (int b = 0; b < M; ++b)
        for (int d = 0; d < M; ++d) {
          sym = std::max(sym, std::abs(g2.matrix(a * M + b, c * M + d) - g2.matrix(b * M + a, d * M + c)));
          anti = std::max(anti, std::abs(g2.matrix(a * M + b, c * M + d) + g2.matrix(b * M + a, c * M + d)));
        }
    }
  CHECK(ptr <= 1e-10);
  CHECK(sym <= 1e-12);
  CHECK(anti <= 1e-12);

  const double per = expectation(H, gs.psi) / N;
  CHECK(std::abs(per - reduced_energy(g1, g2, cfg, m.V, m.W)) <= 1e-10 * std::max(1.0, std::abs(per)));
  CHECK(std::abs(per - gs.energy / N) <= 1e-10 * std::abs(per));

  const RealField rho = one_body_density(g1);
  CHECK(integrate(rho) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(*std::min_element(rho.values().begin(), rho.values().end()) > -1e-12);
}

TEST_CASE("ground-state file: round trip, layout, mismatches") {
  const Model m = weak_model(3, 4, 1, 32);
  const Hamiltonian H(m.set->config, 1, m.V, m.W);
  const GroundState gs = ground_state(H);
  const auto dir = std::filesystem::temp_directory_path() / "landau_gs_test";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "psi.bin").string();
  save_ground_state(path, gs.psi, 3, 1);
  CHECK(std::filesystem::file_size(path) == 4 + 4 * 4 + 8 * 2 + 16 * H.dim());
  const FockVector back = load_ground_state(path, 3, 1);
  CHECK(back.basis->states == H.basis().states);
  CHECK((back.coeffs - gs.psi.coeffs).cwiseAbs().maxCoeff() == 0.0);

  std::ifstream in(path, std::ios::binary);
  unsigned char head[40];
  in.read(reinterpret_cast<char*>(head), 40);
  CHECK(std::string(reinterpret_cast<char*>(head), 4) == "LTGS");
  CHECK(head[8] == 3);   // d, little-endian
  CHECK(head[12] == 1);  // n_max
  CHECK(head[16] == 4);  // N
  CHECK(head[20] == H.dim());
  std::uint64_t hash = 0;
  for (int i = 0; i < 8; ++i) hash |= std::uint64_t(head[28 + i]) << (8 * i);
  CHECK(hash == orbital_order_hash(3, 1, 4));
  CHECK(orbital_order_hash(3, 1, 4) != orbital_order_hash(3, 2, 4));

  CHECK_THROWS_AS(load_ground_state(path, 3, 2), ValidationError);
  {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(28);
    const char z = 0x5a;
    f.write(&z, 1);
  }
  CHECK_THROWS_AS(load_ground_state(path, 3, 1), ValidationError);
  std::filesystem::resize_file(path, 40);
  CHECK_THROWS(load_ground_state(path, 3, 1));
  std::filesystem::remove_all(dir);
}

TEST_CASE("mean-field study: free rows close exactly, r must be common") {
  MeanFieldOptions o;
  o.sweep = {{2, 3}, {4, 6}};
  o.n_max = 1;
  o.fallback_n_max = 0;
  o.bias = false;
  const auto rows = mean_field_study(o);
  REQUIRE(rows.size() == 2);
  for (const auto& r : rows) {
    CHECK(r.gap <= 1e-12 * r.prediction);
    CHECK(r.prediction == doctest::Approx(r.energy_per_particle));
    CHECK(r.E_V == 0.0);
    CHECK(r.E_w == 0.0);
    CHECK(r.level_occupation.size() == 2);
  }
  o.sweep = {{2, 3}, {4, 5}};
  CHECK_THROWS_AS(mean_field_study(o), ConfigError);
  o.sweep = {{6, 9}};
  o.n_max = 3;
  o.fallback_n_max = 2;
  o.budget = 1000;
  CHECK_THROWS_AS(mean_field_study(o), ConfigError);
}
