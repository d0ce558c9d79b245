#include "landau/husimi.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "landau/errors.hpp"
#include "landau/fft.hpp"
#include "landau/parallel.hpp"
#include "landau/projector.hpp"
#include "landau/reduce.hpp"

namespace landau {
namespace {

constexpr double kPi = std::numbers::pi;

void require_k1(const PhaseSpaceDensity& m, const char* what) {
  if (m.k != 1) throw ConfigError(std::string(what) + " expects a one-body phase-space density");
}

// Orbitals touched by a k-body matrix.
std::vector<int> active_orbitals(const DensityMatrix& g) {
  const int A = g.basis->count();
  std::vector<bool> on(std::size_t(A), false);
  for (Eigen::Index i = 0; i < g.matrix.rows(); ++i)
    for (Eigen::Index j = 0; j < g.matrix.cols(); ++j) {
      if (g.matrix(i, j) == cplx{}) continue;
      if (g.k == 1) {
        on[std::size_t(i)] = on[std::size_t(j)] = true;
      } else {
        on[std::size_t(i / A)] = on[std::size_t(i % A)] = on[std::size_t(j / A)] = on[std::size_t(j % A)] = true;
      }
    }
  std::vector<int> out;
  for (int a = 0; a < A; ++a)
    if (on[std::size_t(a)]) out.push_back(a);
  return out;
}

// Columns M_{(n l), a} over R for a in `which`, one matrix per l.
std::vector<Eigen::MatrixXcd> overlap_matrices(const OrbitalSet& set, const Localizer& loc, int n,
                                               const std::vector<int>& which) {
  const Grid& g = set.grid;
  require_same_grid(g, loc.samples.grid());
  const ComplexField gc = to_complex(loc.samples);
  const int d = set.config.d;
  const std::size_t A = which.size();
  std::vector<Eigen::MatrixXcd> out(std::size_t(d), Eigen::MatrixXcd(Eigen::Index(g.count()), Eigen::Index(A)));
  parallel_for(std::size_t(d) * A, [&](std::size_t t) {
    const int l = int(t / A);
    const std::size_t col = t % A;
    const ComplexField& p = set[set.index(n, l)];
    const ComplexField& q = set[which[col]];
    ComplexField f(g);
    for (std::size_t k = 0; k < g.count(); ++k) f[k] = std::conj(p[k]) * q[k];
    const ComplexField c = convolve_periodic(f, gc);
    for (std::size_t k = 0; k < g.count(); ++k) out[std::size_t(l)](Eigen::Index(k), Eigen::Index(col)) = c[k];
  });
  return out;
}

// pi psi for the kinetic momentum, through the ladder operators:
//   pi_x = i sqrt(hbar b/2) (a^dag - a), pi_y = -sqrt(hbar b/2) (a + a^dag).
std::array<ComplexField, 2> momentum_of(const OrbitalSet& set, int a) {
  const TorusConfig& c = set.config;
  const LandauSeries s = orbital_series(set.at(a));
  const ComplexField up = sample(apply_ladder(s, Ladder::raise), c, set.grid);
  const ComplexField dn = sample(apply_ladder(s, Ladder::lower), c, set.grid);
  const double k = std::sqrt(0.5 * c.hbar_b());
  ComplexField px(set.grid), py(set.grid);
  for (std::size_t i = 0; i < set.grid.count(); ++i) {
    px[i] = cplx(0.0, k) * (up[i] - dn[i]);
    py[i] = -k * (dn[i] + up[i]);
  }
  return {std::move(px), std::move(py)};
}

}  // namespace

RealField PhaseSpaceDensity::slice(int n) const {
  if (k != 1 || n < 0 || n > n_max) throw ConfigError("slice index outside the phase space");
  const std::size_t off = std::size_t(n) * grid.count();
  return RealField(grid, std::vector<double>(values.begin() + std::ptrdiff_t(off),
                                             values.begin() + std::ptrdiff_t(off + grid.count())));
}

double PhaseSpaceDensity::level_mass(int n) const { return integrate(slice(n)); }

double PhaseSpaceDensity::integral() const {
  const double h2 = grid.spacing() * grid.spacing();
  return std::pow(h2, k) * pairwise_sum(values);
}

double PhaseSpaceDensity::overflow_mass() const {
  if (overflow.empty()) return 0.0;
  return grid.spacing() * grid.spacing() * pairwise_sum(overflow);
}

double PhaseSpaceDensity::sup() const { return values.empty() ? 0.0 : *std::max_element(values.begin(), values.end()); }
double PhaseSpaceDensity::min() const { return values.empty() ? 0.0 : *std::min_element(values.begin(), values.end()); }

RealField PhaseSpaceDensity::density() const {
  require_k1(*this, "density");
  RealField r(grid);
  for (std::size_t x = 0; x < grid.count(); ++x)
    r[x] = pairwise_sum_of(std::size_t(n_max + 1), [&](std::size_t n) { return values[n * grid.count() + x]; }) +
           (overflow.empty() ? 0.0 : overflow[x]);
  return r;
}

PhaseSpaceDensity PhaseSpaceDensity::marginal() const {
  if (k != 2) throw ConfigError("marginal expects a two-body phase-space density");
  PhaseSpaceDensity out = make_phase_space_density(n_max, grid, 1);
  const std::size_t C = cells();
  const double h2 = grid.spacing() * grid.spacing();
  for (std::size_t x = 0; x < C; ++x) out.values[x] = h2 * pairwise_sum(values.data() + x * C, C);
  return out;
}

PhaseSpaceDensity make_phase_space_density(int n_max, const Grid& grid, int k) {
  if (n_max < 0) throw ConfigError("phase space needs n_max >= 0");
  if (k != 1 && k != 2) throw ConfigError("phase-space densities have body order 1 or 2");
  PhaseSpaceDensity m;
  m.n_max = n_max;
  m.grid = grid;
  m.k = k;
  const std::size_t C = m.cells();
  m.values.assign(k == 1 ? C : C * C, 0.0);
  return m;
}

DensityMatrix make_density_matrix(std::shared_ptr<const OrbitalSet> basis, Eigen::MatrixXcd matrix, int k) {
  if (!basis) throw ConfigError("density matrix needs an orbital basis");
  if (k != 1 && k != 2) throw ConfigError("density matrices have body order 1 or 2");
  const Eigen::Index A = basis->count();
  const Eigen::Index dim = k == 1 ? A : A * A;
  if (matrix.rows() != dim || matrix.cols() != dim) throw ConfigError("density matrix shape does not match the basis");
  const double scale = std::max(1.0, matrix.cwiseAbs().maxCoeff());
  if ((matrix - matrix.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw ValidationError("density matrix is not Hermitian");
  const Eigen::MatrixXcd h = 0.5 * (matrix + matrix.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().size() > 0 && es.eigenvalues().minCoeff() < -1e-10)
    throw ValidationError("density matrix has an eigenvalue below -1e-10");
  return DensityMatrix{std::move(basis), k, h};
}

std::vector<ComplexField> localized_overlaps(const OrbitalSet& set, const Localizer& loc, int n) {
  if (n < 0 || n > set.n_max) throw ConfigError("level outside the orbital set");
  std::vector<int> all(std::size_t(set.count()));
  for (int a = 0; a < set.count(); ++a) all[std::size_t(a)] = a;
  const auto mats = overlap_matrices(set, loc, n, all);
  std::vector<ComplexField> out;
  for (const auto& M : mats)
    for (Eigen::Index a = 0; a < M.cols(); ++a) {
      ComplexField f(set.grid);
      for (std::size_t k = 0; k < set.grid.count(); ++k) f[k] = M(Eigen::Index(k), a);
      out.push_back(std::move(f));
    }
  return out;
}

PhaseSpaceDensity lower_symbol(const DensityMatrix& gamma, const Localizer& loc, int n_max) {
  const OrbitalSet& set = *gamma.basis;
  if (n_max < 0 || n_max > set.n_max) throw ConfigError("symbol levels must lie within the orbital set");
  const std::vector<int> act = active_orbitals(gamma);
  const Eigen::Index Aa = Eigen::Index(act.size());
  const int A = set.count();
  const std::size_t G2 = set.grid.count();
  PhaseSpaceDensity m = make_phase_space_density(n_max, set.grid, gamma.k);
  if (act.empty()) {
    if (gamma.k == 1) m.overflow.assign(G2, 0.0);
    return m;
  }
  if (gamma.k == 1) {
    Eigen::MatrixXcd g(Aa, Aa);
    for (Eigen::Index i = 0; i < Aa; ++i)
      for (Eigen::Index j = 0; j < Aa; ++j) g(i, j) = gamma.matrix(act[std::size_t(i)], act[std::size_t(j)]);
    for (int n = 0; n <= n_max; ++n) {
      const auto mats = overlap_matrices(set, loc, n, act);
      Eigen::VectorXd acc = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(G2));
      for (const auto& M : mats) acc += ((M * g).cwiseProduct(M.conjugate())).rowwise().sum().real();
      for (std::size_t x = 0; x < G2; ++x) m.values[std::size_t(n) * G2 + x] = acc(Eigen::Index(x));
    }
    // Everything g_R sends outside the resolved levels: ||g_R phi||^2 - ||P g_R phi||^2 summed
    // against gamma, i.e. (g^2 * rho_gamma)(R) minus the resolved slices.
    ComplexField rho(set.grid);
    for (Eigen::Index i = 0; i < Aa; ++i)
      for (Eigen::Index j = 0; j < Aa; ++j) {
        const cplx gij = g(i, j);
        if (gij == cplx{}) continue;
        const ComplexField& pi = set[act[std::size_t(i)]];
        const ComplexField& pj = set[act[std::size_t(j)]];
        for (std::size_t x = 0; x < G2; ++x) rho[x] += gij * pi[x] * std::conj(pj[x]);
      }
    RealField g2(set.grid);
    for (std::size_t x = 0; x < G2; ++x) g2[x] = loc.samples[x] * loc.samples[x];
    const RealField full = convolve_periodic(real_part(rho), g2);
    m.overflow.resize(G2);
    for (std::size_t x = 0; x < G2; ++x)
      m.overflow[x] = full[x] - pairwise_sum_of(std::size_t(n_max + 1), [&](std::size_t n) {
                        return m.values[n * G2 + x];
                      });
    return m;
  }
  // Two-body: P_X[c][a] = <psi_c, Pi_X psi_a> on the active orbitals, then
  // m(X1, X2) = sum gamma[(a,b),(c,d)] P_X1[c][a] P_X2[d][b].
  const std::size_t C = m.cells();
  std::vector<Eigen::MatrixXcd> P(C, Eigen::MatrixXcd::Zero(Aa, Aa));
  for (int n = 0; n <= n_max; ++n) {
    const auto mats = overlap_matrices(set, loc, n, act);
    parallel_for(G2, [&](std::size_t x) {
      Eigen::MatrixXcd& p = P[std::size_t(n) * G2 + x];
      for (const auto& M : mats) {
        const Eigen::VectorXcd row = M.row(Eigen::Index(x)).transpose();
        p += row.conjugate() * row.transpose();
      }
    });
  }
  std::vector<cplx> g4(std::size_t(Aa * Aa * Aa * Aa));
  auto G4 = [&](Eigen::Index a, Eigen::Index b, Eigen::Index c, Eigen::Index d) -> cplx& {
    return g4[std::size_t(((a * Aa + b) * Aa + c) * Aa + d)];
  };
  for (Eigen::Index a = 0; a < Aa; ++a)
    for (Eigen::Index b = 0; b < Aa; ++b)
      for (Eigen::Index c = 0; c < Aa; ++c)
        for (Eigen::Index d = 0; d < Aa; ++d)
          G4(a, b, c, d) = gamma.matrix(act[std::size_t(a)] * A + act[std::size_t(b)], act[std::size_t(c)] * A + act[std::size_t(d)]);
  parallel_for(C, [&](std::size_t x1) {
    const Eigen::MatrixXcd& P1 = P[x1];
    Eigen::MatrixXcd B = Eigen::MatrixXcd::Zero(Aa, Aa);
    for (Eigen::Index a = 0; a < Aa; ++a)
      for (Eigen::Index c = 0; c < Aa; ++c) {
        const cplx p = P1(c, a);
        if (p == cplx{}) continue;
        for (Eigen::Index b = 0; b < Aa; ++b)
          for (Eigen::Index d = 0; d < Aa; ++d) B(b, d) += G4(a, b, c, d) * p;
      }
    for (std::size_t x2 = 0; x2 < C; ++x2)
      m.values[x1 * C + x2] = (B.cwiseProduct(P[x2].transpose())).sum().real();
  });
  return m;
}

DensityMatrix upper_symbol_matrix(const PhaseSpaceDensity& m, std::shared_ptr<const OrbitalSet> set,
                                  const Localizer& loc) {
  require_k1(m, "upper_symbol_matrix");
  if (!set) throw ConfigError("upper symbol needs an orbital basis");
  require_same_grid(m.grid, set->grid);
  if (m.n_max > set->n_max) throw ConfigError("symbol levels exceed the orbital set");
  if (m.min() < 0.0) throw ConfigError("upper symbols must be non-negative");
  const int A = set->count();
  std::vector<int> all(static_cast<std::size_t>(A));
  for (int a = 0; a < A; ++a) all[std::size_t(a)] = a;
  const double h2 = m.grid.spacing() * m.grid.spacing();
  const double scale = 2.0 * kPi * set->config.l_b * set->config.l_b * h2;
  const std::size_t G2 = m.grid.count();
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(A, A);
  for (int n = 0; n <= m.n_max; ++n) {
    Eigen::VectorXd w(static_cast<Eigen::Index>(G2));
    for (std::size_t x = 0; x < G2; ++x) w(Eigen::Index(x)) = m.values[std::size_t(n) * G2 + x];
    if (w.maxCoeff() == 0.0) continue;
    for (const auto& M : overlap_matrices(*set, loc, n, all)) out += scale * M.adjoint() * w.asDiagonal() * M;
  }
  return make_density_matrix(std::move(set), 0.5 * (out + out.adjoint()), 1);
}

std::vector<RealField> trace_weights(const TorusConfig& cfg, const Localizer& loc, int n_top) {
  const Grid& g = loc.samples.grid();
  RealField g2(g);
  for (std::size_t k = 0; k < g.count(); ++k) g2[k] = loc.samples[k] * loc.samples[k];
  std::vector<RealField> out;
  for (int n = 0; n <= n_top; ++n) {
    RealField w = convolve_periodic(diagonal_field(n, cfg, g).deviation, g2);
    for (auto& v : w.values()) v += 1.0;
    out.push_back(std::move(w));
  }
  return out;
}

double upper_symbol_trace(const PhaseSpaceDensity& m, const std::vector<RealField>& weights) {
  require_k1(m, "upper_symbol_trace");
  if (int(weights.size()) < m.n_max + 1) throw ConfigError("missing trace weights for some levels");
  const std::size_t G2 = m.grid.count();
  const double h2 = m.grid.spacing() * m.grid.spacing();
  return h2 * pairwise_sum_of(std::size_t(m.n_max + 1) * G2, [&](std::size_t t) {
           return m.values[t] * weights[t / G2][t % G2];
         });
}

void check_qll_domain(const RealField& rho, const TorusConfig& cfg) {
  if (std::abs(rho.grid().L - cfg.L) > 1e-14 * cfg.L) throw ConfigError("density grid differs from the torus");
  const double cap = cfg.pauli_cap(), mass = cfg.partial_mass();
  for (double v : rho.values())
    if (v < -1e-12 * cap || v > cap * (1.0 + 1e-12))
      throw ConfigError("density violates the pointwise bound 0 <= rho <= 1/((q+r)L^2)");
  const double tot = integrate(rho);
  if (std::abs(tot - mass) > 1e-10 * std::max(mass, cap * cfg.L * cfg.L))
    throw ConfigError("density mass differs from r/(q+r)");
}

PhaseSpaceDensity build_saturated_density(const RealField& rho, const TorusConfig& cfg) {
  check_qll_domain(rho, cfg);
  const Grid& g = rho.grid();
  PhaseSpaceDensity m = make_phase_space_density(cfg.q, g, 1);
  const std::size_t G2 = g.count();
  for (int n = 0; n < cfg.q; ++n)
    std::fill(m.values.begin() + std::ptrdiff_t(std::size_t(n) * G2),
              m.values.begin() + std::ptrdiff_t(std::size_t(n + 1) * G2), cfg.pauli_cap());
  std::copy(rho.values().begin(), rho.values().end(), m.values.begin() + std::ptrdiff_t(std::size_t(cfg.q) * G2));
  return m;
}

double semiclassical_energy(const PhaseSpaceDensity& m, const RealField& V, const RealField& w,
                            const TorusConfig& cfg) {
  require_same_grid(m.grid, V.grid());
  require_same_grid(m.grid, w.grid());
  const PhaseSpaceDensity m1 = m.k == 1 ? m : m.marginal();
  const double kinetic = pairwise_sum_of(std::size_t(m1.n_max + 1), [&](std::size_t n) {
    return cfg.level_energy(int(n)) * m1.level_mass(int(n));
  });
  const RealField rho = m1.density();
  RealField vr(m.grid);
  for (std::size_t k = 0; k < vr.values().size(); ++k) vr[k] = V[k] * rho[k];
  const double potential = integrate(vr);
  double interaction = 0.0;
  if (m.k == 1) {
    const RealField wr = convolve_periodic(w, rho);
    for (std::size_t k = 0; k < vr.values().size(); ++k) vr[k] = rho[k] * wr[k];
    interaction = integrate(vr);
  } else {
    const int G = m.grid.size;
    const std::size_t G2 = m.grid.count(), C = m.cells();
    // two-point density rho2(x, y) = sum_{n1, n2} m(n1, x; n2, y)
    std::vector<double> rows(G2);
    parallel_for(G2, [&](std::size_t x) {
      const int xi = int(x) / G, xj = int(x) % G;
      rows[x] = pairwise_sum_of(G2, [&](std::size_t y) {
        double r2 = 0.0;
        for (int n1 = 0; n1 <= m.n_max; ++n1)
          for (int n2 = 0; n2 <= m.n_max; ++n2) r2 += m.values[(std::size_t(n1) * G2 + x) * C + std::size_t(n2) * G2 + y];
        const int yi = int(y) / G, yj = int(y) % G;
        return w(((xi - yi) % G + G) % G, ((xj - yj) % G + G) % G) * r2;
      });
    });
    const double h2 = m.grid.spacing() * m.grid.spacing();
    interaction = h2 * h2 * pairwise_sum(rows);
  }
  return kinetic + potential + interaction;
}

KineticIdentity kinetic_identity(const DensityMatrix& gamma, const PhaseSpaceDensity& m, const Localizer& loc) {
  if (gamma.k != 1) throw ConfigError("kinetic identity expects a one-body density matrix");
  require_k1(m, "kinetic_identity");
  const OrbitalSet& set = *gamma.basis;
  const TorusConfig& c = set.config;
  const Grid& g = set.grid;
  require_same_grid(g, loc.samples.grid());
  const std::vector<int> act = active_orbitals(gamma);
  KineticIdentity out;
  out.trace_kinetic = pairwise_sum_of(act.size(), [&](std::size_t i) {
    const int a = act[i];
    return c.level_energy(set.at(a).n) * gamma.matrix(a, a).real();
  });
  out.symbol_energy = pairwise_sum_of(std::size_t(m.n_max + 1), [&](std::size_t n) {
    return c.level_energy(int(n)) * m.level_mass(int(n));
  });
  // int dR ||pi (g_R f)||^2 with pi(g_R f) = g_R pi f - i hbar (grad g_R) f; the R-integrals
  // of g^2, g grad g and |grad g|^2 are translation invariant.
  const double h2 = g.spacing() * g.spacing();
  double s0 = 0.0, s2 = 0.0, s1x = 0.0, s1y = 0.0;
  {
    std::vector<double> a0(g.count()), a1(g.count()), a2(g.count()), a3(g.count());
    for (std::size_t k = 0; k < g.count(); ++k) {
      const double v = loc.samples[k], gx = loc.grad_x[k], gy = loc.grad_y[k];
      a0[k] = v * v;
      a1[k] = v * gx;
      a2[k] = v * gy;
      a3[k] = gx * gx + gy * gy;
    }
    s0 = h2 * pairwise_sum(a0);
    s1x = h2 * pairwise_sum(a1);
    s1y = h2 * pairwise_sum(a2);
    s2 = h2 * pairwise_sum(a3);
  }
  std::vector<std::array<ComplexField, 2>> mom;
  for (int a : act) mom.push_back(momentum_of(set, a));
  const double hb = c.hbar;
  cplx full{};
  for (std::size_t i = 0; i < act.size(); ++i)
    for (std::size_t j = 0; j < act.size(); ++j) {
      const cplx gca = gamma.matrix(act[j], act[i]);
      if (gca == cplx{}) continue;
      const ComplexField& pa = set[act[i]];
      const ComplexField& pc = set[act[j]];
      const cplx kin = inner(mom[i][0], mom[j][0]) + inner(mom[i][1], mom[j][1]);
      const cplx cross = cplx(0.0, -hb) * (s1x * inner(mom[i][0], pc) + s1y * inner(mom[i][1], pc)) +
                         cplx(0.0, hb) * (s1x * inner(pa, mom[j][0]) + s1y * inner(pa, mom[j][1]));
      full += gca * (s0 * kin + hb * hb * s2 * inner(pa, pc) + cross);
    }
  out.leakage = full.real() - out.symbol_energy;
  out.gradient_term = hb * hb * localizer_gradient_norm_sq(loc.lambda, g.L);
  out.residual = std::abs(out.trace_kinetic - (out.symbol_energy + out.leakage - out.gradient_term * gamma.trace()));
  return out;
}

int correction_level(const TorusConfig& cfg) { return cfg.N / cfg.d + 1; }

MassCorrection mass_correct(const PhaseSpaceDensity& m, const TorusConfig& cfg, const Localizer& loc) {
  require_k1(m, "mass_correct");
  require_same_grid(m.grid, loc.samples.grid());
  const double cap = cfg.pauli_cap();
  for (double v : m.values)
    if (v < 0.0 || v > cap * (1.0 + 1e-12)) throw ConfigError("mass_correct needs 0 <= m <= 1/(2 pi l_b^2 N)");
  MassCorrection out;
  out.n1 = correction_level(cfg);
  const int top = std::max(m.n_max, out.n1);
  PhaseSpaceDensity base = make_phase_space_density(top, m.grid, 1);
  std::copy(m.values.begin(), m.values.end(), base.values.begin());
  const auto weights = trace_weights(cfg, loc, top);
  const double t0 = upper_symbol_trace(base, weights);
  const std::size_t G2 = m.grid.count();
  const double h2 = m.grid.spacing() * m.grid.spacing();
  out.m = base;
  out.trace = t0;
  if (std::abs(t0 - 1.0) <= 1e-13) return out;
  out.added = t0 < 1.0;
  const std::size_t span = out.added ? std::size_t(out.n1 + 1) * G2 : base.values.size();
  auto cell = [&](std::size_t t, double tau) {
    const double v = base.values[t];
    return out.added ? v + std::min(tau, std::max(0.0, cap - v)) : std::max(0.0, v - tau);
  };
  auto trace_at = [&](double tau) {
    const double moved = h2 * pairwise_sum_of(span, [&](std::size_t t) {
      return (cell(t, tau) - base.values[t]) * weights[t / G2][t % G2];
    });
    return t0 + moved;
  };
  double lo = 0.0, hi = out.added ? cap : base.sup();
  if (out.added && trace_at(hi) < 1.0)
    throw ValidationError("mass correction cannot reach trace 1 below the Pauli cap");
  for (int it = 0; it < 200 && hi - lo > 1e-17 * cap; ++it) {
    const double mid = 0.5 * (lo + hi);
    const bool above = trace_at(mid) > 1.0;
    (above == out.added ? hi : lo) = mid;
  }
  const double tlo = trace_at(lo), thi = trace_at(hi);
  out.tau = std::abs(tlo - 1.0) <= std::abs(thi - 1.0) ? lo : hi;
  for (std::size_t t = 0; t < span; ++t) out.m.values[t] = cell(t, out.tau);
  out.trace = upper_symbol_trace(out.m, weights);
  double sup = 0.0;
  for (std::size_t t = 0; t < base.values.size(); ++t) sup = std::max(sup, std::abs(out.m.values[t] - base.values[t]));
  out.change_sup = sup;
  return out;
}

}  // namespace landau
