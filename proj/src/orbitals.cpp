#include "landau/orbitals.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "landau/errors.hpp"
#include "landau/fft.hpp"
#include "landau/hermite.hpp"
#include "landau/parallel.hpp"
#include "landau/reduce.hpp"

namespace landau {
namespace {

constexpr double kPi = std::numbers::pi;
const cplx I(0.0, 1.0);

double factorial(int n) {
  double f = 1.0;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

std::vector<double> majorant(const std::vector<cplx>& alpha) {
  std::vector<double> a(alpha.size());
  for (std::size_t j = 0; j < alpha.size(); ++j) a[j] = std::abs(alpha[j]);
  return a;
}

// sum_j alpha_j H_j(u) e^{-u^2/2}
cplx hermite_combo(const std::vector<cplx>& alpha, double u) {
  const int top = int(alpha.size()) - 1;
  if (top < 0) return {};
  double H[kMaxLevel + 3];
  hermite_all(top, u, H);
  cplx s{};
  for (int j = 0; j <= top; ++j)
    if (alpha[std::size_t(j)] != cplx{}) s += alpha[std::size_t(j)] * H[j];
  return s * std::exp(-0.5 * u * u);
}

// e^{2 pi i t} for t = m * i / n, exact on the root-of-unity table.
struct RootTable {
  int n;
  std::vector<cplx> root;
  explicit RootTable(int n_) : n(n_), root(std::size_t(n_)) {
    for (int t = 0; t < n; ++t) root[std::size_t(t)] = std::polar(1.0, 2.0 * kPi * t / n);
  }
  cplx operator()(long m, long i) const {
    long t = (m * i) % n;
    if (t < 0) t += n;
    return root[std::size_t(t)];
  }
};

}  // namespace

cplx orbital_constant(int n) {
  cplx p(1.0, 0.0);
  for (int k = 0; k < n; ++k) p *= cplx(0.0, -1.0);
  return p * std::pow(2.0, -0.5 * n) / (std::pow(kPi, 0.25) * std::sqrt(factorial(n)));
}

cplx poisson_constant(int n) {
  return std::pow(kPi, 0.25) * std::pow(2.0, 0.5 * (1 - n)) / std::sqrt(factorial(n));
}

void check_index(OrbitalIndex idx, const TorusConfig& cfg) {
  if (idx.n < 0 || idx.n > kMaxLevel)
    throw ConfigError("level index must lie in [0," + std::to_string(kMaxLevel) + "]");
  if (idx.l < 0 || idx.l >= cfg.d) throw ConfigError("intra-level index must lie in [0,d)");
}

LandauSeries orbital_series(OrbitalIndex idx) {
  LandauSeries s;
  s.l = idx.l;
  s.alpha.assign(std::size_t(idx.n) + 1, cplx{});
  s.alpha[std::size_t(idx.n)] = orbital_constant(idx.n);
  return s;
}

LandauSeries apply_ladder(const LandauSeries& s, Ladder which) {
  LandauSeries out;
  out.l = s.l;
  const double r2 = 1.0 / std::sqrt(2.0);
  if (which == Ladder::raise) {
    // a^dagger: P -> (-i/sqrt2)(2uP - P'), i.e. H_j -> (-i/sqrt2) H_{j+1}
    if (int(s.alpha.size()) > kMaxLevel) throw ConfigError("raising beyond the supported level range");
    out.alpha.assign(s.alpha.size() + 1, cplx{});
    for (std::size_t j = 0; j < s.alpha.size(); ++j) out.alpha[j + 1] = cplx(0.0, -r2) * s.alpha[j];
  } else {
    // a: P -> (i/sqrt2) P', i.e. H_j -> (i/sqrt2) 2j H_{j-1}
    out.alpha.assign(std::max<std::size_t>(s.alpha.size(), 2) - 1, cplx{});
    for (std::size_t j = 1; j < s.alpha.size(); ++j)
      out.alpha[j - 1] = cplx(0.0, r2) * (2.0 * double(j)) * s.alpha[j];
  }
  return out;
}

cplx evaluate(const LandauSeries& s, Point z, const TorusConfig& cfg, double tol,
              TruncationPolicy* used) {
  const double L = cfg.L, lb = cfg.l_b;
  const double pref = 1.0 / std::sqrt(L * lb);
  const TruncationPolicy pol = certify_lattice_sum(majorant(s.alpha), L / lb, pref, tol);
  if (used) *used = pol;
  const double shift = s.l * L / cfg.d;
  const long kc = std::lround(-(z.y + shift) / L);
  const cplx v = pairwise_sum_of(std::size_t(2 * pol.K + 1), [&](std::size_t i) {
    const long k = kc - pol.K + long(i);
    const double u = (z.y + k * L + shift) / lb;
    const double m = double(s.l + k * cfg.d);
    return std::polar(1.0, 2.0 * kPi * m * z.x / L) * hermite_combo(s.alpha, u);
  });
  return pref * v;
}

ComplexField sample(const LandauSeries& s, const TorusConfig& cfg, const Grid& grid, double tol,
                    TruncationPolicy* used) {
  const double L = cfg.L, lb = cfg.l_b;
  if (std::abs(grid.L - L) > 1e-14 * L) throw ConfigError("grid period differs from torus side");
  const double pref = 1.0 / std::sqrt(L * lb);
  const TruncationPolicy pol = certify_lattice_sum(majorant(s.alpha), L / lb, pref, tol);
  if (used) *used = pol;
  const int n = grid.size;
  const int terms = 2 * pol.K + 1;
  const double shift = s.l * L / cfg.d;
  // Per y-row: the x-frequency m_k and the y-profile of each kept term.
  std::vector<long> freq(std::size_t(n) * terms);
  std::vector<cplx> prof(std::size_t(n) * terms);
  for (int j = 0; j < n; ++j) {
    const double y = grid.coord(j);
    const long kc = std::lround(-(y + shift) / L);
    for (int t = 0; t < terms; ++t) {
      const long k = kc - pol.K + t;
      freq[std::size_t(j) * terms + t] = s.l + k * cfg.d;
      prof[std::size_t(j) * terms + t] = pref * hermite_combo(s.alpha, (y + k * L + shift) / lb);
    }
  }
  const RootTable roots(n);
  ComplexField out(grid);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const std::size_t base = std::size_t(j) * terms;
      out(i, j) = pairwise_sum_of(std::size_t(terms), [&](std::size_t t) {
        return roots(freq[base + t], i) * prof[base + t];
      });
    }
  return out;
}

cplx eigenfunction(OrbitalIndex idx, Point z, const TorusConfig& cfg, double tol, EvalMethod method,
                   TruncationPolicy* used) {
  check_index(idx, cfg);
  if (method == EvalMethod::direct) return evaluate(orbital_series(idx), z, cfg, tol, used);
  // Resummed form: c~_n sqrt(l_b)/L^{3/2} e^{-i x y/l_b^2}
  //   sum_k h_n((x + kL/d)/l_b) e^{-2 i pi k (y/L + l/d)}
  const double L = cfg.L, lb = cfg.l_b;
  const int n = idx.n;
  const cplx ct = poisson_constant(n);
  const double pref = std::abs(ct) * std::sqrt(lb) / std::pow(L, 1.5);
  std::vector<double> a(std::size_t(n) + 1, 0.0);
  a[std::size_t(n)] = 1.0;
  const double delta = L / (cfg.d * lb);
  const TruncationPolicy pol = certify_lattice_sum(a, delta, pref, tol);
  if (used) *used = pol;
  const long kc = std::lround(-z.x * cfg.d / L);
  const cplx v = pairwise_sum_of(std::size_t(2 * pol.K + 1), [&](std::size_t i) {
    const long k = kc - pol.K + long(i);
    const double u = (z.x + k * L / cfg.d) / lb;
    const double ph = -2.0 * kPi * (double(k) * z.y / L + double(k * idx.l % cfg.d) / cfg.d);
    return std::polar(hermite(n, u, HermiteForm::function), ph);
  });
  return ct * std::sqrt(lb) / std::pow(L, 1.5) * std::polar(1.0, -z.x * z.y / (lb * lb)) * v;
}

cplx apply_ladder(OrbitalIndex idx, Point z, const TorusConfig& cfg, Ladder which, double tol) {
  check_index(idx, cfg);
  return evaluate(apply_ladder(orbital_series(idx), which), z, cfg, tol);
}

cplx lll_theta_form(int l, Point z, const TorusConfig& cfg, double tol) {
  check_index({0, l}, cfg);
  const double L = cfg.L, lb = cfg.l_b;
  const cplx zz(z.x, z.y);
  const ThetaValue th = theta(double(cfg.d) * zz / L + I * double(l), I * double(cfg.d), tol);
  const cplx e = -kPi * double(l * l) / cfg.d - z.y * z.y / (2.0 * lb * lb) + 2.0 * I * kPi * double(l) * zz / L;
  return std::pow(kPi, -0.25) / std::sqrt(L * lb) * std::exp(e) * th.value;
}

namespace {

std::string fmt(const char* what, double value, double tol) {
  std::ostringstream os;
  os.precision(3);
  os << what << " = " << value << " exceeds tolerance " << tol;
  return os.str();
}

// Deterministic quasi-random points in [0,L)^2.
Point sample_point(int k, double L) {
  const double g1 = 0.7548776662466927, g2 = 0.5698402909980532;
  return {L * std::fmod(0.5 + g1 * k, 1.0), L * std::fmod(0.5 + g2 * k, 1.0)};
}

}  // namespace

OrbitalSet build_orbital_set(const TorusConfig& cfg, int n_max, const Grid& grid, double tol,
                             const OrbitalSetOptions& opts) {
  if (n_max < 0 || n_max > kMaxLevel)
    throw ConfigError("n_max must lie in [0," + std::to_string(kMaxLevel) + "]");
  if (std::abs(grid.L - cfg.L) > 1e-14 * cfg.L) throw ConfigError("grid period differs from torus side");
  OrbitalSet set;
  set.config = cfg;
  set.n_max = n_max;
  set.grid = grid;
  const int d = cfg.d;
  const int M = (n_max + 1) * d;
  for (int n = 0; n <= n_max; ++n) {
    set.c.push_back(orbital_constant(n));
    set.c_tilde.push_back(poisson_constant(n));
  }
  set.samples.resize(std::size_t(M));
  std::vector<TruncationPolicy> pols(static_cast<std::size_t>(M));
  parallel_for(std::size_t(M), [&](std::size_t a) {
    set.samples[a] = sample(orbital_series(set.at(int(a))), cfg, grid, tol, &pols[a]);
  });
  for (const auto& p : pols)
    if (p.K > set.policy.K || (p.K == set.policy.K && p.tail_bound > set.policy.tail_bound)) set.policy = p;
  if (!opts.validate) return set;

  OrbitalValidation& v = set.validation;
  // Gram matrix on the grid.
  {
    std::vector<double> dev(std::size_t(M) * M, 0.0);
    parallel_for(std::size_t(M), [&](std::size_t a) {
      for (int b = int(a); b < M; ++b) {
        const cplx g = inner(set.samples[a], set.samples[std::size_t(b)]);
        dev[a * M + b] = std::abs(g - (int(a) == b ? 1.0 : 0.0));
      }
    });
    v.gram_deviation = *std::max_element(dev.begin(), dev.end());
  }
  // Boundary conditions psi(L + it) = psi(it), psi(t + iL) = e^{-iLt/l_b^2} psi(t).
  {
    std::vector<double> res(std::size_t(M), 0.0);
    parallel_for(std::size_t(M), [&](std::size_t a) {
      const OrbitalIndex idx = set.at(int(a));
      double r = 0.0;
      for (int j = 0; j < opts.edge_samples; ++j) {
        const double t = cfg.L * j / opts.edge_samples;
        const cplx x0 = eigenfunction(idx, {0.0, t}, cfg, tol);
        const cplx xL = eigenfunction(idx, {cfg.L, t}, cfg, tol);
        const cplx y0 = eigenfunction(idx, {t, 0.0}, cfg, tol);
        const cplx yL = eigenfunction(idx, {t, cfg.L}, cfg, tol);
        r = std::max(r, std::abs(xL - x0));
        r = std::max(r, std::abs(yL - std::polar(1.0, -cfg.L * t / (cfg.l_b * cfg.l_b)) * y0));
      }
      res[a] = r;
    });
    v.boundary_residual = *std::max_element(res.begin(), res.end());
  }
  // Ladder identities and the kinetic energy through 2 hbar b (a^dagger a + 1/2).
  {
    std::vector<double> lad(std::size_t(M), 0.0), kin(std::size_t(M), 0.0);
    parallel_for(std::size_t(M), [&](std::size_t a) {
      const OrbitalIndex idx = set.at(int(a));
      const LandauSeries s = orbital_series(idx);
      const ComplexField& psi = set.samples[a];
      double r = 0.0;
      const ComplexField lo = sample(apply_ladder(s, Ladder::lower), cfg, grid, tol);
      if (idx.n == 0) {
        r = std::max(r, sup_norm(lo));
      } else {
        const ComplexField& below = set.samples[std::size_t(set.index(idx.n - 1, idx.l))];
        const double sn = std::sqrt(double(idx.n));
        for (std::size_t k = 0; k < grid.count(); ++k) r = std::max(r, std::abs(lo[k] - sn * below[k]));
      }
      if (idx.n < n_max) {
        const ComplexField up = sample(apply_ladder(s, Ladder::raise), cfg, grid, tol);
        const ComplexField& above = set.samples[std::size_t(set.index(idx.n + 1, idx.l))];
        const double sn = std::sqrt(double(idx.n + 1));
        for (std::size_t k = 0; k < grid.count(); ++k) r = std::max(r, std::abs(up[k] - sn * above[k]));
      }
      const ComplexField aad = sample(apply_ladder(apply_ladder(s, Ladder::raise), Ladder::lower), cfg, grid, tol);
      const ComplexField ada = sample(apply_ladder(apply_ladder(s, Ladder::lower), Ladder::raise), cfg, grid, tol);
      for (std::size_t k = 0; k < grid.count(); ++k) r = std::max(r, std::abs(aad[k] - ada[k] - psi[k]));
      lad[a] = r;
      const double nl = norm_l2(lo), np = norm_l2(psi);
      const double e = 2.0 * cfg.hbar_b() * (nl * nl + 0.5 * np * np);
      kin[a] = std::abs(e - cfg.level_energy(idx.n)) / cfg.level_energy(idx.n);
    });
    v.ladder_residual = *std::max_element(lad.begin(), lad.end());
    v.kinetic_residual = *std::max_element(kin.begin(), kin.end());
  }
  // |psi| is L/d-periodic in x and L-periodic in y.
  {
    std::vector<double> per(std::size_t(M), 0.0);
    parallel_for(std::size_t(M), [&](std::size_t a) {
      const OrbitalIndex idx = set.at(int(a));
      double r = 0.0;
      for (int k = 0; k < opts.edge_samples; ++k) {
        const Point z = sample_point(k, cfg.L);
        const double m0 = std::abs(eigenfunction(idx, z, cfg, tol));
        r = std::max(r, std::abs(std::abs(eigenfunction(idx, {z.x + cfg.L / d, z.y}, cfg, tol)) - m0));
        r = std::max(r, std::abs(std::abs(eigenfunction(idx, {z.x, z.y + cfg.L}, cfg, tol)) - m0));
      }
      per[a] = r;
    });
    v.periodicity_residual = *std::max_element(per.begin(), per.end());
  }
  if (v.gram_deviation > opts.gram_tol) throw ValidationError(fmt("Gram deviation", v.gram_deviation, opts.gram_tol));
  if (v.boundary_residual > opts.boundary_tol)
    throw ValidationError(fmt("boundary residual", v.boundary_residual, opts.boundary_tol));
  if (v.ladder_residual > opts.ladder_tol)
    throw ValidationError(fmt("ladder residual", v.ladder_residual, opts.ladder_tol));
  if (v.periodicity_residual > opts.periodicity_tol)
    throw ValidationError(fmt("periodicity residual", v.periodicity_residual, opts.periodicity_tol));
  if (v.kinetic_residual > opts.kinetic_tol)
    throw ValidationError(fmt("kinetic residual", v.kinetic_residual, opts.kinetic_tol));
  return set;
}

ComplexField magnetic_translate(const ComplexField& f, Point z0, const TorusConfig& cfg, bool interpolate) {
  const Grid& g = f.grid();
  const int n = g.size;
  const double h = g.spacing(), lb2 = cfg.l_b * cfg.l_b;
  const double si = z0.x / h, sj = z0.y / h;
  const long i0 = std::lround(si), j0 = std::lround(sj);
  const bool on_grid = std::abs(si - double(i0)) <= 1e-9 * std::max(1.0, std::abs(si)) &&
                       std::abs(sj - double(j0)) <= 1e-9 * std::max(1.0, std::abs(sj));
  ComplexField out(g);
  if (on_grid) {
    for (int i = 0; i < n; ++i) {
      const long is = i - i0;
      const long iw = ((is % n) + n) % n;
      const double xs = double(is) * h;
      for (int j = 0; j < n; ++j) {
        const long js = j - j0;
        const long jw = ((js % n) + n) % n;
        const long m = (js - jw) / n;  // y_s = y_w + m L
        const double ph = -double(m) * cfg.L * xs / lb2 - double(j0) * h * g.coord(i) / lb2;
        out(i, j) = std::polar(1.0, ph) * f(int(iw), int(jw));
      }
    }
    return out;
  }
  if (!interpolate) throw ConfigError("translation is not a grid multiple; enable interpolation");
  // Shift along y after removing the magnetic phase (e^{ixy/l_b^2} f is
  // L-periodic in y), then along x, where the result is L-periodic.
  const double kk = 2.0 * kPi / cfg.L;
  auto shift_line = [&](std::vector<cplx>& line, double s) {
    fft1(line, -1);
    for (int k = 0; k < n; ++k) {
      const int m = dft_frequency(k, n);
      const cplx fac = (2 * std::abs(m) == n) ? cplx(std::cos(kk * m * s), 0.0) : std::polar(1.0, -kk * m * s);
      line[std::size_t(k)] *= fac / double(n);
    }
    fft1(line, +1);
  };
  ComplexField tmp(g);
  std::vector<cplx> line(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double x = g.coord(i);
    for (int j = 0; j < n; ++j) line[std::size_t(j)] = std::polar(1.0, x * g.coord(j) / lb2) * f(i, j);
    shift_line(line, z0.y);
    for (int j = 0; j < n; ++j) tmp(i, j) = std::polar(1.0, -x * (g.coord(j) - z0.y) / lb2) * line[std::size_t(j)];
  }
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) line[std::size_t(i)] = tmp(i, j);
    shift_line(line, z0.x);
    for (int i = 0; i < n; ++i) out(i, j) = std::polar(1.0, -z0.y * g.coord(i) / lb2) * line[std::size_t(i)];
  }
  return out;
}

}  // namespace landau
