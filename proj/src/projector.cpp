#include "landau/projector.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>

#include "landau/errors.hpp"
#include "landau/fft.hpp"
#include "landau/hermite.hpp"
#include "landau/parallel.hpp"
#include "landau/reduce.hpp"

namespace landau {
namespace {

constexpr double kPi = std::numbers::pi;

struct RootTable {
  int n;
  std::vector<cplx> root;
  explicit RootTable(int n_) : n(n_), root(std::size_t(n_)) {
    for (int t = 0; t < n; ++t) root[std::size_t(t)] = std::polar(1.0, 2.0 * kPi * t / n);
  }
  // e^{2 pi i m / n}
  cplx operator()(long m) const {
    long t = m % n;
    if (t < 0) t += n;
    return root[std::size_t(t)];
  }
};

void check_level(int n) {
  if (n < 0 || n > kMaxLevel) throw ConfigError("projector level must lie in [0," + std::to_string(kMaxLevel) + "]");
}

// Terms f(u_k) h_n(u_k + q delta) with |f| majorized by sum_j a_j (2|u|+j)^j e^{-u^2/2} and
// |f| <= sup_f. Widen the window until prefactor * (dropped part) <= tol.
PairTruncation certify_pair(int n, const std::vector<double>& a, double sup_f, const TorusConfig& cfg,
                            double prefactor, double tol) {
  if (!(tol > 0.0)) throw TruncationError("truncation tolerance must be positive");
  const double fine = cfg.L / (cfg.d * cfg.l_b);
  const double coarse = cfg.L / cfg.l_b;
  std::vector<double> e(std::size_t(n) + 1, 0.0);
  e[std::size_t(n)] = 1.0;
  const double sup_h = hermite_function_sup(n);
  for (int j = 0; j < kTruncationBudget; ++j) {
    const double U = (j + 0.5) * fine;
    const double t1 = hermite_gaussian_tail(a, U, fine);
    const double t2 = hermite_gaussian_tail(e, U, coarse);
    if (!std::isfinite(t1) || !std::isfinite(t2)) continue;
    const double sq = sup_h * (2.0 * U / coarse + 2.0) + 2.0 * t2;
    const double sk = sup_f * (2.0 * U / fine + 1.0);
    const double bound = prefactor * (2.0 * t1 * sq + sk * 2.0 * t2);
    if (bound <= tol) return PairTruncation{U, TruncationPolicy{j + 1, bound}};
  }
  throw TruncationError("projector lattice sum cannot be certified to tolerance " + std::to_string(tol));
}

double kernel_prefactor(int n, const TorusConfig& c) {
  return 1.0 / (hermite_function_norm_sq(n) * c.L * c.l_b);
}

std::vector<double> unit_majorant(int n) {
  std::vector<double> e(std::size_t(n) + 1, 0.0);
  e[std::size_t(n)] = 1.0;
  return e;
}

// h_n' = (n H_{n-1} - H_{n+1}/2) e^{-u^2/2} and u h_n = (H_{n+1}/2 + n H_{n-1}) e^{-u^2/2}
// share this majorant.
std::vector<double> derivative_majorant(int n) {
  std::vector<double> a(std::size_t(n) + 2, 0.0);
  a[std::size_t(n) + 1] = 0.5;
  if (n >= 1) a[std::size_t(n) - 1] = n;
  return a;
}

double derivative_sup(int n) {
  return 0.5 * hermite_function_sup(n + 1) + (n >= 1 ? n * hermite_function_sup(n - 1) : 0.0);
}

struct HermiteTriple {
  double h, dh, uh;
};

HermiteTriple hermite_triple(int n, double u) {
  double H[kMaxLevel + 3];
  hermite_all(n + 1, u, H);
  const double g = std::exp(-0.5 * u * u);
  const double lower = n >= 1 ? n * H[n - 1] : 0.0;
  return {H[n] * g, (lower - 0.5 * H[n + 1]) * g, (0.5 * H[n + 1] + lower) * g};
}

// k range with |u_k(x)| <= U, u_k = (x + kL/d)/l_b.
std::pair<long, long> k_window(double x_lo, double x_hi, double U, const TorusConfig& c) {
  const double s = c.d / c.L;
  return {long(std::ceil((-U * c.l_b - x_hi) * s)), long(std::floor((U * c.l_b - x_lo) * s))};
}

// q range with |v + q delta| <= U.
std::pair<long, long> q_window(double v, double U, double delta) {
  return {long(std::ceil((-U - v) / delta)), long(std::floor((U - v) / delta))};
}

}  // namespace

ProjectorKernel make_projector_kernel(int n, const TorusConfig& cfg, double tol) {
  check_level(n);
  ProjectorKernel K;
  K.n = n;
  K.config = cfg;
  K.trunc = certify_pair(n, unit_majorant(n), hermite_function_sup(n), cfg, kernel_prefactor(n, cfg), tol);
  return K;
}

Eigen::MatrixXcd kernel_matrix(const ProjectorKernel& K, const std::vector<Point>& xs,
                               const std::vector<Point>& ys) {
  const TorusConfig& c = K.config;
  const double U = K.trunc.window, lb = c.l_b, L = c.L;
  const double delta = L / lb;
  if (xs.empty() || ys.empty()) return Eigen::MatrixXcd(Eigen::Index(xs.size()), Eigen::Index(ys.size()));
  double lo = xs[0].x, hi = xs[0].x;
  for (const Point& p : xs) lo = std::min(lo, p.x), hi = std::max(hi, p.x);
  const auto [k0, k1] = k_window(lo, hi, U, c);
  const Eigen::Index M = std::max<Eigen::Index>(0, Eigen::Index(k1 - k0 + 1));
  Eigen::MatrixXcd A(Eigen::Index(xs.size()), M), B(Eigen::Index(ys.size()), M);
  parallel_for(xs.size(), [&](std::size_t i) {
    const Point p = xs[i];
    for (Eigen::Index t = 0; t < M; ++t) {
      const long k = k0 + long(t);
      const double u = (p.x + double(k) * L / c.d) / lb;
      A(Eigen::Index(i), t) = std::polar(hermite(K.n, u, HermiteForm::function), -2.0 * kPi * double(k) * p.y / L);
    }
  });
  parallel_for(ys.size(), [&](std::size_t i) {
    const Point p = ys[i];
    for (Eigen::Index t = 0; t < M; ++t) {
      const long k = k0 + long(t);
      const double v = (p.x + double(k) * L / c.d) / lb;
      const auto [q0, q1] = q_window(v, U, delta);
      cplx s{};
      for (long q = q0; q <= q1; ++q)
        s += std::polar(hermite(K.n, v + double(q) * delta, HermiteForm::function),
                        2.0 * kPi * double(c.d) * double(q) * p.y / L);
      B(Eigen::Index(i), t) = std::polar(1.0, 2.0 * kPi * double(k) * p.y / L) * s;
    }
  });
  Eigen::MatrixXcd out = A * B.transpose();
  const double pref = kernel_prefactor(K.n, c);
  for (Eigen::Index i = 0; i < out.rows(); ++i)
    for (Eigen::Index j = 0; j < out.cols(); ++j) {
      const Point x = xs[std::size_t(i)], y = ys[std::size_t(j)];
      out(i, j) *= pref * std::polar(1.0, (y.x * y.y - x.x * x.y) / (lb * lb));
    }
  return out;
}

Eigen::MatrixXcd kernel_matrix(const ProjectorKernel& K, const std::vector<Point>& pts) {
  Eigen::MatrixXcd m = kernel_matrix(K, pts, pts);
  const Eigen::MatrixXcd sym = 0.5 * (m + m.adjoint());
  const double scale = std::max(m.cwiseAbs().maxCoeff(), 1e-300);
  if ((sym - m).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw ValidationError("projector kernel matrix is not Hermitian to 1e-12");
  return sym;
}

cplx ProjectorKernel::operator()(Point x, Point y) const {
  return kernel_matrix(*this, std::vector<Point>{x}, std::vector<Point>{y})(0, 0);
}

cplx projector_kernel(int n, Point x, Point y, const TorusConfig& cfg, double tol) {
  return make_projector_kernel(n, cfg, tol)(x, y);
}

DiagonalField diagonal_field(int n, const TorusConfig& c, const Grid& grid, double tol) {
  check_level(n);
  if (std::abs(grid.L - c.L) > 1e-14 * c.L) throw ConfigError("grid period differs from torus side");
  const double pref = kernel_prefactor(n, c);
  const PairTruncation tr = certify_pair(n, unit_majorant(n), hermite_function_sup(n), c, pref, tol);
  const double U = tr.window, lb = c.l_b, L = c.L, delta = L / lb;
  const int G = grid.size;
  const long Q = long(std::floor(2.0 * U / delta)) + 1;
  const RootTable roots(G);
  // Poisson-resummed q = 0 part: sum_{m != 0} e^{-pi d m^2/2} L_n(pi d m^2) e^{2 i pi m d x/L}
  std::vector<double> coef;
  for (int m = 1;; ++m) {
    const double w = 2.0 * kPi * m * c.d * lb / L;
    const double a = hermite_square_fourier(n, w) / hermite_function_norm_sq(n);
    if (std::exp(-0.25 * w * w) == 0.0) break;
    coef.push_back(a);
  }
  const double dev_scale = 2.0 * kPi * lb * lb * pref;
  DiagonalField out{RealField(grid), RealField(grid), 0.0, 0.0, tr};
  parallel_for(std::size_t(G), [&](std::size_t ii) {
    const int i = int(ii);
    const double x = grid.coord(i);
    const auto [k0, k1] = k_window(x, x, U, c);
    std::vector<double> D(std::size_t(2 * Q + 1));
    for (long q = -Q; q <= Q; ++q) {
      D[std::size_t(q + Q)] = pairwise_sum_of(std::size_t(std::max(0L, k1 - k0 + 1)), [&](std::size_t t) {
        const double u = (x + double(k0 + long(t)) * L / c.d) / lb;
        const double v = u + double(q) * delta;
        if (std::abs(v) > U) return 0.0;
        return hermite(n, u, HermiteForm::function) * hermite(n, v, HermiteForm::function);
      });
    }
    double p = 0.0;
    for (std::size_t m = coef.size(); m-- > 0;)
      p += 2.0 * coef[m] * roots(long(m + 1) * c.d * i).real();
    for (int j = 0; j < G; ++j) {
      cplx s{};
      double dv = 0.0;
      for (long q = -Q; q <= Q; ++q) s += D[std::size_t(q + Q)] * roots(long(c.d) * q * j);
      for (long q = Q; q >= 1; --q)
        dv += (D[std::size_t(Q + q)] + D[std::size_t(Q - q)]) * roots(long(c.d) * q * j).real();
      out.values(i, j) = pref * s.real();
      out.deviation(i, j) = p + dev_scale * dv;
    }
  });
  out.sup_deviation = sup_norm(out.deviation);
  out.min_value = *std::min_element(out.values.values().begin(), out.values.values().end());
  return out;
}

std::array<double, 2> hermite_reference_integral(int n) {
  check_level(n);
  // Simpson on [-20, 20]; mirrored nodes are added first so odd integrands cancel exactly.
  const int m = 1 << 14;
  const double a = -20.0, h = 40.0 / m;
  auto f = [&](double u) {
    const HermiteTriple t = hermite_triple(n, u);
    const double g = std::exp(-u * u);
    return std::array<double, 2>{t.dh * t.h * g, t.uh * t.h * g};
  };
  double sx = 0.0, sy = 0.0;
  for (int k = 0; k <= m / 2; ++k) {
    const double w = (k == 0) ? 1.0 : (k % 2 ? 4.0 : 2.0);
    const auto lo = f(a + k * h);
    if (k == m / 2) {
      sx += w * lo[0];
      sy += w * lo[1];
      break;
    }
    const auto hi = f(a + (m - k) * h);
    sx += w * (lo[0] + hi[0]);
    sy += w * (lo[1] + hi[1]);
  }
  return {sx * h / 3.0, sy * h / 3.0};
}

std::array<cplx, 2> momentum_reference(int n, const TorusConfig& c) {
  const auto I = hermite_reference_integral(n);
  const double s = c.b / c.l_b / (2.0 * kPi * hermite_function_norm_sq(n));
  return {cplx(0.0, s * I[0]), cplx(s * I[1], 0.0)};
}

MomentumDiagonal momentum_diagonal(int n, const TorusConfig& c, const Grid& grid, double tol) {
  check_level(n);
  if (n + 1 > kMaxLevel) throw ConfigError("momentum diagonal needs level n+1 within the supported range");
  if (std::abs(grid.L - c.L) > 1e-14 * c.L) throw ConfigError("grid period differs from torus side");
  const double nh = hermite_function_norm_sq(n);
  const double pref = c.b / (nh * c.L);
  const PairTruncation tr = certify_pair(n, derivative_majorant(n), derivative_sup(n), c, pref, tol);
  const double U = tr.window, lb = c.l_b, L = c.L, delta = L / lb;
  const int G = grid.size;
  const long Q = long(std::floor(2.0 * U / delta)) + 1;
  const RootTable roots(G);
  // q = 0 parts via Poisson, with F the transform of h_n^2:
  //   x: i b d l_b/(L^2 ||h||^2) sum_{m>=1} w_m F(w_m) sin, y: 2 b d l_b/(L^2 ||h||^2) sum F'(w_m) sin
  std::vector<double> cx, cy;
  for (int m = 1;; ++m) {
    const double w = 2.0 * kPi * m * c.d * lb / L;
    if (std::exp(-0.25 * w * w) == 0.0) break;
    cx.push_back(w * hermite_square_fourier(n, w));
    cy.push_back(2.0 * hermite_square_fourier_deriv(n, w));
  }
  const double p0 = c.b * c.d * lb / (L * L * nh);
  MomentumDiagonal out{ComplexField(grid), ComplexField(grid), momentum_reference(n, c), 0.0};
  parallel_for(std::size_t(G), [&](std::size_t ii) {
    const int i = int(ii);
    const double x = grid.coord(i);
    const auto [k0, k1] = k_window(x, x, U, c);
    std::vector<cplx> Dx(std::size_t(2 * Q + 1)), Dy(std::size_t(2 * Q + 1));
    const std::size_t nk = std::size_t(std::max(0L, k1 - k0 + 1));
    for (long q = -Q; q <= Q; ++q) {
      if (q == 0) continue;
      auto term = [&](std::size_t t, bool xcomp) {
        const double u = (x + double(k0 + long(t)) * L / c.d) / lb;
        const double v = u + double(q) * delta;
        if (std::abs(v) > U) return 0.0;
        const HermiteTriple a = hermite_triple(n, u);
        return (xcomp ? a.dh : a.uh) * hermite(n, v, HermiteForm::function);
      };
      Dx[std::size_t(q + Q)] = cplx(0.0, -pairwise_sum_of(nk, [&](std::size_t t) { return term(t, true); }));
      Dy[std::size_t(q + Q)] = -pairwise_sum_of(nk, [&](std::size_t t) { return term(t, false); });
    }
    double sx = 0.0, sy = 0.0;
    for (std::size_t m = cx.size(); m-- > 0;) {
      const double s = roots(long(m + 1) * c.d * i).imag();
      sx += cx[m] * s;
      sy += cy[m] * s;
    }
    for (int j = 0; j < G; ++j) {
      cplx ax(0.0, p0 * sx), ay(p0 * sy, 0.0);
      for (long q = -Q; q <= Q; ++q) {
        if (q == 0) continue;
        const cplx e = roots(long(c.d) * q * j);
        ax += pref * Dx[std::size_t(q + Q)] * e;
        ay += pref * Dy[std::size_t(q + Q)] * e;
      }
      out.px(i, j) = ax;
      out.py(i, j) = ay;
    }
  });
  double sup = 0.0;
  for (std::size_t k = 0; k < grid.count(); ++k)
    sup = std::max(sup, std::hypot(std::abs(out.px[k] - out.reference[0]), std::abs(out.py[k] - out.reference[1])));
  out.sup_deviation = sup / c.b;
  return out;
}

LocalizedProjector::LocalizedProjector(std::vector<ComplexField> vectors) : v_(std::move(vectors)) {
  for (const auto& f : v_) require_same_grid(f.grid(), v_.front().grid());
}

ComplexField LocalizedProjector::apply(const ComplexField& f) const {
  ComplexField out(f.grid());
  for (const auto& v : v_) {
    require_same_grid(v.grid(), f.grid());
    const cplx c = inner(v, f);
    for (std::size_t k = 0; k < out.values().size(); ++k) out[k] += c * v[k];
  }
  return out;
}

double LocalizedProjector::trace() const {
  return pairwise_sum_of(v_.size(), [&](std::size_t l) { return std::pow(norm_l2(v_[l]), 2); });
}

double LocalizedProjector::rayleigh(const ComplexField& f) const {
  const double nf = std::pow(norm_l2(f), 2);
  if (!(nf > 0.0)) throw ConfigError("Rayleigh quotient of the zero field");
  return pairwise_sum_of(v_.size(), [&](std::size_t l) { return std::norm(inner(v_[l], f)); }) / nf;
}

LocalizedProjector localized_projector(const OrbitalSet& set, int n, Point R, const Localizer& loc) {
  if (n < 0 || n > set.n_max) throw ConfigError("level outside the orbital set");
  const Grid& g = set.grid;
  require_same_grid(g, loc.samples.grid());
  const double h = g.spacing();
  const double ri = R.x / h, rj = R.y / h;
  if (std::abs(ri - std::round(ri)) > 1e-9 || std::abs(rj - std::round(rj)) > 1e-9)
    throw ConfigError("localized projector centre must be a grid point");
  const int G = g.size;
  const int si = int(((long(std::llround(ri)) % G) + G) % G), sj = int(((long(std::llround(rj)) % G) + G) % G);
  std::vector<ComplexField> v;
  for (int l = 0; l < set.config.d; ++l) {
    const ComplexField& psi = set[set.index(n, l)];
    ComplexField f(g);
    for (int i = 0; i < G; ++i)
      for (int j = 0; j < G; ++j) f(i, j) = loc.samples((i - si + G) % G, (j - sj + G) % G) * psi(i, j);
    v.push_back(std::move(f));
  }
  return LocalizedProjector(std::move(v));
}

double localized_trace_error(const DiagonalField& diag, const Localizer& loc) {
  require_same_grid(diag.deviation.grid(), loc.samples.grid());
  RealField g2(loc.samples.grid());
  for (std::size_t k = 0; k < g2.values().size(); ++k) g2[k] = loc.samples[k] * loc.samples[k];
  return sup_norm(convolve_periodic(diag.deviation, g2));
}

IdentityCheck resolution_of_identity(const OrbitalSet& set, const Localizer& loc, const ComplexField& f) {
  const Grid& g = set.grid;
  require_same_grid(g, loc.samples.grid());
  require_same_grid(g, f.grid());
  const ComplexField gc = to_complex(loc.samples);
  const int M = set.count();
  std::vector<ComplexField> parts(static_cast<std::size_t>(M));
  std::vector<double> mass(static_cast<std::size_t>(M));
  parallel_for(std::size_t(M), [&](std::size_t a) {
    ComplexField p(g);
    for (std::size_t k = 0; k < g.count(); ++k) p[k] = std::conj(set[int(a)][k]) * f[k];
    // c_a(R) = <g_R psi_a, f>; g is even, so the correlation is a convolution.
    const ComplexField coeff = convolve_periodic(p, gc);
    mass[a] = std::pow(norm_l2(coeff), 2);
    const ComplexField back = convolve_periodic(coeff, gc);
    for (std::size_t k = 0; k < g.count(); ++k) p[k] = set[int(a)][k] * back[k];
    parts[a] = std::move(p);
  });
  IdentityCheck out;
  out.reconstruction = ComplexField(g);
  for (std::size_t k = 0; k < g.count(); ++k)
    out.reconstruction[k] = pairwise_sum_of(std::size_t(M), [&](std::size_t a) { return parts[a][k]; });
  ComplexField diff(g);
  for (std::size_t k = 0; k < g.count(); ++k) diff[k] = f[k] - out.reconstruction[k];
  out.residual = norm_l2(diff);
  const double leak2 = std::pow(norm_l2(f), 2) - pairwise_sum(mass);
  out.leakage = std::sqrt(std::max(0.0, leak2));
  return out;
}

std::vector<KernelStudyRow> kernel_convergence_study(const std::vector<int>& n_list,
                                                     const std::vector<int>& d_list, double L,
                                                     double hbar, double tol) {
  std::vector<KernelStudyRow> rows;
  for (int d : d_list) {
    const TorusConfig c = build_config(L, d, hbar, 0, 1);
    const int G = int(std::bit_ceil(unsigned(std::max(128, 8 * d))));
    const Grid grid = make_grid(G, L);
    const Localizer loc = build_localizer(default_lambda(d), grid);
    for (int n : n_list) {
      const DiagonalField diag = diagonal_field(n, c, grid, tol);
      const MomentumDiagonal mom = momentum_diagonal(n, c, grid, tol);
      const auto ref = hermite_reference_integral(n);
      KernelStudyRow r;
      r.n = n;
      r.d = d;
      r.grid = G;
      r.l_b = c.l_b;
      r.lambda = loc.lambda;
      r.deviation = diag.sup_deviation;
      r.deviation_over_lb = diag.sup_deviation / c.l_b;
      r.momentum_deviation = mom.sup_deviation;
      r.momentum_over_lb = mom.sup_deviation / c.l_b;
      r.reference_x = ref[0];
      r.reference_y = ref[1];
      r.trace_error = std::abs(integrate(diag.values) - d) / d;
      r.localized_trace_error = localized_trace_error(diag, loc);
      rows.push_back(r);
    }
  }
  return rows;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw ConfigError("slope fit needs at least two paired samples");
  const std::size_t m = x.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw ConfigError("log-log fit needs positive samples");
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= double(m);
  my /= double(m);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  if (!(sxx > 0.0)) throw ConfigError("log-log fit needs distinct abscissae");
  return sxy / sxx;
}

}  // namespace landau
