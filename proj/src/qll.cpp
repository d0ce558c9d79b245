#include "landau/qll.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "landau/errors.hpp"
#include "landau/fft.hpp"
#include "landau/husimi.hpp"
#include "landau/potential.hpp"
#include "landau/reduce.hpp"

namespace landau {
namespace {

double h2_of(const Grid& g) { return g.spacing() * g.spacing(); }

double dot(const RealField& a, const RealField& b) {
  return h2_of(a.grid()) * pairwise_sum_of(a.values().size(), [&](std::size_t k) { return a[k] * b[k]; });
}

RealField convolve_w(const RealField& rho, const QllProblem& p) {
  const int n = rho.size();
  auto a = forward_transform(rho);
  const double scale = 1.0 / (double(n) * n);
  for (std::size_t k = 0; k < a.size(); ++k) a[k] *= p.w_hat[k] * scale;
  fft2(a, n, +1);
  RealField out(rho.grid());
  for (std::size_t k = 0; k < a.size(); ++k) out[k] = a[k].real();
  return out;
}

double energy_with(const RealField& rho, const RealField& wr, const QllProblem& p) {
  const double h2 = h2_of(rho.grid());
  return h2 * pairwise_sum_of(rho.values().size(), [&](std::size_t k) { return rho[k] * (p.V[k] + wr[k]); });
}

double clipped_mass(const RealField& rho, double mu, double cap) {
  return h2_of(rho.grid()) *
         pairwise_sum_of(rho.values().size(), [&](std::size_t k) { return std::clamp(rho[k] - mu, 0.0, cap); });
}

}  // namespace

QllProblem make_qll_problem(RealField V, RealField w, double mass, double cap) {
  require_same_grid(V.grid(), w.grid());
  if (!(cap > 0.0) || !(mass >= 0.0)) throw ConfigError("qLL constraints need cap > 0 and mass >= 0");
  const double L2 = V.grid().L * V.grid().L;
  if (mass > cap * L2 * (1.0 + 1e-14)) throw ConfigError("qLL domain is empty: mass exceeds cap * L^2");
  if (!is_even_on_grid(w)) throw ConfigError("interaction must be even under x -> -x");
  QllProblem p;
  p.w_hat = forward_transform(w);
  const double h2 = h2_of(w.grid());
  for (auto& v : p.w_hat) v *= h2;
  p.V = std::move(V);
  p.w = std::move(w);
  p.mass = mass;
  p.cap = cap;
  return p;
}

QllProblem make_qll_problem(const TorusConfig& cfg, RealField V, RealField w) {
  if (cfg.q + cfg.r <= 0.0) throw ConfigError("q = r = 0 has no partially filled level");
  if (std::abs(V.grid().L - cfg.L) > 1e-14 * cfg.L) throw ConfigError("potential grid differs from the torus");
  return make_qll_problem(std::move(V), std::move(w), cfg.partial_mass(), cfg.pauli_cap());
}

double qll_energy(const RealField& rho, const QllProblem& p) {
  require_same_grid(rho.grid(), p.grid());
  return energy_with(rho, convolve_w(rho, p), p);
}

RealField qll_gradient(const RealField& rho, const QllProblem& p) {
  require_same_grid(rho.grid(), p.grid());
  RealField g = convolve_w(rho, p);
  for (std::size_t k = 0; k < g.values().size(); ++k) g[k] = p.V[k] + 2.0 * g[k];
  return g;
}

RealField project_onto_domain(const RealField& rho, const QllProblem& p, double* mu_out) {
  require_same_grid(rho.grid(), p.grid());
  const double cap = p.cap, target = p.mass, h2 = h2_of(rho.grid());
  const auto& v = rho.values();
  if (mu_out) *mu_out = 0.0;
  if (target == 0.0) return RealField(rho.grid());
  const auto [mn, mx] = std::minmax_element(v.begin(), v.end());
  if (*mn >= 0.0 && *mx <= cap && std::abs(integrate(rho) - target) <= 1e-14 * target) return rho;

  double lo = *mn - cap, hi = *mx;  // mass(lo) = cap L^2 >= target, mass(hi) = 0
  if (clipped_mass(rho, lo, cap) < target * (1.0 - 1e-14))
    throw ValidationError("projection bracket failed: the qLL domain is empty");
  for (int it = 0; it < 200 && hi - lo > 4 * std::numeric_limits<double>::epsilon() * std::max({std::abs(lo), std::abs(hi), cap}); ++it) {
    const double mid = 0.5 * (lo + hi);
    (clipped_mass(rho, mid, cap) > target ? lo : hi) = mid;
  }
  // mass is affine in mu on the free cells; solve it there exactly
  double sum_free = 0.0, n_free = 0.0, n_cap = 0.0;
  for (double x : v) {
    if (x - hi >= cap) {
      n_cap += 1.0;
    } else if (x - lo > 0.0) {
      sum_free += x;
      n_free += 1.0;
    }
  }
  double mu = 0.5 * (lo + hi);
  if (n_free > 0.0) {
    const double exact = (sum_free + n_cap * cap - target / h2) / n_free;
    if (exact >= lo - (hi - lo) && exact <= hi + (hi - lo)) mu = exact;
  }
  RealField out(rho.grid());
  for (std::size_t k = 0; k < v.size(); ++k) out[k] = std::clamp(v[k] - mu, 0.0, cap);
  if (mu_out) *mu_out = mu;
  return out;
}

KktReport kkt_report(const RealField& rho, const RealField& grad, double cap) {
  require_same_grid(rho.grid(), grad.grid());
  double fmin = std::numeric_limits<double>::infinity(), fmax = -fmin;
  double zmin = fmin;   // multiplier must be <= grad on rho = 0
  double cmax = -fmin;  // and >= grad on rho = cap
  int nfree = 0;
  for (std::size_t k = 0; k < rho.values().size(); ++k) {
    const double r = rho[k], g = grad[k];
    if (r <= 0.0) {
      zmin = std::min(zmin, g);
    } else if (r >= cap) {
      cmax = std::max(cmax, g);
    } else {
      fmin = std::min(fmin, g);
      fmax = std::max(fmax, g);
      ++nfree;
    }
  }
  // minimize max(fmax - mu, mu - fmin, cmax - mu, mu - zmin) over mu
  const double upper = std::max(fmax, cmax), lower = std::min(fmin, zmin);
  KktReport out;
  out.free_cells = nfree;
  if (!std::isfinite(upper) && !std::isfinite(lower)) return out;
  if (!std::isfinite(upper)) {
    out.mu = lower;
  } else if (!std::isfinite(lower)) {
    out.mu = upper;
  } else {
    out.mu = 0.5 * (upper + lower);
  }
  out.residual = std::max(0.0, std::isfinite(upper) && std::isfinite(lower) ? 0.5 * (upper - lower) : 0.0);
  return out;
}

QllSolution minimize_qll(const QllProblem& p, const QllOptions& opts) {
  QllSolution sol;
  const Grid& g = p.grid();
  if (p.mass == 0.0) {
    sol.rho = RealField(g);
    sol.energy = 0.0;
    sol.converged = true;
    return sol;
  }
  RealField rho;
  if (opts.start) {
    rho = project_onto_domain(*opts.start, p);
  } else {
    rho = RealField(g);
    for (auto& v : rho.values()) v = p.mass / (g.L * g.L);
  }
  double E = qll_energy(rho, p);
  RealField grad = qll_gradient(rho, p);

  double wmax = 0.0;
  for (const auto& c : p.w_hat) wmax = std::max(wmax, std::abs(c));
  double s = wmax > 0.0 ? 1.0 / (2.0 * wmax) : 1.0;
  s = std::clamp(s, opts.min_step, opts.max_step);

  auto fixed_point = [&](double step) {
    RealField t(g);
    for (std::size_t k = 0; k < t.values().size(); ++k) t[k] = rho[k] - step * grad[k];
    const RealField pr = project_onto_domain(t, p);
    double r = 0.0;
    for (std::size_t k = 0; k < t.values().size(); ++k) r = std::max(r, std::abs(rho[k] - pr[k]));
    return r / step;
  };

  for (int it = 0;; ++it) {
    const KktReport kkt = kkt_report(rho, grad, p.cap);
    sol.residual = fixed_point(s);
    sol.kkt_residual = kkt.residual;
    sol.mu = kkt.mu;
    sol.iterations = it;
    sol.log.push_back({it, E, sol.residual, kkt.residual, s});
    if (sol.residual <= opts.tol && kkt.residual <= opts.tol) {
      sol.converged = true;
      break;
    }
    if (it >= opts.max_iterations) break;

    // Backtracking from the BB step. The energy change is evaluated as
    // <grad - mu, D> + <D, w*D> with mu the KKT multiplier; int D = 0, and subtracting mu
    // keeps the rounding of int D out of the slope near the optimum.
    const double gmean = kkt.mu;
    bool accepted = false;
    RealField next, wd;
    double dE = 0.0, step = s;
    for (int bt = 0; bt < 80 && step >= opts.min_step; ++bt, step *= opts.backtrack) {
      RealField t(g);
      for (std::size_t k = 0; k < t.values().size(); ++k) t[k] = rho[k] - step * grad[k];
      next = project_onto_domain(t, p);
      RealField diff(g), gc(g);
      for (std::size_t k = 0; k < t.values().size(); ++k) {
        diff[k] = next[k] - rho[k];
        gc[k] = grad[k] - gmean;
      }
      const double slope = dot(gc, diff);
      if (!(slope < 0.0)) break;  // no descent direction left at this precision
      wd = convolve_w(diff, p);
      dE = slope + dot(diff, wd);
      if (dE <= opts.armijo * slope) {
        accepted = true;
        break;
      }
    }
    if (!accepted) break;  // stationary to rounding; the KKT residual decides convergence
    RealField gn(g);
    double ss = 0.0, sy = 0.0;
    for (std::size_t k = 0; k < gn.values().size(); ++k) {
      gn[k] = grad[k] + 2.0 * wd[k];
      const double dr = next[k] - rho[k], dg = 2.0 * wd[k];
      ss += dr * dr;
      sy += dr * dg;
    }
    s = sy > 0.0 ? std::clamp(ss / sy, opts.min_step, opts.max_step) : opts.max_step;
    rho = std::move(next);
    grad = std::move(gn);
    E += dE;
  }
  if (!sol.converged) {
    const KktReport kkt = kkt_report(rho, grad, p.cap);
    sol.kkt_residual = kkt.residual;
    sol.converged = kkt.residual <= opts.tol && sol.log.back().iteration < opts.max_iterations;
  }
  sol.energy = qll_energy(rho, p);
  sol.rho = std::move(rho);
  return sol;
}

RealField bathtub_oracle(const RealField& V, double mass, double cap) {
  const Grid& g = V.grid();
  const double h2 = h2_of(g);
  if (mass > cap * g.L * g.L * (1.0 + 1e-14)) throw ConfigError("bathtub: mass exceeds cap * L^2");
  std::vector<std::size_t> order(V.values().size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return V[a] < V[b]; });
  RealField rho(g);
  double left = mass;
  for (std::size_t k : order) {
    if (left <= 0.0) break;
    const double put = std::min(cap, left / h2);
    rho[k] = put;
    left -= put * h2;
  }
  return rho;
}

FilledLevelConstants filled_level_constants(const TorusConfig& cfg, const RealField& V, const RealField& w) {
  require_same_grid(V.grid(), w.grid());
  const double q = cfg.q, r = cfg.r, L2 = cfg.L * cfg.L;
  if (q + r <= 0.0) throw ConfigError("q = r = 0 leaves the filled-level constants undefined");
  FilledLevelConstants c;
  c.E_qr = (q * q + 2 * q * r + r) / (q + r);
  c.E_V = q / ((q + r) * L2) * integrate(V);
  // iint w(x - y) dx dy = L^2 int w
  c.E_w = (q * q + 2 * q * r) / ((q + r) * (q + r) * L2 * L2) * L2 * integrate(w);
  return c;
}

double decomposition_check(const RealField& rho, const TorusConfig& cfg, const RealField& V, const RealField& w,
                           double* scale) {
  const PhaseSpaceDensity m = build_saturated_density(rho, cfg);
  const double lhs = semiclassical_energy(m, V, w, cfg);
  const FilledLevelConstants c = filled_level_constants(cfg, V, w);
  // E_qLL by its own path: the convolution through the problem's cached transform
  RealField Vc = V, wc = w;
  const QllProblem p = make_qll_problem(std::move(Vc), std::move(wc), cfg.partial_mass(), cfg.pauli_cap());
  const double rhs = cfg.hbar_b() * c.E_qr + c.E_V + c.E_w + qll_energy(rho, p);
  if (scale) *scale = std::max({std::abs(lhs), std::abs(rhs), cfg.hbar_b()});
  return std::abs(lhs - rhs);
}

}  // namespace landau
