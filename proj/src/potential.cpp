#include "landau/potential.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "landau/fft.hpp"
#include "landau/localizer.hpp"

namespace landau {

PotentialSpec PotentialSpec::cosine(double v0) {
  PotentialSpec s;
  s.family = PotentialFamily::cosine;
  s.amplitude = v0;
  return s;
}

PotentialSpec PotentialSpec::gaussian_periodic(double w0, double sigma) {
  PotentialSpec s;
  s.family = PotentialFamily::gaussian_periodic;
  s.amplitude = w0;
  s.sigma = sigma;
  return s;
}

PotentialSpec PotentialSpec::fourier(std::vector<FourierMode> modes) {
  PotentialSpec s;
  s.family = PotentialFamily::fourier;
  s.modes = std::move(modes);
  return s;
}

std::string to_string(PotentialFamily f) {
  switch (f) {
    case PotentialFamily::zero: return "zero";
    case PotentialFamily::cosine: return "cosine";
    case PotentialFamily::fourier: return "fourier";
    case PotentialFamily::gaussian_periodic: return "gaussian_periodic";
  }
  return "zero";
}

PotentialFamily parse_family(const std::string& s) {
  if (s == "zero") return PotentialFamily::zero;
  if (s == "cosine") return PotentialFamily::cosine;
  if (s == "fourier") return PotentialFamily::fourier;
  if (s == "gaussian_periodic") return PotentialFamily::gaussian_periodic;
  throw ConfigError("unknown potential family '" + s + "'");
}

namespace {

using ModeMap = std::map<std::pair<int, int>, cplx>;

ModeMap merged(const std::vector<FourierMode>& modes) {
  ModeMap m;
  for (const auto& md : modes) m[{md.m1, md.m2}] += md.c;
  return m;
}

cplx lookup(const ModeMap& m, int a, int b) {
  auto it = m.find({a, b});
  return it == m.end() ? cplx{} : it->second;
}

}  // namespace

void validate_potential(const PotentialSpec& spec, bool interaction) {
  if (!std::isfinite(spec.amplitude)) throw ConfigError("potential amplitude must be finite");
  switch (spec.family) {
    case PotentialFamily::zero:
    case PotentialFamily::cosine:
      return;
    case PotentialFamily::gaussian_periodic:
      if (!(spec.sigma > 0.0)) throw ConfigError("gaussian_periodic width sigma must be positive");
      return;
    case PotentialFamily::fourier: break;
  }
  const ModeMap m = merged(spec.modes);
  double scale = 0.0;
  for (const auto& [k, c] : m) scale = std::max(scale, std::abs(c));
  const double tol = 1e-12 * std::max(scale, 1e-300);
  for (const auto& [k, c] : m) {
    if (!std::isfinite(std::abs(c))) throw ConfigError("non-finite Fourier coefficient");
    if (std::abs(lookup(m, -k.first, -k.second) - std::conj(c)) > tol)
      throw ConfigError("Fourier coefficients violate Hermitian symmetry at mode (" +
                        std::to_string(k.first) + "," + std::to_string(k.second) + ")");
    if (interaction) {
      const int a = k.first, b = k.second;
      const std::pair<int, int> images[] = {{-a, b}, {a, -b}, {b, a}, {-b, a}, {b, -a}, {-b, -a}};
      for (const auto& im : images)
        if (std::abs(lookup(m, im.first, im.second) - c) > tol)
          throw ConfigError("interaction coefficients are not invariant under the square point group");
    }
  }
}

std::vector<FourierMode> fourier_coefficients(const PotentialSpec& spec, const Grid& grid) {
  validate_potential(spec);
  const int half = grid.size / 2;
  std::vector<FourierMode> out;
  switch (spec.family) {
    case PotentialFamily::zero: break;
    case PotentialFamily::cosine: {
      const double c = 0.5 * spec.amplitude;
      out = {{1, 0, c}, {-1, 0, c}, {0, 1, c}, {0, -1, c}};
      break;
    }
    case PotentialFamily::gaussian_periodic: {
      const double kk = 2.0 * std::numbers::pi / grid.L;
      for (int m1 = -half + 1; m1 < half; ++m1)
        for (int m2 = -half + 1; m2 < half; ++m2) {
          const double k2 = kk * kk * double(m1 * m1 + m2 * m2);
          out.push_back({m1, m2, spec.amplitude * std::exp(-0.5 * spec.sigma * spec.sigma * k2)});
        }
      break;
    }
    case PotentialFamily::fourier: {
      for (const auto& [k, c] : merged(spec.modes)) {
        if (std::abs(k.first) >= half || std::abs(k.second) >= half)
          throw ConfigError("Fourier mode beyond the grid band limit");
        out.push_back({k.first, k.second, c});
      }
      break;
    }
  }
  return out;
}

RealField synthesize_potential(const PotentialSpec& spec, const Grid& grid) {
  const int n = grid.size;
  std::vector<cplx> a(grid.count());
  for (const auto& md : fourier_coefficients(spec, grid)) {
    const int k1 = (md.m1 % n + n) % n, k2 = (md.m2 % n + n) % n;
    a[std::size_t(k1) * n + k2] += md.c;
  }
  fft2(a, n, +1);
  RealField out(grid);
  for (std::size_t k = 0; k < a.size(); ++k) out[k] = a[k].real();
  return out;
}

double mollification_error(const PotentialSpec& spec, double lambda, const Grid& grid,
                           bool interaction) {
  validate_potential(spec, interaction);
  const RealField v = synthesize_potential(spec, grid);
  RealField g2 = sample_bump(lambda, grid);
  for (auto& x : g2.values()) x *= x;
  RealField s = convolve_periodic(g2, v);
  if (interaction) s = convolve_periodic(g2, s);
  for (std::size_t k = 0; k < s.values().size(); ++k) s[k] -= v[k];
  const double e = norm_l2(s);
  return interaction ? grid.L * e : e;
}

bool is_even_on_grid(const RealField& w, double tol) {
  const int n = w.size();
  const double scale = std::max(sup_norm(w), 1e-300);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (std::abs(w(i, j) - w((n - i) % n, (n - j) % n)) > tol * scale) return false;
  return true;
}

}  // namespace landau
