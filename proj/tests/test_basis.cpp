#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "landau/hermite.hpp"
#include "landau/orbitals.hpp"
#include "landau/theta.hpp"

using namespace landau;
constexpr double kPi = std::numbers::pi;

namespace {

// Explicit-sum Hermite polynomial, independent of the recurrence.
double hermite_explicit(int n, double x) {
  double s = 0.0, fn = std::tgamma(n + 1.0);
  for (int m = 0; 2 * m <= n; ++m)
    s += (m % 2 ? -1.0 : 1.0) * fn / (std::tgamma(m + 1.0) * std::tgamma(n - 2 * m + 1.0)) * std::pow(2 * x, n - 2 * m);
  return s;
}

// Wide fixed-window direct sum, used as an oracle for the certified evaluator.
cplx psi_oracle(int n, int l, double x, double y, const TorusConfig& c) {
  const cplx cn = std::pow(cplx(0, -1) / std::sqrt(2.0), n) / (std::pow(kPi, 0.25) * std::sqrt(std::tgamma(n + 1.0)));
  cplx s{};
  for (int k = -40; k <= 40; ++k) {
    const double Y = y + k * c.L + l * c.L / c.d;
    const double u = Y / c.l_b;
    s += std::polar(hermite_explicit(n, u) * std::exp(-0.5 * u * u), 2 * kPi * (l + k * c.d) * x / c.L);
  }
  return cn / std::sqrt(c.L * c.l_b) * s;
}

}  // namespace

TEST_CASE("hermite recurrence") {
  CHECK(hermite(0, 0.7) == 1.0);
  CHECK(hermite(1, 0.7) == doctest::Approx(1.4));
  CHECK(hermite(2, 0.0) == -2.0);
  for (int n = 0; n <= 12; ++n)
    for (double x : {-3.1, -0.4, 0.0, 0.9, 2.5})
      CHECK(hermite(n, x) == doctest::Approx(hermite_explicit(n, x)).epsilon(1e-12).scale(1.0));
  // quadrature of h_1^2 and h_0 h_2 over the real line
  double s11 = 0.0, s02 = 0.0;
  const double h = 1e-3;
  for (double x = -20; x <= 20; x += h) {
    s11 += std::pow(hermite(1, x, HermiteForm::function), 2) * h;
    s02 += hermite(0, x, HermiteForm::function) * hermite(2, x, HermiteForm::function) * h;
  }
  CHECK(s11 == doctest::Approx(2.0 * std::sqrt(kPi)).epsilon(1e-12));
  CHECK(std::abs(s02) < 1e-12);
  CHECK(hermite_function_norm_sq(3) == doctest::Approx(std::sqrt(kPi) * 48.0));
  CHECK_THROWS_AS(hermite(-1, 0.0), ConfigError);
}

TEST_CASE("hermite envelope bounds the Hermite functions") {
  for (int n = 0; n <= 12; ++n)
    for (double x = 0.0; x < 30.0; x += 0.01)
      CHECK(std::abs(hermite(n, x)) <= std::pow(2 * x + n, n) * (1 + 1e-12) + (n == 0 ? 0.0 : 1e-300));
}

TEST_CASE("theta function") {
  const ThetaValue t = theta(0.0, cplx(0, 1));
  long double ref = 1.0L;
  for (int k = 1; k < 20; ++k) ref += 2.0L * std::exp(-(long double)kPi * k * k);
  CHECK(std::abs(t.value - cplx(double(ref), 0)) <= t.policy.tail_bound + 1e-15);
  CHECK(t.value.real() == doctest::Approx(1.086434811213).epsilon(1e-12));
  CHECK(t.policy.tail_bound <= 1e-15);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 50; ++i) {
    const cplx z(u(rng), 0.5 * u(rng));
    const cplx tau(0.3 * u(rng), 1.0 + 0.5 * (u(rng) + 1.0));
    const cplx a = theta(z, tau).value;
    CHECK(std::abs(theta(z + 1.0, tau).value - a) <= 1e-12 * std::abs(a));
    const cplx b = theta(z + tau, tau).value;
    const cplx expect = std::exp(cplx(0, -1) * kPi * tau - cplx(0, 2) * kPi * z) * a;
    CHECK(std::abs(b - expect) <= 1e-12 * std::abs(expect));
  }
  CHECK_THROWS_AS(theta(0.0, cplx(0.0, 0.0)), ConfigError);
  CHECK_THROWS_AS(theta(0.0, cplx(1.0, -1.0)), ConfigError);
}

TEST_CASE("certified evaluation matches a wide-window oracle") {
  for (int d : {2, 4, 8}) {
    const TorusConfig c = build_config(1.0, d, 1.0, 0, 1);
    std::mt19937_64 rng(d);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 40; ++t) {
      const int n = int(rng() % 4), l = int(rng() % d);
      const double x = u(rng), y = u(rng);
      TruncationPolicy pol;
      const cplx v = eigenfunction({n, l}, {x, y}, c, 1e-14, EvalMethod::direct, &pol);
      CHECK(pol.tail_bound <= 1e-14);
      CHECK(std::abs(v - psi_oracle(n, l, x, y, c)) <= 1e-12);
    }
  }
}

TEST_CASE("direct and resummed evaluations agree") {
  for (int d : {2, 4, 8}) {
    const TorusConfig c = build_config(1.0, d, 1.0, 0, 1);
    std::mt19937_64 rng(100 + d);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int n = 0; n <= 3; ++n) {
      double worst = 0.0, peak = 0.0;
      for (int t = 0; t < 250; ++t) {
        const int l = int(rng() % d);
        const Point z{u(rng), u(rng)};
        const cplx a = eigenfunction({n, l}, z, c, 1e-14, EvalMethod::direct);
        const cplx b = eigenfunction({n, l}, z, c, 1e-14, EvalMethod::poisson);
        worst = std::max(worst, std::abs(a - b));
        peak = std::max(peak, std::abs(a));
      }
      CHECK(worst <= 1e-10 * peak);
    }
  }
}

TEST_CASE("lowest level agrees with the theta form") {
  for (int d : {2, 4, 8}) {
    const TorusConfig c = build_config(1.0, d, 1.0, 0, 1);
    for (int l = 0; l < d; ++l)
      for (Point z : {Point{0.3, 0.7}, Point{0.0, 0.0}, Point{0.91, 0.12}}) {
        const cplx a = eigenfunction({0, l}, z, c);
        CHECK(std::abs(a - lll_theta_form(l, z, c)) <= 1e-12 * std::max(1.0, std::abs(a)));
      }
  }
}

TEST_CASE("boundary conditions and periodicity of the modulus") {
  const TorusConfig c = build_config(1.0, 4, 1.0, 0, 1);
  const double lb2 = c.l_b * c.l_b;
  double bc = 0.0, per = 0.0;
  for (int n = 0; n <= 3; ++n)
    for (int l = 0; l < 4; ++l)
      for (int j = 0; j < 64; ++j) {
        const double t = j / 64.0;
        bc = std::max(bc, std::abs(eigenfunction({n, l}, {1.0, t}, c) - eigenfunction({n, l}, {0.0, t}, c)));
        bc = std::max(bc, std::abs(eigenfunction({n, l}, {t, 1.0}, c) -
                                   std::polar(1.0, -t / lb2) * eigenfunction({n, l}, {t, 0.0}, c)));
        const Point z{t, std::fmod(0.37 + 0.61 * j, 1.0)};
        per = std::max(per, std::abs(std::abs(eigenfunction({n, l}, {z.x + 0.25, z.y}, c)) -
                                     std::abs(eigenfunction({n, l}, z, c))));
      }
  CHECK(bc <= 1e-10);
  CHECK(per <= 1e-10);
}

TEST_CASE("ladder operators") {
  const TorusConfig c = build_config(1.0, 3, 1.0, 0, 1);
  for (int n = 0; n <= 2; ++n)
    for (int l = 0; l < 3; ++l)
      for (Point z : {Point{0.1, 0.2}, Point{0.77, 0.5}}) {
        CHECK(std::abs(apply_ladder({n, l}, z, c, Ladder::raise) -
                       std::sqrt(n + 1.0) * eigenfunction({n + 1, l}, z, c)) <= 1e-12);
        const cplx lo = apply_ladder({n, l}, z, c, Ladder::lower);
        if (n == 0) CHECK(std::abs(lo) <= 1e-15);
        else CHECK(std::abs(lo - std::sqrt(double(n)) * eigenfunction({n - 1, l}, z, c)) <= 1e-12);
      }
  // closed-form action on Hermite coefficients
  LandauSeries s = orbital_series({1, 0});
  const LandauSeries up = apply_ladder(s, Ladder::raise);
  REQUIRE(up.alpha.size() == 3);
  CHECK(std::abs(up.alpha[2] - std::sqrt(2.0) * orbital_constant(2)) < 1e-15);
}

TEST_CASE("orbital set validation at d=4, n_max=3, grid 256") {
  const TorusConfig c = build_config(1.0, 4, 1.0, 0, 1);
  const OrbitalSet set = build_orbital_set(c, 3, make_grid(256, 1.0));
  CHECK(set.count() == 16);
  CHECK(set.validation.gram_deviation <= 1e-8);
  CHECK(set.validation.boundary_residual <= 1e-10);
  CHECK(set.validation.ladder_residual <= 1e-8);
  CHECK(set.validation.periodicity_residual <= 1e-10);
  CHECK(set.validation.kinetic_residual <= 1e-8);
  CHECK(set.policy.tail_bound <= 1e-14);
  for (int n = 0; n <= 3; ++n) {
    int count = 0;
    for (int a = 0; a < set.count(); ++a) count += set.at(a).n == n;
    CHECK(count == 4);
  }
  CHECK(std::abs(integrate(real_part([&] {
          ComplexField p(set.grid);
          for (std::size_t k = 0; k < p.values().size(); ++k) p[k] = std::norm(set[0][k]);
          return p;
        }())) - 1.0) <= 1e-8);
}

TEST_CASE("orbital set rejects bad input and failing diagnostics") {
  const TorusConfig c = build_config(1.0, 4, 1.0, 0, 1);
  CHECK_THROWS_AS(build_orbital_set(c, -1, make_grid(64, 1.0)), ConfigError);
  CHECK_THROWS_AS(build_orbital_set(c, 13, make_grid(64, 1.0)), ConfigError);
  CHECK_THROWS_AS(build_orbital_set(c, 0, make_grid(64, 2.0)), ConfigError);
  // A grid far too coarse for the Gaussian profiles fails the Gram check.
  CHECK_THROWS_AS(build_orbital_set(build_config(1.0, 64, 1.0, 0, 1), 2, make_grid(8, 1.0)), ValidationError);
}

TEST_CASE("magnetic translations") {
  const TorusConfig c = build_config(1.0, 4, 1.0, 0, 1);
  const Grid g = make_grid(128, 1.0);
  const OrbitalSet set = build_orbital_set(c, 1, g);
  // Successive translations by -iL/d generate the lowest level.
  ComplexField f = set[0];
  for (int l = 1; l < 4; ++l) {
    f = magnetic_translate(f, {0.0, -0.25}, c);
    double e = 0.0;
    for (std::size_t k = 0; k < g.count(); ++k) e = std::max(e, std::abs(f[k] - set[l][k]));
    CHECK(e <= 1e-8);
  }
  for (int a = 0; a < set.count(); ++a) {
    const ComplexField id = magnetic_translate(set[a], {0.0, 0.0}, c);
    const ComplexField t1 = magnetic_translate(magnetic_translate(set[a], {1.0, 0.0}, c), {0.0, 1.0}, c);
    const ComplexField t2 = magnetic_translate(magnetic_translate(set[a], {0.0, 1.0}, c), {1.0, 0.0}, c);
    double e0 = 0.0, e1 = 0.0, e2 = 0.0;
    for (std::size_t k = 0; k < g.count(); ++k) {
      e0 = std::max(e0, std::abs(id[k] - set[a][k]));
      e1 = std::max(e1, std::abs(t1[k] - t2[k]));
      e2 = std::max(e2, std::abs(t1[k] - set[a][k]));
    }
    CHECK(e0 == 0.0);
    CHECK(e1 <= 1e-12);
    CHECK(e2 <= 1e-10);
  }
  CHECK_THROWS_AS(magnetic_translate(set[0], {0.001, 0.0}, c), ConfigError);
  // Spectral path vs exact evaluation of the translated orbital.
  const Point z0{0.0123, -0.0371};
  const ComplexField tr = magnetic_translate(set[5], z0, c, true);
  double e = 0.0;
  for (int i = 0; i < 128; i += 9)
    for (int j = 0; j < 128; j += 7) {
      const double x = g.coord(i), y = g.coord(j);
      const cplx ex = std::polar(1.0, -z0.y * x / (c.l_b * c.l_b)) * eigenfunction(set.at(5), {x - z0.x, y - z0.y}, c);
      e = std::max(e, std::abs(tr(i, j) - ex));
    }
  CHECK(e <= 1e-8);
}
