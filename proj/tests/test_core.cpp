#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "landau/config.hpp"
#include "landau/fft.hpp"
#include "landau/localizer.hpp"
#include "landau/potential.hpp"
#include "landau/torus.hpp"

using namespace landau;
constexpr double kPi = std::numbers::pi;

TEST_CASE("build_config derives b, l_b and r") {
  const TorusConfig c = build_config(1.0, 4, 1.0, 1, 6);
  CHECK(c.b == doctest::Approx(8.0 * kPi).epsilon(1e-15));
  CHECK(c.l_b == doctest::Approx(1.0 / std::sqrt(8.0 * kPi)).epsilon(1e-15));
  CHECK(c.r == 0.5);
  CHECK(build_config(1.0, 4, 1.0, 1, 4).r == 0.0);
  CHECK_THROWS_AS(build_config(1.0, 4, 1.0, 1, 8), ConfigError);
  CHECK_THROWS_AS(build_config(0.0, 4, 1.0, 1, 6), ConfigError);
  CHECK_THROWS_AS(build_config(1.0, 0, 1.0, 0, 1), ConfigError);
  CHECK_THROWS_AS(build_config(1.0, 4, -1.0, 1, 6), ConfigError);
  CHECK_THROWS_AS(build_config(1.0, 4, 1.0, -1, 6), ConfigError);
  CHECK_THROWS_AS(build_config(1.0, 4, 1.0, 0, 0), ConfigError);
}

TEST_CASE("flux quantization holds to the last bits") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> uL(0.3, 3.0), uh(0.05, 2.0);
  for (int t = 0; t < 200; ++t) {
    const int d = 1 + int(rng() % 40);
    const TorusConfig c = build_config(uL(rng), d, uh(rng), 1, d);
    const double flux = 2.0 * kPi * d * c.hbar;
    CHECK(std::abs(c.b * c.L * c.L - flux) <= 4.0 * std::numeric_limits<double>::epsilon() * flux);
    CHECK(std::abs(c.l_b * c.l_b - c.hbar / c.b) <= 4.0 * std::numeric_limits<double>::epsilon() * c.hbar / c.b);
    const double dd = c.L * c.L / (2.0 * kPi * c.l_b * c.l_b);
    CHECK(std::abs(dd - d) <= 1e-12 * d);
  }
}

TEST_CASE("torus_distance examples and metric axioms") {
  CHECK(torus_distance({0, 0}, {0, 0}, 1.0) == 0.0);
  CHECK(torus_distance({0, 0}, {0.9, 0}, 1.0) == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(torus_distance({0, 0}, {0.5, 0.5}, 1.0) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int t = 0; t < 100; ++t) {
    const Point a{u(rng), u(rng)}, b{u(rng), u(rng)}, c{u(rng), u(rng)};
    const double L = 1.7;
    const double ab = torus_distance(a, b, L), ba = torus_distance(b, a, L);
    CHECK(ab == doctest::Approx(ba).epsilon(1e-14));
    CHECK(ab <= torus_distance(a, c, L) + torus_distance(c, b, L) + 1e-12);
    CHECK(ab <= L / std::sqrt(2.0) + 1e-12);
    CHECK(ab >= 0.0);
  }
}

TEST_CASE("grid construction and integration") {
  CHECK_THROWS_AS(make_grid(100, 1.0), ConfigError);
  const Grid g = make_grid(64, 1.0);
  CHECK(g.spacing() * g.size == 1.0);
  RealField one(g);
  for (auto& v : one.values()) v = 1.0;
  CHECK(integrate(one) == doctest::Approx(1.0).epsilon(1e-15));
  RealField c(g);
  for (int i = 0; i < 64; ++i)
    for (int j = 0; j < 64; ++j) c(i, j) = std::cos(2 * kPi * g.coord(i));
  CHECK(std::abs(integrate(c)) < 1e-15);
  CHECK_THROWS_AS(RealField(g, std::vector<double>(g.count(), NAN)), ValidationError);
}

TEST_CASE("potential synthesis") {
  const Grid g = make_grid(32, 1.0);
  const RealField z = synthesize_potential(PotentialSpec::zero(), g);
  CHECK(sup_norm(z) == 0.0);
  const RealField v = synthesize_potential(PotentialSpec::cosine(1.0), g);
  double err = 0.0;
  for (int i = 0; i < 32; ++i)
    for (int j = 0; j < 32; ++j)
      err = std::max(err, std::abs(v(i, j) - std::cos(2 * kPi * g.coord(i)) - std::cos(2 * kPi * g.coord(j))));
  CHECK(err < 1e-14);
  CHECK(std::abs(integrate(v)) < 1e-14);

  // Forward transform of the synthesized gaussian: all coefficients non-negative
  // and equal to w0 exp(-sigma^2 |k|^2 / 2).
  const Grid g2 = make_grid(64, 1.0);
  const RealField w = synthesize_potential(PotentialSpec::gaussian_periodic(1.0, 0.1), g2);
  const auto wh = forward_transform(w);
  double worst = 0.0, minre = 1.0;
  for (int k1 = 0; k1 < 64; ++k1)
    for (int k2 = 0; k2 < 64; ++k2) {
      const int m1 = dft_frequency(k1, 64), m2 = dft_frequency(k2, 64);
      const cplx c = wh[std::size_t(k1) * 64 + k2] / 4096.0;
      double expect = 0.0;
      if (std::abs(m1) < 32 && std::abs(m2) < 32)
        expect = std::exp(-0.5 * 0.01 * 4 * kPi * kPi * (m1 * m1 + m2 * m2));
      worst = std::max(worst, std::abs(c - expect));
      minre = std::min(minre, c.real());
    }
  CHECK(worst < 1e-15);
  CHECK(minre > -1e-16);
  CHECK(is_even_on_grid(w));

  // Hermitian symmetry is enforced for explicit coefficient lists.
  auto bad = PotentialSpec::fourier({{1, 0, cplx(1, 0)}});
  CHECK_THROWS_AS(synthesize_potential(bad, g), ConfigError);
  auto ok = PotentialSpec::fourier({{1, 2, cplx(0.3, 0.1)}, {-1, -2, cplx(0.3, -0.1)}});
  CHECK_NOTHROW(synthesize_potential(ok, g));
  CHECK_THROWS_AS(validate_potential(ok, true), ConfigError);
  std::vector<FourierMode> sym;
  for (auto [a, b] : std::vector<std::pair<int, int>>{{1, 2}, {-1, 2}, {1, -2}, {-1, -2}, {2, 1}, {-2, 1}, {2, -1}, {-2, -1}})
    sym.push_back({a, b, cplx(0.25, 0)});
  CHECK_NOTHROW(validate_potential(PotentialSpec::fourier(sym), true));
  // Zero-mean Fourier potentials integrate to zero.
  const RealField f = synthesize_potential(PotentialSpec::fourier(sym), g);
  CHECK(std::abs(integrate(f)) < 1e-12);
}

TEST_CASE("convolution against the brute-force double sum") {
  const Grid g = make_grid(8, 1.3);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> nd;
  RealField f(g), h(g);
  for (auto& v : f.values()) v = nd(rng);
  for (auto& v : h.values()) v = nd(rng);
  const RealField c = convolve_periodic(f, h);
  const double a = g.spacing() * g.spacing();
  double worst = 0.0;
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) {
      double s = 0.0;
      for (int p = 0; p < 8; ++p)
        for (int q = 0; q < 8; ++q) s += f(p, q) * h((i - p + 8) % 8, (j - q + 8) % 8) * a;
      worst = std::max(worst, std::abs(s - c(i, j)));
    }
  CHECK(worst <= 1e-12);
  // commutative, constants, identity element
  const RealField c2 = convolve_periodic(h, f);
  double comm = 0.0;
  for (std::size_t k = 0; k < g.count(); ++k) comm = std::max(comm, std::abs(c[k] - c2[k]));
  CHECK(comm < 1e-13);
  RealField one(g), two(g), delta(g);
  for (auto& v : one.values()) v = 3.0;
  for (auto& v : two.values()) v = 0.5;
  delta(0, 0) = 1.0 / a;
  const RealField cc = convolve_periodic(one, two);
  for (auto v : cc.values()) CHECK(v == doctest::Approx(1.5 * 1.3 * 1.3).epsilon(1e-13));
  const RealField fd = convolve_periodic(f, delta);
  for (std::size_t k = 0; k < g.count(); ++k) CHECK(fd[k] == doctest::Approx(f[k]).epsilon(1e-12));
  CHECK_THROWS_AS(convolve_periodic(f, RealField(make_grid(16, 1.3))), ConfigError);
}

TEST_CASE("mollification error") {
  const Grid g = make_grid(128, 1.0);
  auto cst = PotentialSpec::fourier({{0, 0, cplx(2.0, 0.0)}});
  CHECK(mollification_error(cst, 2.0, g) < 1e-13);
  for (const auto& spec : {PotentialSpec::cosine(1.0), PotentialSpec::gaussian_periodic(1.0, 0.1)}) {
    double prev = INFINITY;
    for (double lam : {1.0, 2.0, 4.0, 8.0}) {
      const double e = mollification_error(spec, lam, g);
      CHECK(e >= 0.0);
      CHECK(e < prev);
      prev = e;
    }
  }
  // quadratic decay in 1/lambda, and the discrete identity once the support is sub-cell
  const double e4 = mollification_error(PotentialSpec::cosine(1.0), 4.0, g);
  const double e8 = mollification_error(PotentialSpec::cosine(1.0), 8.0, g);
  CHECK(e4 / e8 == doctest::Approx(4.0).epsilon(0.05));
  CHECK(mollification_error(PotentialSpec::cosine(1.0), 128.0, g) < 1e-6);
  const double e2w = mollification_error(PotentialSpec::gaussian_periodic(1.0, 0.1), 2.0, g, true);
  const double e4w = mollification_error(PotentialSpec::gaussian_periodic(1.0, 0.1), 4.0, g, true);
  CHECK(e4w < e2w);
}

TEST_CASE("localizer") {
  const Grid g = make_grid(256, 1.0);
  for (double lam : {1.0, 2.0, 4.0}) {
    const Localizer loc = build_localizer(lam, g);
    CHECK(norm_l2(loc.samples) == doctest::Approx(1.0).epsilon(1e-12));
    for (int i = 0; i < 256; ++i)
      for (int j = 0; j < 256; ++j)
        if (torus_distance({g.coord(i), g.coord(j)}, {0, 0}, 1.0) >= loc.radius) CHECK(loc.samples(i, j) == 0.0);
    // grid gradient norm vs radial quadrature
    double gn = 0.0;
    for (std::size_t k = 0; k < g.count(); ++k) gn += loc.grad_x[k] * loc.grad_x[k] + loc.grad_y[k] * loc.grad_y[k];
    gn *= g.spacing() * g.spacing();
    CHECK(gn == doctest::Approx(localizer_gradient_norm_sq(lam, 1.0)).epsilon(1e-6));
  }
  CHECK_THROWS_AS(build_localizer(0.5, g), ConfigError);
  CHECK_THROWS_AS(build_localizer(32.0, make_grid(64, 1.0)), ConfigError);
  // lambda = 1 is the base bump c exp(-1/(1-|2x|^2))
  const Localizer b = build_localizer(1.0, g);
  const double ratio = b.samples(10, 20) / b.samples(0, 0);
  const double s2 = 4.0 * (std::pow(g.coord(10), 2) + std::pow(g.coord(20), 2));
  CHECK(ratio == doctest::Approx(std::exp(-1.0 / (1.0 - s2)) / std::exp(-1.0)).epsilon(1e-14));
}
