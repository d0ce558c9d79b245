#include "landau/grid.hpp"

#include <algorithm>

namespace landau {

Grid make_grid(int size, double L) {
  if (size < 2 || (size & (size - 1)) != 0)
    throw ConfigError("grid size must be a power of two >= 2, got " + std::to_string(size));
  if (!(L > 0.0)) throw ConfigError("grid period must be positive");
  return Grid{size, L};
}

void require_same_grid(const Grid& a, const Grid& b) {
  if (a != b) throw ConfigError("grid mismatch");
}

double integrate(const RealField& f) {
  const double h = f.grid().spacing();
  return h * h * pairwise_sum(f.values());
}

cplx integrate(const ComplexField& f) {
  const double h = f.grid().spacing();
  return h * h * pairwise_sum(f.values());
}

cplx inner(const ComplexField& a, const ComplexField& b) {
  require_same_grid(a.grid(), b.grid());
  const double h = a.grid().spacing();
  const auto& x = a.values();
  const auto& y = b.values();
  return h * h * pairwise_sum_of(x.size(), [&](std::size_t k) { return std::conj(x[k]) * y[k]; });
}

double norm_l2(const ComplexField& a) {
  const double h = a.grid().spacing();
  const auto& x = a.values();
  return std::sqrt(h * h * pairwise_sum_of(x.size(), [&](std::size_t k) { return std::norm(x[k]); }));
}

double norm_l2(const RealField& a) {
  const double h = a.grid().spacing();
  const auto& x = a.values();
  return std::sqrt(h * h * pairwise_sum_of(x.size(), [&](std::size_t k) { return x[k] * x[k]; }));
}

double sup_norm(const ComplexField& a) {
  double m = 0.0;
  for (const auto& v : a.values()) m = std::max(m, std::abs(v));
  return m;
}

double sup_norm(const RealField& a) {
  double m = 0.0;
  for (const auto& v : a.values()) m = std::max(m, std::abs(v));
  return m;
}

RealField real_part(const ComplexField& f) {
  RealField out(f.grid());
  for (std::size_t k = 0; k < f.values().size(); ++k) out[k] = f[k].real();
  return out;
}

ComplexField to_complex(const RealField& f) {
  ComplexField out(f.grid());
  for (std::size_t k = 0; k < f.values().size(); ++k) out[k] = f[k];
  return out;
}

}  // namespace landau
