#pragma once
#include <cmath>
#include <complex>
#include <vector>

#include "landau/errors.hpp"
#include "landau/reduce.hpp"

namespace landau {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

// Uniform periodic grid on [0,L)^2; sample (i,j) sits at (i*h, j*h).
struct Grid {
  int size = 0;
  double L = 1.0;
  double spacing() const { return L / size; }
  double coord(int i) const { return i * spacing(); }
  std::size_t count() const { return std::size_t(size) * std::size_t(size); }
  bool operator==(const Grid& o) const { return size == o.size && L == o.L; }
  bool operator!=(const Grid& o) const { return !(*this == o); }
};

Grid make_grid(int size, double L);

// Samples on a Grid, row-major with the x index outermost.
template <class T>
class Field {
 public:
  Field() = default;
  explicit Field(const Grid& g) : grid_(g), v_(g.count(), T{}) {}
  Field(const Grid& g, std::vector<T> values) : grid_(g), v_(std::move(values)) {
    if (v_.size() != g.count()) throw ConfigError("field size does not match grid");
    for (const auto& x : v_)
      if (!std::isfinite(std::abs(x))) throw ValidationError("non-finite field sample");
  }

  const Grid& grid() const { return grid_; }
  int size() const { return grid_.size; }
  T& operator()(int i, int j) { return v_[std::size_t(i) * grid_.size + j]; }
  const T& operator()(int i, int j) const { return v_[std::size_t(i) * grid_.size + j]; }
  T& operator[](std::size_t k) { return v_[k]; }
  const T& operator[](std::size_t k) const { return v_[k]; }
  std::vector<T>& values() { return v_; }
  const std::vector<T>& values() const { return v_; }

 private:
  Grid grid_;
  std::vector<T> v_;
};

using RealField = Field<double>;
using ComplexField = Field<cplx>;

void require_same_grid(const Grid& a, const Grid& b);

// spacing^2 * (pairwise sum of samples)
double integrate(const RealField& f);
cplx integrate(const ComplexField& f);

// h^2 sum conj(a) b
cplx inner(const ComplexField& a, const ComplexField& b);
double norm_l2(const ComplexField& a);
double norm_l2(const RealField& a);
double sup_norm(const ComplexField& a);
double sup_norm(const RealField& a);

RealField real_part(const ComplexField& f);
ComplexField to_complex(const RealField& f);

}  // namespace landau
