#include "landau/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>

namespace landau {
namespace {

struct PlanPair {
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
};

std::mutex& plan_mutex() {
  static std::mutex m;
  return m;
}

// Plans are in-place and unaligned so they can be executed on any vector.
const PlanPair& plans_for(int n) {
  static std::map<int, PlanPair> cache;
  std::lock_guard<std::mutex> lock(plan_mutex());
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  const std::size_t count = std::size_t(n) * n;
  fftw_complex* buf = fftw_alloc_complex(count);
  PlanPair p;
  p.fwd = fftw_plan_dft_2d(n, n, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
  p.bwd = fftw_plan_dft_2d(n, n, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
  fftw_free(buf);
  return cache.emplace(n, p).first->second;
}

const PlanPair& plans_1d(int n) {
  static std::map<int, PlanPair> cache;
  std::lock_guard<std::mutex> lock(plan_mutex());
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  fftw_complex* buf = fftw_alloc_complex(std::size_t(n));
  PlanPair p;
  p.fwd = fftw_plan_dft_1d(n, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
  p.bwd = fftw_plan_dft_1d(n, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
  fftw_free(buf);
  return cache.emplace(n, p).first->second;
}

}  // namespace

void fft1(std::vector<cplx>& a, int sign) {
  const PlanPair& p = plans_1d(int(a.size()));
  auto* data = reinterpret_cast<fftw_complex*>(a.data());
  fftw_execute_dft(sign < 0 ? p.fwd : p.bwd, data, data);
}

void fft2(std::vector<cplx>& a, int n, int sign) {
  if (a.size() != std::size_t(n) * n) throw ConfigError("fft2: size mismatch");
  const PlanPair& p = plans_for(n);
  auto* data = reinterpret_cast<fftw_complex*>(a.data());
  fftw_execute_dft(sign < 0 ? p.fwd : p.bwd, data, data);
}

std::vector<cplx> forward_transform(const ComplexField& f) {
  std::vector<cplx> a = f.values();
  fft2(a, f.size(), -1);
  return a;
}

std::vector<cplx> forward_transform(const RealField& f) {
  std::vector<cplx> a(f.values().begin(), f.values().end());
  fft2(a, f.size(), -1);
  return a;
}

ComplexField convolve_periodic(const ComplexField& f, const ComplexField& g) {
  require_same_grid(f.grid(), g.grid());
  const int n = f.size();
  auto a = forward_transform(f);
  auto b = forward_transform(g);
  const double h = f.grid().spacing();
  const double scale = h * h / (double(n) * n);
  for (std::size_t k = 0; k < a.size(); ++k) a[k] *= b[k] * scale;
  fft2(a, n, +1);
  return ComplexField(f.grid(), std::move(a));
}

RealField convolve_periodic(const RealField& f, const RealField& g) {
  require_same_grid(f.grid(), g.grid());
  const int n = f.size();
  auto a = forward_transform(f);
  auto b = forward_transform(g);
  const double h = f.grid().spacing();
  const double scale = h * h / (double(n) * n);
  for (std::size_t k = 0; k < a.size(); ++k) a[k] *= b[k] * scale;
  fft2(a, n, +1);
  RealField out(f.grid());
  for (std::size_t k = 0; k < a.size(); ++k) out[k] = a[k].real();
  return out;
}

}  // namespace landau
