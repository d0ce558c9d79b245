#pragma once
#include <complex>
#include <cstddef>
#include <vector>

namespace landau {

using cplx = std::complex<double>;

namespace detail {
constexpr std::size_t kPairwiseLeaf = 16;
}

// Fixed-tree pairwise summation. The tree depends only on n, so results are
// bit-reproducible regardless of how the inputs were produced.
template <class T>
T pairwise_sum(const T* x, std::size_t n) {
  if (n <= detail::kPairwiseLeaf) {
    T s{};
    for (std::size_t i = 0; i < n; ++i) s += x[i];
    return s;
  }
  const std::size_t h = n / 2;
  return pairwise_sum(x, h) + pairwise_sum(x + h, n - h);
}

template <class T>
T pairwise_sum(const std::vector<T>& v) {
  return pairwise_sum(v.data(), v.size());
}

// Same tree, terms produced on the fly by f(i).
template <class F>
auto pairwise_sum_of(std::size_t begin, std::size_t end, const F& f) -> decltype(f(begin)) {
  using T = decltype(f(begin));
  const std::size_t n = end - begin;
  if (n <= detail::kPairwiseLeaf) {
    T s{};
    for (std::size_t i = begin; i < end; ++i) s += f(i);
    return s;
  }
  const std::size_t mid = begin + n / 2;
  return pairwise_sum_of(begin, mid, f) + pairwise_sum_of(mid, end, f);
}

template <class F>
auto pairwise_sum_of(std::size_t n, const F& f) {
  return pairwise_sum_of(std::size_t{0}, n, f);
}

}  // namespace landau
