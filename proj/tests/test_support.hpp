#pragma once

#include <random>

#include "tedia/tensor.hpp"

namespace tedia::test {

inline Tensor3<double> random_tensor(int n1, int n2, int n3, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Tensor3<double> t(n1, n2, n3);
  for (auto& x : t.storage()) x = gauss(rng);
  return t;
}

inline Tensor3<cplx> random_tensor_c(int n1, int n2, int n3, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Tensor3<cplx> t(n1, n2, n3);
  for (auto& x : t.storage()) x = cplx(gauss(rng), gauss(rng));
  return t;
}

template <class T>
Mat<T> random_matrix(int r, int c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Mat<T> m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) {
      if constexpr (is_complex_v<T>)
        m(i, j) = cplx(gauss(rng), gauss(rng));
      else
        m(i, j) = gauss(rng);
    }
  return m;
}

// The tensor of the stationary-point counterexample: four unit entries at
// (0,0,0), (0,1,1), (1,0,1), (1,1,0); rank two, BRC-stationary, not diagonal.
inline Tensor3<double> counterexample_tensor() {
  Tensor3<double> t(2, 2, 2);
  t(0, 0, 0) = 1.0;
  t(0, 1, 1) = 1.0;
  t(1, 0, 1) = 1.0;
  t(1, 1, 0) = 1.0;
  return t;
}

template <class T>
double max_abs_diff(const Tensor3<T>& a, const Tensor3<T>& b) {
  double m = 0.0;
  for (std::size_t s = 0; s < a.size(); ++s)
    m = std::max(m, std::abs(a.storage()[s] - b.storage()[s]));
  return m;
}

}  // namespace tedia::test
