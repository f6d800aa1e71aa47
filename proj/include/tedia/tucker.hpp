#pragma once

#include <array>
#include <vector>

#include "tedia/tensor.hpp"

namespace tedia {

template <class T>
struct TuckerResult {
  Tensor3<T> core;                 // n x n x n
  std::array<Mat<T>, 3> factors;   // orthonormal columns, dim_m x n
  double fit = 0.0;                // |t - core x1 Q1 x2 Q2 x3 Q3|_F / |t|_F
  std::vector<double> fit_history; // one entry per HOOI iteration
};

/// Best rank-(n,n,n) orthogonal Tucker approximation via higher-order
/// orthogonal iteration. Initialized by truncated HOSVD; iterates per-mode
/// dominant-subspace updates until the relative fit improvement drops below
/// tol or max_iter is reached. Deterministic: singular vectors carry a fixed
/// sign convention (largest-magnitude component made real positive).
template <class T>
TuckerResult<T> hooi_compress(const Tensor3<T>& t, int n, int max_iter = 50,
                              double tol = 1e-12);

}  // namespace tedia
