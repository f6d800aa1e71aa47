#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "tedia/types.hpp"

namespace tedia {

/// Dense order-3 tensor with value semantics.
/// Storage layout: entry (i,j,k) lives at linear index (i*n2 + j)*n3 + k
/// (zero-based, last index fastest). This is the order used by the
/// TEDIA-TENSOR file format and by all vectorizations in the library.
template <class T>
class Tensor3 {
 public:
  Tensor3() = default;

  Tensor3(int n1, int n2, int n3) : n1_(n1), n2_(n2), n3_(n3) {
    if (n1 <= 0 || n2 <= 0 || n3 <= 0)
      throw std::invalid_argument("Tensor3: dimensions must be positive");
    data_.assign(static_cast<std::size_t>(n1) * n2 * n3, T{});
  }

  static Tensor3 cube(int n) { return Tensor3(n, n, n); }

  int dim(int mode) const {
    switch (mode) {
      case 1: return n1_;
      case 2: return n2_;
      case 3: return n3_;
      default: throw std::invalid_argument("Tensor3::dim: mode must be 1, 2 or 3");
    }
  }
  int n1() const { return n1_; }
  int n2() const { return n2_; }
  int n3() const { return n3_; }
  std::size_t size() const { return data_.size(); }
  bool is_cubic() const { return n1_ == n2_ && n2_ == n3_; }

  T& operator()(int i, int j, int k) { return data_[idx(i, j, k)]; }
  const T& operator()(int i, int j, int k) const { return data_[idx(i, j, k)]; }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  std::vector<T>& storage() { return data_; }
  const std::vector<T>& storage() const { return data_; }

  std::size_t idx(int i, int j, int k) const {
    return (static_cast<std::size_t>(i) * n2_ + j) * n3_ + k;
  }

  bool same_dims(const Tensor3& o) const {
    return n1_ == o.n1_ && n2_ == o.n2_ && n3_ == o.n3_;
  }

  Tensor3& operator+=(const Tensor3& o) {
    require_same(o);
    for (std::size_t s = 0; s < data_.size(); ++s) data_[s] += o.data_[s];
    return *this;
  }
  Tensor3& operator-=(const Tensor3& o) {
    require_same(o);
    for (std::size_t s = 0; s < data_.size(); ++s) data_[s] -= o.data_[s];
    return *this;
  }
  Tensor3& operator*=(T a) {
    for (auto& x : data_) x *= a;
    return *this;
  }
  friend Tensor3 operator+(Tensor3 a, const Tensor3& b) { return a += b; }
  friend Tensor3 operator-(Tensor3 a, const Tensor3& b) { return a -= b; }

  bool all_finite() const {
    for (const auto& x : data_)
      if (!std::isfinite(std::abs(x))) return false;
    return true;
  }

 private:
  void require_same(const Tensor3& o) const {
    if (!same_dims(o)) throw std::invalid_argument("Tensor3: dimension mismatch");
  }

  int n1_ = 0, n2_ = 0, n3_ = 0;
  std::vector<T> data_;
};

using Tensor3D = Tensor3<double>;
using Tensor3C = Tensor3<cplx>;

/// Contraction of m against the chosen mode: for mode 1,
/// out(i,j,k) = sum_a m(i,a) t(a,j,k); modes 2 and 3 analogous.
template <class T>
Tensor3<T> mode_product(const Tensor3<T>& t, const Mat<T>& m, int mode);

/// Copy of a cubic tensor with the spatial diagonal (i,i,i) zeroed.
template <class T>
Tensor3<T> off(const Tensor3<T>& t);

template <class T>
double frobenius_norm(const Tensor3<T>& t);

template <class T>
double frobenius_norm_sq(const Tensor3<T>& t);

/// Squared Frobenius norm of off(t) without materializing the copy.
template <class T>
double off_norm_sq(const Tensor3<T>& t);

/// Vectorized mode-`mode` slice of a cubic tensor at `index` (zero-based).
/// The two free indices are stacked in ascending-mode lexicographic order
/// with the later one fastest, identically for every call, so inner
/// products between slice vectors are well defined.
template <class T>
Vec<T> slice_vec(const Tensor3<T>& t, int mode, int index);

/// Conjugate-first inner product of two mode slices:
/// slice_inner(t,1,j,i) = vec(t(j,:,:))^H vec(t(i,:,:)).
template <class T>
T slice_inner(const Tensor3<T>& t, int mode, int a, int b);

/// Spatially diagonal cubic tensor with the given diagonal.
template <class T>
Tensor3<T> diagonal_tensor(const std::vector<T>& diag);

template <class T>
Mat<T> identity_matrix(int n) {
  return Mat<T>::Identity(n, n);
}

extern template class Tensor3<double>;
extern template class Tensor3<cplx>;

}  // namespace tedia
