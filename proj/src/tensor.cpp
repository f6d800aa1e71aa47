#include "tedia/tensor.hpp"

#include <string>

namespace tedia {

namespace {

template <class T>
using RowMajorMap =
    Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
template <class T>
using ConstRowMajorMap =
    Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

}  // namespace

template <class T>
Tensor3<T> mode_product(const Tensor3<T>& t, const Mat<T>& m, int mode) {
  if (mode < 1 || mode > 3)
    throw std::invalid_argument("mode_product: mode must be 1, 2 or 3");
  if (m.cols() != t.dim(mode))
    throw std::invalid_argument("mode_product: matrix has " + std::to_string(m.cols()) +
                                " columns but tensor mode " + std::to_string(mode) +
                                " has size " + std::to_string(t.dim(mode)));
  const int n1 = t.n1(), n2 = t.n2(), n3 = t.n3();
  const int r = static_cast<int>(m.rows());

  if (mode == 1) {
    // mode-1 unfolding is (n1) x (n2*n3), rows contiguous in our layout
    Tensor3<T> out(r, n2, n3);
    ConstRowMajorMap<T> tm(t.data(), n1, static_cast<Eigen::Index>(n2) * n3);
    RowMajorMap<T> om(out.data(), r, static_cast<Eigen::Index>(n2) * n3);
    om.noalias() = m * tm;
    return out;
  }
  if (mode == 2) {
    Tensor3<T> out(n1, r, n3);
    for (int i = 0; i < n1; ++i) {
      ConstRowMajorMap<T> slice(t.data() + static_cast<std::size_t>(i) * n2 * n3, n2, n3);
      RowMajorMap<T> oslice(out.data() + static_cast<std::size_t>(i) * r * n3, r, n3);
      oslice.noalias() = m * slice;
    }
    return out;
  }
  // mode 3: unfolding (n1*n2) x n3, multiply by m^T on the right
  Tensor3<T> out(n1, n2, r);
  ConstRowMajorMap<T> tm(t.data(), static_cast<Eigen::Index>(n1) * n2, n3);
  RowMajorMap<T> om(out.data(), static_cast<Eigen::Index>(n1) * n2, r);
  om.noalias() = tm * m.transpose();
  return out;
}

template <class T>
Tensor3<T> off(const Tensor3<T>& t) {
  if (!t.is_cubic()) throw std::invalid_argument("off: tensor must be cubic");
  Tensor3<T> out = t;
  for (int i = 0; i < t.n1(); ++i) out(i, i, i) = T{};
  return out;
}

template <class T>
double frobenius_norm_sq(const Tensor3<T>& t) {
  double s = 0.0;
  for (const auto& x : t.storage()) s += abs_sq(x);
  return s;
}

template <class T>
double frobenius_norm(const Tensor3<T>& t) {
  return std::sqrt(frobenius_norm_sq(t));
}

template <class T>
double off_norm_sq(const Tensor3<T>& t) {
  if (!t.is_cubic()) throw std::invalid_argument("off_norm_sq: tensor must be cubic");
  double s = frobenius_norm_sq(t);
  for (int i = 0; i < t.n1(); ++i) s -= abs_sq(t(i, i, i));
  return s < 0.0 ? 0.0 : s;
}

template <class T>
Vec<T> slice_vec(const Tensor3<T>& t, int mode, int index) {
  if (!t.is_cubic()) throw std::invalid_argument("slice_vec: tensor must be cubic");
  const int n = t.n1();
  if (index < 0 || index >= n) throw std::invalid_argument("slice_vec: index out of range");
  Vec<T> v(static_cast<Eigen::Index>(n) * n);
  Eigen::Index p = 0;
  switch (mode) {
    case 1:
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) v[p++] = t(index, j, k);
      break;
    case 2:
      for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) v[p++] = t(i, index, k);
      break;
    case 3:
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) v[p++] = t(i, j, index);
      break;
    default:
      throw std::invalid_argument("slice_vec: mode must be 1, 2 or 3");
  }
  return v;
}

template <class T>
T slice_inner(const Tensor3<T>& t, int mode, int a, int b) {
  if (!t.is_cubic()) throw std::invalid_argument("slice_inner: tensor must be cubic");
  const int n = t.n1();
  if (a < 0 || a >= n || b < 0 || b >= n)
    throw std::invalid_argument("slice_inner: index out of range");
  T s{};
  switch (mode) {
    case 1:
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) s += scalar_conj(t(a, j, k)) * t(b, j, k);
      break;
    case 2:
      for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) s += scalar_conj(t(i, a, k)) * t(i, b, k);
      break;
    case 3:
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) s += scalar_conj(t(i, j, a)) * t(i, j, b);
      break;
    default:
      throw std::invalid_argument("slice_inner: mode must be 1, 2 or 3");
  }
  return s;
}

template <class T>
Tensor3<T> diagonal_tensor(const std::vector<T>& diag) {
  const int n = static_cast<int>(diag.size());
  Tensor3<T> t(n, n, n);
  for (int i = 0; i < n; ++i) t(i, i, i) = diag[i];
  return t;
}

template class Tensor3<double>;
template class Tensor3<cplx>;

template Tensor3<double> mode_product(const Tensor3<double>&, const Mat<double>&, int);
template Tensor3<cplx> mode_product(const Tensor3<cplx>&, const Mat<cplx>&, int);
template Tensor3<double> off(const Tensor3<double>&);
template Tensor3<cplx> off(const Tensor3<cplx>&);
template double frobenius_norm(const Tensor3<double>&);
template double frobenius_norm(const Tensor3<cplx>&);
template double frobenius_norm_sq(const Tensor3<double>&);
template double frobenius_norm_sq(const Tensor3<cplx>&);
template double off_norm_sq(const Tensor3<double>&);
template double off_norm_sq(const Tensor3<cplx>&);
template Vec<double> slice_vec(const Tensor3<double>&, int, int);
template Vec<cplx> slice_vec(const Tensor3<cplx>&, int, int);
template double slice_inner(const Tensor3<double>&, int, int, int);
template cplx slice_inner(const Tensor3<cplx>&, int, int, int);
template Tensor3<double> diagonal_tensor(const std::vector<double>&);
template Tensor3<cplx> diagonal_tensor(const std::vector<cplx>&);

}  // namespace tedia
