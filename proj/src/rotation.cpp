#include "tedia/rotation.hpp"

#include <cmath>

#include <Eigen/SVD>

namespace tedia {

namespace {

template <class T>
T rotation_scale(const T& a, const T& b) {
  if constexpr (is_complex_v<T>) {
    return std::sqrt(T(1) + a * b);
  } else {
    const double d = 1.0 + a * b;
    if (d < 0.0)
      throw RegularityError("elementary rotation needs damping: 1 + theta_a*theta_b < 0");
    return std::sqrt(d);
  }
}

template <class T>
void check_pair(int i, int j, int n) {
  if (i == j) throw std::invalid_argument("rotation: indices must differ");
  if (i < 0 || j < 0 || i >= n || j >= n)
    throw std::invalid_argument("rotation: index out of range");
}

}  // namespace

template <class T>
Mat<T> elementary_rotation(const std::array<T, 2>& theta_pair, int i, int j, int n) {
  check_pair<T>(i, j, n);
  const T a = theta_pair[0], b = theta_pair[1];
  const T s = rotation_scale(a, b);
  Mat<T> m = Mat<T>::Identity(n, n);
  m(i, i) = s;
  m(j, j) = s;
  m(i, j) = b;
  m(j, i) = a;
  return m;
}

template <class T>
Mat<T> rotation_factor(const RotationParams<T>& p, int mode, int n) {
  const int o = 2 * (mode - 1);
  // theta[o] belongs at (i,j), theta[o+1] at (j,i)
  return elementary_rotation<T>({p.theta[o + 1], p.theta[o]}, p.i, p.j, n);
}

template <class T>
PairGradient<T> pair_gradient(const Tensor3<T>& e, int i, int j) {
  if (!e.is_cubic()) throw std::invalid_argument("pair_gradient: tensor must be cubic");
  check_pair<T>(i, j, e.n1());

  PairGradient<T> r;
  r.lambda_ij = slice_inner(e, 1, j, i);
  r.mu_ij = slice_inner(e, 2, j, i);
  r.nu_ij = slice_inner(e, 3, j, i);

  r.g.resize(6);
  r.g[0] = r.lambda_ij - scalar_conj(e(j, i, i)) * e(i, i, i);
  r.g[1] = scalar_conj(r.lambda_ij) - scalar_conj(e(i, j, j)) * e(j, j, j);
  r.g[2] = r.mu_ij - scalar_conj(e(i, j, i)) * e(i, i, i);
  r.g[3] = scalar_conj(r.mu_ij) - scalar_conj(e(j, i, j)) * e(j, j, j);
  r.g[4] = r.nu_ij - scalar_conj(e(i, i, j)) * e(i, i, i);
  r.g[5] = scalar_conj(r.nu_ij) - scalar_conj(e(j, j, i)) * e(j, j, j);
  return r;
}

template <class T>
PairHessian<T> pair_hessian(const Tensor3<T>& e, int i, int j) {
  if (!e.is_cubic()) throw std::invalid_argument("pair_hessian: tensor must be cubic");
  const int n = e.n1();
  check_pair<T>(i, j, n);

  const T lam_ii = slice_inner(e, 1, i, i);
  const T lam_jj = slice_inner(e, 1, j, j);
  const T mu_ii = slice_inner(e, 2, i, i);
  const T mu_jj = slice_inner(e, 2, j, j);
  const T nu_ii = slice_inner(e, 3, i, i);
  const T nu_jj = slice_inner(e, 3, j, j);

  // fibers: u_ab = e(a,b,:), v_ab = e(a,:,b), w_ab = e(:,a,b)
  auto fiber_u = [&](int a, int b) {
    Vec<T> f(n);
    for (int k = 0; k < n; ++k) f[k] = e(a, b, k);
    return f;
  };
  auto fiber_v = [&](int a, int b) {
    Vec<T> f(n);
    for (int k = 0; k < n; ++k) f[k] = e(a, k, b);
    return f;
  };
  auto fiber_w = [&](int a, int b) {
    Vec<T> f(n);
    for (int k = 0; k < n; ++k) f[k] = e(k, a, b);
    return f;
  };
  const Vec<T> u_ii = fiber_u(i, i), u_ij = fiber_u(i, j), u_ji = fiber_u(j, i),
               u_jj = fiber_u(j, j);
  const Vec<T> v_ii = fiber_v(i, i), v_ij = fiber_v(i, j), v_ji = fiber_v(j, i),
               v_jj = fiber_v(j, j);
  const Vec<T> w_ii = fiber_w(i, i), w_ij = fiber_w(i, j), w_ji = fiber_w(j, i),
               w_jj = fiber_w(j, j);

  PairHessian<T> r;
  r.u_ij = u_ij;
  r.v_ij = v_ij;
  r.w_ij = w_ij;

  Mat<T>& H = r.H;
  H = Mat<T>::Zero(6, 6);
  H(0, 0) = lam_jj - T(abs_sq(e(j, i, i)));
  H(1, 1) = lam_ii - T(abs_sq(e(i, j, j)));
  H(2, 2) = mu_jj - T(abs_sq(e(i, j, i)));
  H(3, 3) = mu_ii - T(abs_sq(e(j, i, j)));
  H(4, 4) = nu_jj - T(abs_sq(e(i, i, j)));
  H(5, 5) = nu_ii - T(abs_sq(e(j, j, i)));

  auto cdot = [&](const Vec<T>& a, const Vec<T>& b) {
    T s{};
    for (int k = 0; k < n; ++k) s += scalar_conj(a[k]) * b[k];
    return s;
  };

  H(0, 2) = cdot(u_ji, u_ij) - scalar_conj(e(j, i, i)) * e(i, j, i);
  H(0, 3) = cdot(u_jj, u_ii);
  H(0, 4) = cdot(v_ji, v_ij) - scalar_conj(e(j, i, i)) * e(i, i, j);
  H(0, 5) = cdot(v_jj, v_ii);
  H(1, 2) = cdot(u_ii, u_jj);
  H(1, 3) = cdot(u_ij, u_ji) - scalar_conj(e(i, j, j)) * e(j, i, j);
  H(1, 4) = cdot(v_ii, v_jj);
  H(1, 5) = cdot(v_ij, v_ji) - scalar_conj(e(i, j, j)) * e(j, j, i);
  H(2, 4) = cdot(w_ji, w_ij) - scalar_conj(e(i, j, i)) * e(i, i, j);
  H(2, 5) = cdot(w_jj, w_ii);
  H(3, 4) = cdot(w_ii, w_jj);
  H(3, 5) = cdot(w_ij, w_ji) - scalar_conj(e(j, i, j)) * e(j, j, i);
  // H(0,1), H(2,3), H(4,5) are structurally zero

  for (int r2 = 0; r2 < 6; ++r2)
    for (int c = 0; c < r2; ++c) H(r2, c) = scalar_conj(H(c, r2));
  return r;
}

template <class T>
bool try_solve_step(const PairGradient<T>& g, const PairHessian<T>& h, double mu,
                    int i, int j, RotationParams<T>& out) {
  Mat<T> A = h.H;
  for (int d = 0; d < 6; ++d) A(d, d) += T(mu);
  Eigen::JacobiSVD<Mat<T>> svd(A, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const double smax = svd.singularValues()(0);
  const double smin = svd.singularValues()(5);
  if (!(smax > 0.0) || smin <= smax * 1e-14) return false;
  Vec<T> theta = svd.solve(-g.g);
  out.i = i;
  out.j = j;
  for (int d = 0; d < 6; ++d) out.theta[d] = theta[d];
  return true;
}

template <class T>
RotationParams<T> solve_step(const PairGradient<T>& g, const PairHessian<T>& h,
                             double mu, int i, int j) {
  RotationParams<T> p;
  if (!try_solve_step(g, h, mu, i, j, p))
    throw SingularSystemError("solve_step: system is numerically singular, increase mu");
  return p;
}

template <class T>
bool regularity_ok(const RotationParams<T>& p) {
  if constexpr (is_complex_v<T>) {
    return true;
  } else {
    return 1.0 + p.theta[0] * p.theta[1] >= 0.0 &&
           1.0 + p.theta[2] * p.theta[3] >= 0.0 &&
           1.0 + p.theta[4] * p.theta[5] >= 0.0;
  }
}

template <class T>
void apply_rotation_inplace(Tensor3<T>& e, const RotationParams<T>& p) {
  if (!e.is_cubic()) throw std::invalid_argument("apply_rotation: tensor must be cubic");
  const int n = e.n1();
  const int i = p.i, j = p.j;
  check_pair<T>(i, j, n);

  // mode-m factor block is [[s, t_even],[t_odd, s]] at rows/cols (i,j)
  const T s1 = rotation_scale(p.theta[0], p.theta[1]);
  const T s2 = rotation_scale(p.theta[2], p.theta[3]);
  const T s3 = rotation_scale(p.theta[4], p.theta[5]);

  // mode 1: rows i and j of the mode-1 unfolding
  for (int b = 0; b < n; ++b)
    for (int c = 0; c < n; ++c) {
      const T xi = e(i, b, c), xj = e(j, b, c);
      e(i, b, c) = s1 * xi + p.theta[0] * xj;
      e(j, b, c) = p.theta[1] * xi + s1 * xj;
    }
  // mode 2
  for (int a = 0; a < n; ++a)
    for (int c = 0; c < n; ++c) {
      const T xi = e(a, i, c), xj = e(a, j, c);
      e(a, i, c) = s2 * xi + p.theta[2] * xj;
      e(a, j, c) = p.theta[3] * xi + s2 * xj;
    }
  // mode 3
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      const T xi = e(a, b, i), xj = e(a, b, j);
      e(a, b, i) = s3 * xi + p.theta[4] * xj;
      e(a, b, j) = p.theta[5] * xi + s3 * xj;
    }
}

template <class T>
Tensor3<T> apply_rotation(const Tensor3<T>& e, const RotationParams<T>& p) {
  Tensor3<T> out = e;
  apply_rotation_inplace(out, p);
  return out;
}

template <class T>
double off_union_sq(const Tensor3<T>& e, int i, int j) {
  const int n = e.n1();
  double s = 0.0;
  for (int b = 0; b < n; ++b)
    for (int c = 0; c < n; ++c) s += abs_sq(e(i, b, c)) + abs_sq(e(j, b, c));
  for (int a = 0; a < n; ++a) {
    if (a == i || a == j) continue;
    for (int c = 0; c < n; ++c) s += abs_sq(e(a, i, c)) + abs_sq(e(a, j, c));
  }
  for (int a = 0; a < n; ++a) {
    if (a == i || a == j) continue;
    for (int b = 0; b < n; ++b) {
      if (b == i || b == j) continue;
      s += abs_sq(e(a, b, i)) + abs_sq(e(a, b, j));
    }
  }
  s -= abs_sq(e(i, i, i)) + abs_sq(e(j, j, j));
  return s;
}

#define TEDIA_INSTANTIATE(T)                                                        \
  template Mat<T> elementary_rotation(const std::array<T, 2>&, int, int, int);      \
  template Mat<T> rotation_factor(const RotationParams<T>&, int, int);              \
  template PairGradient<T> pair_gradient(const Tensor3<T>&, int, int);              \
  template PairHessian<T> pair_hessian(const Tensor3<T>&, int, int);                \
  template RotationParams<T> solve_step(const PairGradient<T>&, const PairHessian<T>&, \
                                        double, int, int);                          \
  template bool try_solve_step(const PairGradient<T>&, const PairHessian<T>&, double, \
                               int, int, RotationParams<T>&);                       \
  template bool regularity_ok(const RotationParams<T>&);                            \
  template Tensor3<T> apply_rotation(const Tensor3<T>&, const RotationParams<T>&);  \
  template void apply_rotation_inplace(Tensor3<T>&, const RotationParams<T>&);      \
  template double off_union_sq(const Tensor3<T>&, int, int);

TEDIA_INSTANTIATE(double)
TEDIA_INSTANTIATE(cplx)
#undef TEDIA_INSTANTIATE

}  // namespace tedia
