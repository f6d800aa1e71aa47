#include "tedia/tucker.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

namespace tedia {

namespace {

template <class T>
using RowMajorMap =
    Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

// Gram matrix of the mode-m unfolding, dim_m x dim_m.
template <class T>
Mat<T> unfolding_gram(const Tensor3<T>& t, int mode) {
  const int n1 = t.n1(), n2 = t.n2(), n3 = t.n3();
  if (mode == 1) {
    RowMajorMap<T> u(t.data(), n1, static_cast<Eigen::Index>(n2) * n3);
    return u * u.adjoint();
  }
  if (mode == 3) {
    RowMajorMap<T> u(t.data(), static_cast<Eigen::Index>(n1) * n2, n3);
    return (u.adjoint() * u).conjugate();  // gram of rows of u^T
  }
  Mat<T> g = Mat<T>::Zero(n2, n2);
  for (int i = 0; i < n1; ++i) {
    RowMajorMap<T> slice(t.data() + static_cast<std::size_t>(i) * n2 * n3, n2, n3);
    g += slice * slice.adjoint();
  }
  return g;
}

// Leading-n orthonormal eigenvectors of a Hermitian PSD matrix, eigenvalues
// descending, with the deterministic sign fix.
template <class T>
Mat<T> dominant_subspace(const Mat<T>& gram, int n) {
  Eigen::SelfAdjointEigenSolver<Mat<T>> es(gram);
  const int dim = static_cast<int>(gram.rows());
  Mat<T> q(dim, n);
  for (int c = 0; c < n; ++c) q.col(c) = es.eigenvectors().col(dim - 1 - c);
  for (int c = 0; c < n; ++c) {
    int imax = 0;
    double vmax = -1.0;
    for (int r = 0; r < dim; ++r) {
      const double a = std::abs(q(r, c));
      if (a > vmax) {
        vmax = a;
        imax = r;
      }
    }
    if (vmax > 0.0) {
      if constexpr (is_complex_v<T>) {
        q.col(c) *= scalar_conj(q(imax, c)) / vmax;
      } else {
        if (q(imax, c) < 0.0) q.col(c) = -q.col(c);
      }
    }
  }
  return q;
}

template <class T>
Tensor3<T> project_all(const Tensor3<T>& t, const std::array<Mat<T>, 3>& q) {
  Tensor3<T> core = mode_product(t, Mat<T>(q[0].adjoint()), 1);
  core = mode_product(core, Mat<T>(q[1].adjoint()), 2);
  core = mode_product(core, Mat<T>(q[2].adjoint()), 3);
  return core;
}

template <class T>
double reconstruction_fit(const Tensor3<T>& t, const Tensor3<T>& core,
                          const std::array<Mat<T>, 3>& q, double t_norm) {
  Tensor3<T> rec = mode_product(core, q[0], 1);
  rec = mode_product(rec, q[1], 2);
  rec = mode_product(rec, q[2], 3);
  return frobenius_norm(rec - t) / t_norm;
}

}  // namespace

template <class T>
TuckerResult<T> hooi_compress(const Tensor3<T>& t, int n, int max_iter, double tol) {
  if (n < 1) throw std::invalid_argument("hooi_compress: n must be positive");
  for (int mode = 1; mode <= 3; ++mode)
    if (n > t.dim(mode))
      throw std::invalid_argument("hooi_compress: n exceeds tensor mode " +
                                  std::to_string(mode) + " (" + std::to_string(n) + " > " +
                                  std::to_string(t.dim(mode)) + ")");
  if (max_iter < 1) throw std::invalid_argument("hooi_compress: max_iter must be >= 1");

  TuckerResult<T> res;
  const double t_norm = frobenius_norm(t);
  if (t_norm == 0.0) {
    // zero tensor: fit 0 by convention
    for (int m = 0; m < 3; ++m)
      res.factors[m] = Mat<T>::Identity(t.dim(m + 1), t.dim(m + 1)).leftCols(n);
    res.core = Tensor3<T>(n, n, n);
    res.fit = 0.0;
    return res;
  }

  // truncated HOSVD initialization
  for (int m = 0; m < 3; ++m)
    res.factors[m] = dominant_subspace(unfolding_gram(t, m + 1), n);

  double prev_fit = std::numeric_limits<double>::infinity();
  for (int it = 0; it < max_iter; ++it) {
    for (int m = 0; m < 3; ++m) {
      Tensor3<T> w = t;
      for (int m2 = 0; m2 < 3; ++m2) {
        if (m2 == m) continue;
        w = mode_product(w, Mat<T>(res.factors[m2].adjoint()), m2 + 1);
      }
      res.factors[m] = dominant_subspace(unfolding_gram(w, m + 1), n);
    }
    res.core = project_all(t, res.factors);
    const double fit = reconstruction_fit(t, res.core, res.factors, t_norm);
    res.fit_history.push_back(fit);
    if (prev_fit - fit < tol) {
      prev_fit = fit;
      break;
    }
    prev_fit = fit;
  }
  res.core = project_all(t, res.factors);
  res.fit = reconstruction_fit(t, res.core, res.factors, t_norm);
  return res;
}

template TuckerResult<double> hooi_compress(const Tensor3<double>&, int, int, double);
template TuckerResult<cplx> hooi_compress(const Tensor3<cplx>&, int, int, double);

}  // namespace tedia
