#pragma once

#include <array>

#include "tedia/tensor.hpp"

namespace tedia {

/// Parameters of one elementary rotation for the index pair (i,j):
/// theta[0..1] drive the mode-1 factor, theta[2..3] mode-2, theta[4..5] mode-3.
/// The mode-1 factor equals the identity except for the 2x2 block at
/// rows/cols (i,j):
///   [ sqrt(1+theta0*theta1)   theta0 ]
///   [ theta1                  sqrt(1+theta0*theta1) ]
/// so the determinant is exactly one. In the real domain each product
/// 1+theta_a*theta_b must be nonnegative (checked where used); in the
/// complex domain the principal square root is taken.
template <class T>
struct RotationParams {
  std::array<T, 6> theta{};
  int i = 0;
  int j = 1;

  bool is_zero() const {
    for (const auto& x : theta)
      if (x != T{}) return false;
    return true;
  }
};

/// Gradient of 0.5*|off(E')|_F^2 at theta=0 for the pair (i,j), together
/// with the slice inner products it is built from.
template <class T>
struct PairGradient {
  Vec<T> g;        // 6 entries
  T lambda_ij{};   // vec(e(j,:,:))^H vec(e(i,:,:))
  T mu_ij{};       // vec(e(:,j,:))^H vec(e(:,i,:))
  T nu_ij{};       // vec(e(:,:,j))^H vec(e(:,:,i))
};

/// Gauss-Newton 6x6 Hessian J^H J for the pair (i,j) plus the fiber
/// vectors u_ij = e(i,j,:), v_ij = e(i,:,j), w_ij = e(:,i,j).
template <class T>
struct PairHessian {
  Mat<T> H;  // 6x6 Hermitian positive semidefinite
  Vec<T> u_ij, v_ij, w_ij;
};

/// n x n determinant-1 elementary rotation: identity except the block at
/// rows/cols (i,j) equal to [[s, b],[a, s]] with s = sqrt(1 + a*b).
/// Real domain requires 1 + a*b >= 0 (throws RegularityError otherwise).
template <class T>
Mat<T> elementary_rotation(const std::array<T, 2>& theta_pair, int i, int j, int n);

/// The three factor matrices of an elementary rotation. factor 1/2/3 use
/// theta pairs (0,1), (2,3), (4,5); the odd-index parameter sits at matrix
/// position (j,i) and the even-index one at (i,j).
template <class T>
Mat<T> rotation_factor(const RotationParams<T>& p, int mode, int n);

template <class T>
PairGradient<T> pair_gradient(const Tensor3<T>& e, int i, int j);

template <class T>
PairHessian<T> pair_hessian(const Tensor3<T>& e, int i, int j);

/// theta = -(H + mu*I)^{-1} g. Throws SingularSystemError when the damped
/// matrix has a condition estimate above 1e14 (caller should increase mu).
template <class T>
RotationParams<T> solve_step(const PairGradient<T>& g, const PairHessian<T>& h,
                             double mu, int i, int j);

/// Returns false instead of throwing; used inside sweep loops.
template <class T>
bool try_solve_step(const PairGradient<T>& g, const PairHessian<T>& h, double mu,
                    int i, int j, RotationParams<T>& out);

/// True when all three real-domain regularity conditions 1+theta_a*theta_b >= 0
/// hold. Complex parameters are always regular (principal branch).
template <class T>
bool regularity_ok(const RotationParams<T>& p);

/// e x1 A_ij x2 B_ij x3 C_ij as sparse two-slice updates per mode; O(n^2).
template <class T>
Tensor3<T> apply_rotation(const Tensor3<T>& e, const RotationParams<T>& p);

/// In-place variant; only the six affected slices are touched.
template <class T>
void apply_rotation_inplace(Tensor3<T>& e, const RotationParams<T>& p);

/// Squared off-diagonal mass of the entries a pair-(i,j) rotation can change
/// (the union of the two affected slices in each mode, minus the spatial
/// diagonal ones among them). Used for incremental off-norm updates.
template <class T>
double off_union_sq(const Tensor3<T>& e, int i, int j);

}  // namespace tedia
