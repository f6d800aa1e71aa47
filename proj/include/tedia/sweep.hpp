#pragma once

#include <optional>
#include <vector>

#include "tedia/rotation.hpp"
#include "tedia/tensor.hpp"

namespace tedia {

struct TediaConfig {
  double epsilon = 1e-6;   // stop when the largest |theta| in a sweep falls below
  int max_sweeps = 1000;
  double mu_growth = 2.0;
  bool extra_damped_steps = false;  // optional further damped steps per pair
  bool trace_steps = false;         // record off-norm after every accepted step

  void validate() const {
    if (!(epsilon > 0.0)) throw std::invalid_argument("TediaConfig: epsilon must be > 0");
    if (max_sweeps < 1) throw std::invalid_argument("TediaConfig: max_sweeps must be >= 1");
    if (!(mu_growth > 1.0)) throw std::invalid_argument("TediaConfig: mu_growth must be > 1");
  }
};

/// Demixing matrices A,B,C (det 1) and their inverses, the mixing matrices.
template <class T>
struct TransformSet {
  Mat<T> A, B, C;
  Mat<T> A_tilde, B_tilde, C_tilde;

  static TransformSet identity(int n) {
    TransformSet s;
    s.A = s.B = s.C = Mat<T>::Identity(n, n);
    s.A_tilde = s.B_tilde = s.C_tilde = Mat<T>::Identity(n, n);
    return s;
  }

  const Mat<T>& demixing(int mode) const {
    return mode == 1 ? A : (mode == 2 ? B : C);
  }
  const Mat<T>& mixing(int mode) const {
    return mode == 1 ? A_tilde : (mode == 2 ? B_tilde : C_tilde);
  }
};

template <class T>
struct DiagonalizationResult {
  Tensor3<T> core;
  TransformSet<T> transforms;
  int sweeps_run = 0;
  std::vector<double> theta_max_history;  // one entry per sweep
  std::vector<double> off_norm_history;   // initial value, then one per sweep
  std::vector<double> step_off_norms;     // per accepted step when trace_steps
  bool converged = false;
};

/// Cyclic elementary-rotation diagonalization. Sweeps unordered pairs i<j in
/// lexicographic order; per pair takes one Gauss-Newton step, falling back to
/// the damped step with doubling mu whenever the step would increase the
/// off-norm, break a real-domain regularity condition, or the system is
/// singular. Stops when the largest |theta| of a sweep is below epsilon.
template <class T>
DiagonalizationResult<T> tedia(const Tensor3<T>& t, const TediaConfig& cfg = {});

/// As above but starting from user-supplied demixing transforms.
template <class T>
DiagonalizationResult<T> tedia(const Tensor3<T>& t, const TediaConfig& cfg,
                               const TransformSet<T>& init);

struct BrcResult {
  bool satisfied = false;
  double worst_residual = 0.0;  // max |BRC sum| over the 3N(N-1) conditions
  double threshold = 0.0;
};

/// Evaluates all 3N(N-1) block-revealing-condition sums
/// sum_{(k,l)!=(i,i)} e_{ikl} e*_{jkl} (plus the two mode analogues); satisfied
/// iff the largest magnitude is below tol*|off(e)|_F^2, with the absolute
/// fallback tol*N^3 when off(e) is exactly zero.
template <class T>
BrcResult check_brc(const Tensor3<T>& e, double tol);

/// |t - core x1 A~ x2 B~ x3 C~|_F / |t|_F.
template <class T>
double residual_fit(const Tensor3<T>& t, const DiagonalizationResult<T>& r);

extern template struct TransformSet<double>;
extern template struct TransformSet<cplx>;

}  // namespace tedia
