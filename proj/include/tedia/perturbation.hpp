#pragma once

#include "tedia/sweep.hpp"
#include "tedia/tensor.hpp"

namespace tedia {

// First-order perturbation analysis of the diagonalization at a
// BRC-stationary point (real domain). The stationarity stack F has 3N^2
// rows indexed (i,j,m), flattened as ((i*N)+j)*3+m with i slowest and the
// mode tag m fastest:
//   i != j : the three BRC sums for the pair (i,j),
//   i == j : the diagonal conditions diag(dA A^-1) = 0 (and B,C analogues),
// and H1 = dF/dTheta, H2 = -dF/dvec(T), so that H1 dTheta = H2 vec(dT).
// Theta columns use the same flattening with (p,r,m') = entry (p,r) of the
// mode-m' demixing matrix; H2 columns follow the tensor storage layout.

inline int condition_index(int i, int j, int m, int n) { return (i * n + j) * 3 + m; }
inline int theta_index(int p, int r, int m, int n) { return (p * n + r) * 3 + m; }

/// The six auxiliary tensors of the analysis.
struct AuxTensors {
  Tensor3D Ta, Tb, Tc;  // t with two modes demixed
  Tensor3D Ea, Eb, Ec;  // core with two modes hit by transposed demixers
};

AuxTensors compute_aux(const Tensor3D& t, const TransformSet<double>& tr);

MatD assemble_h1(const Tensor3D& t, const TransformSet<double>& tr);
MatD assemble_h2(const Tensor3D& t, const TransformSet<double>& tr);

/// sigma^2 * H1^-1 H2 H2^T H1^-T, symmetrized. Throws SingularSystemError
/// when H1's condition estimate exceeds 1e12.
MatD covariance(const MatD& h1, const MatD& h2, double sigma2);

/// Predicted mean-square angular errors of the mixing-matrix columns,
/// one row per mode, one column per component.
MatD predict_msae(const MatD& cov, const TransformSet<double>& tr);

struct StabilityResult {
  bool stable = false;
  double h1_min_singular_ratio = 0.0;
};

/// Smallest-to-largest singular value ratio of H1; stable iff above 1e-10.
StabilityResult stability_check(const Tensor3D& t, const TransformSet<double>& tr);

struct PerturbationReport {
  MatD H1;      // 3N^2 x 3N^2
  MatD H2;      // 3N^2 x N^3
  MatD cov;     // 3N^2 x 3N^2, empty when unstable
  MatD msae;    // 3 x N, empty when unstable
  double sigma2 = 0.0;
  bool stable = false;
  double h1_min_singular_ratio = 0.0;
  bool stationary = true;        // false => analysis ran away from a BRC point
  double brc_residual = 0.0;     // relative residual used for the check
};

/// Full analysis pipeline. Attaches a warning flag instead of failing when
/// the input is not BRC-stationary (relative residual above 1e-4).
PerturbationReport analyze_perturbation(const Tensor3D& t, const TransformSet<double>& tr,
                                        double sigma2);

std::string perturbation_summary(const PerturbationReport& report);

}  // namespace tedia
