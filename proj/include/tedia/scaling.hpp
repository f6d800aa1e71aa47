#pragma once

#include <vector>

#include "tedia/tensor.hpp"

namespace tedia {

/// Per-slice off-diagonal energies of one mode:
/// eta[i] = sum_{(k,l) != (i,i)} |e_{ikl}|^2 for mode 1, mode 2 and 3 analogous
/// (each excludes just the spatial-diagonal entry of its slice).
struct SliceEnergies {
  int mode = 1;
  std::vector<double> eta;
};

template <class T>
SliceEnergies slice_energies(const Tensor3<T>& e, int mode);

enum class ScalingKind { Scaled, InfimumZero, AllZero };

/// Optimal determinant-1 diagonal scaling for one mode. When every eta is
/// positive, d_i = ((prod eta)^(1/N) / eta_i)^(1/2), computed in log space;
/// when some are zero (below 1e-14 * max) and others positive the off-norm
/// infimum is zero and no minimizer exists; when all are zero d = 1.
struct ScalingResult {
  ScalingKind kind = ScalingKind::Scaled;
  std::vector<double> d;
};

ScalingResult optimal_scaling(const SliceEnergies& energies);

/// Max over modes and i of |eta_i - eta_1| / (max eta + 1e-300); zero iff the
/// 3N-3 scaling-optimality conditions hold.
template <class T>
double scaling_optimality_residual(const Tensor3<T>& e);

}  // namespace tedia
