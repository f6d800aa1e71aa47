#pragma once

#include <array>
#include <vector>

#include "tedia/blocks.hpp"
#include "tedia/sweep.hpp"
#include "tedia/tensor.hpp"

namespace tedia {

/// Block-term model: t ~ sum_b core_b x1 A_b x2 B_b x3 C_b with dense
/// s_b x s_b x s_b block cores and N x s_b factor column blocks per mode.
struct BtdModel {
  std::vector<Tensor3D> cores;
  std::array<std::vector<MatD>, 3> factors;  // [mode][block]

  int n() const { return factors[0].empty() ? 0 : static_cast<int>(factors[0][0].rows()); }
  std::vector<int> block_sizes() const {
    std::vector<int> s;
    for (const auto& c : cores) s.push_back(c.n1());
    return s;
  }
  Tensor3D reconstruct() const;
  double fit(const Tensor3D& t) const;  // |t - reconstruct|_F / |t|_F
  /// Mixing-style stacked factor matrix of one mode (blocks side by side).
  MatD stacked_factor(int mode) const;
};

/// Partition a (block-permuted) diagonalization outcome into a BTD model:
/// block cores are the diagonal sub-blocks of the permuted core, factors the
/// matching mixing-matrix column blocks.
BtdModel from_tedia(const DiagonalizationResult<double>& r, const BlockStructure& b);

struct AlsResult {
  BtdModel model;
  std::vector<double> fit_history;  // fit after every full iteration
  int iterations = 0;
  bool rank_deficient = false;  // some LS solve fell back to minimum norm
};

/// Alternating least squares on the partitioned model: per mode one stacked
/// least-squares solve for the full factor matrix, then a joint least-squares
/// update of all block cores; iterates until the relative fit improvement is
/// below tol. Fit is non-increasing.
AlsResult als_refine(const Tensor3D& t, const BtdModel& init, int max_iter = 100,
                     double tol = 1e-10);

}  // namespace tedia
