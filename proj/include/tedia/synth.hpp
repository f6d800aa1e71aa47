#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tedia/blocks.hpp"
#include "tedia/sweep.hpp"
#include "tedia/tensor.hpp"

namespace tedia {

enum class ScenarioKind { CpDiagonal, BlockDiagonal };

struct ScenarioConfig {
  ScenarioKind kind = ScenarioKind::CpDiagonal;
  int n = 5;
  std::vector<int> block_sizes;        // block scenarios; must sum to n
  double c = 0.0;                      // column colinearity in [0,1)
  std::optional<double> snr_db;        // empty means noiseless
  int trials = 1;
  std::uint64_t seed = 0;
  bool refine = false;                 // run the ALS refinement stage
  TediaConfig tedia;
  double cluster_stop_ratio = 0.1;

  void validate() const;
};

/// Ground truth of a generated scenario: t = core x1 A~ x2 B~ x3 C~.
struct Scenario {
  Tensor3D t;
  Tensor3D core;
  TransformSet<double> transforms;  // mixing = ground-truth factors
  std::vector<int> block_sizes;     // singletons for CP scenarios
  double sigma2 = 0.0;              // set by add_noise wrappers
};

/// N x N matrix with unit-norm columns and constant pairwise column inner
/// product c: eps*ones + gamma*I with
/// eps = (sqrt(1-c+N c) - sqrt(1-c))/N, gamma = sqrt(1-(N-1) eps^2) - eps.
MatD colinear_matrix(int n, double c);

/// Diagonal core 1..N, demixing A = colinear_matrix(n,c), B = C = I.
Scenario make_cp_scenario(const ScenarioConfig& cfg);

/// Block-diagonal core whose blocks are (I_s + ones) rotated by fresh random
/// orthogonal factors; mixing matrices are Q * colinear_matrix(n,c) with
/// random orthogonal Q per mode.
Scenario make_block_scenario(const ScenarioConfig& cfg, std::uint64_t seed);

Scenario make_scenario(const ScenarioConfig& cfg, std::uint64_t seed);

struct NoisyTensor {
  Tensor3D t;
  double sigma2 = 0.0;
};

/// Adds iid Gaussian noise with sigma^2 = |t|_F^2 * 10^(-snr_db/10) / N^3
/// (signal-over-noise orientation). Empty snr leaves t untouched.
NoisyTensor add_noise(const Tensor3D& t, std::optional<double> snr_db, std::uint64_t seed);

/// Largest principal angle between the column spans of s1 and s2, in
/// [0, pi/2]; accurate near zero. Throws on rank-0 input.
double subspace_angle(const MatD& s1, const MatD& s2);

/// Haar-like random orthogonal matrix: QR of a Gaussian matrix with the
/// R-diagonal sign fix.
MatD random_orthogonal(int n, std::uint64_t seed);

std::uint64_t split_seed(std::uint64_t seed, std::uint64_t stream);

struct TrialMetrics {
  int trial = 0;
  bool failed = false;
  std::string error;
  bool converged = false;
  int sweeps = 0;
  double off_norm = 0.0;
  double wall_ms = 0.0;
  // squared angles indexed [mode][ground-truth block]
  std::vector<std::vector<double>> sq_angles;
};

struct CampaignResult {
  std::vector<TrialMetrics> trials;
  double mean_sq_angle = 0.0;
  double median_sq_angle = 0.0;
  double mean_sq_angle_db = 0.0;    // 10*log10(mean)
  double median_sq_angle_db = 0.0;
  double mean_wall_ms = 0.0;
  int failures = 0;
};

/// Runs `cfg.trials` independent trials (generate, add noise, diagonalize,
/// detect blocks, optionally refine), matches estimated blocks to ground
/// truth by exhaustive permutation over equal-size blocks, and aggregates
/// squared angles. Trials run concurrently (TEDIA_THREADS caps the pool);
/// per-trial seeds derive from cfg.seed so results do not depend on
/// scheduling. Throws if more than 20% of trials fail.
CampaignResult run_campaign(const ScenarioConfig& cfg);

/// Matches estimated blocks to ground-truth blocks (equal sizes, exhaustive
/// over <= 5 blocks per size class) minimizing the total squared subspace
/// angle over all modes; returns squared angles indexed [mode][truth block].
std::vector<std::vector<double>> match_block_angles(
    const TransformSet<double>& truth, const std::vector<int>& truth_sizes,
    const TransformSet<double>& est, const BlockStructure& est_blocks);

}  // namespace tedia
