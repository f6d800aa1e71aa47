#include <doctest.h>

#include "tedia/btd.hpp"
#include "tedia/synth.hpp"
#include "test_support.hpp"

using namespace tedia;
using test::max_abs_diff;

namespace {

Scenario small_block_scenario(double c, std::uint64_t seed) {
  ScenarioConfig cfg;
  cfg.kind = ScenarioKind::BlockDiagonal;
  cfg.n = 9;
  cfg.block_sizes = {3, 3, 3};
  cfg.c = c;
  return make_block_scenario(cfg, seed);
}

BtdModel ground_truth_model(const Scenario& sc) {
  DiagonalizationResult<double> r;
  r.core = sc.core;
  r.transforms = sc.transforms;
  BlockStructure b;
  b.perm.resize(sc.core.n1());
  std::iota(b.perm.begin(), b.perm.end(), 0);
  b.block_sizes = sc.block_sizes;
  return from_tedia(r, b);
}

}  // namespace

TEST_CASE("from_tedia on an exact block-diagonal solution reconstructs t") {
  const Scenario sc = small_block_scenario(0.3, 1);
  const BtdModel m = ground_truth_model(sc);
  CHECK(m.fit(sc.t) < 1e-10);
  CHECK(m.block_sizes() == sc.block_sizes);
}

TEST_CASE("singleton blocks give a cp-style model") {
  ScenarioConfig cfg;
  cfg.kind = ScenarioKind::CpDiagonal;
  cfg.n = 4;
  cfg.c = 0.4;
  const Scenario sc = make_cp_scenario(cfg);
  DiagonalizationResult<double> r;
  r.core = sc.core;
  r.transforms = sc.transforms;
  const BtdModel m = from_tedia(r, BlockStructure::singletons(4));
  CHECK(m.cores.size() == 4);
  for (const auto& core : m.cores) CHECK(core.size() == 1);
  CHECK(m.fit(sc.t) < 1e-10);
}

TEST_CASE("reconstruction residual equals the discarded off-block mass") {
  const Scenario sc = small_block_scenario(0.2, 2);
  // corrupt the core so the partition discards something
  DiagonalizationResult<double> r;
  r.core = sc.core;
  r.transforms = sc.transforms;
  std::mt19937_64 rng(3);
  std::normal_distribution<double> gauss(0.0, 0.05);
  Tensor3D noise(9, 9, 9);
  for (auto& x : noise.storage()) x = gauss(rng);
  r.core += noise;

  BlockStructure b;
  b.perm.resize(9);
  std::iota(b.perm.begin(), b.perm.end(), 0);
  b.block_sizes = {3, 3, 3};

  const BtdModel m = from_tedia(r, b);
  // t' = full reconstruction of the corrupted core through the transforms
  Tensor3D full = mode_product(r.core, r.transforms.A_tilde, 1);
  full = mode_product(full, r.transforms.B_tilde, 2);
  full = mode_product(full, r.transforms.C_tilde, 3);

  // the model drops exactly the off-block entries of the core, mapped back
  Tensor3D off_block = r.core;
  int off = 0;
  for (int s : b.block_sizes) {
    for (int i = 0; i < s; ++i)
      for (int j = 0; j < s; ++j)
        for (int k = 0; k < s; ++k) off_block(off + i, off + j, off + k) = 0.0;
    off += s;
  }
  Tensor3D dropped = mode_product(off_block, r.transforms.A_tilde, 1);
  dropped = mode_product(dropped, r.transforms.B_tilde, 2);
  dropped = mode_product(dropped, r.transforms.C_tilde, 3);

  const Tensor3D resid = full - m.reconstruct();
  CHECK(max_abs_diff(resid, dropped) < 1e-10);
}

TEST_CASE("als on an exact model is a fixed point") {
  const Scenario sc = small_block_scenario(0.25, 4);
  const BtdModel init = ground_truth_model(sc);
  const AlsResult r = als_refine(sc.t, init, 10, 1e-10);
  for (double fit : r.fit_history) CHECK(fit < 1e-10);
  CHECK(r.iterations <= 2);
}

TEST_CASE("als fit is monotone non-increasing") {
  const Scenario sc = small_block_scenario(0.2, 5);
  const NoisyTensor noisy = add_noise(sc.t, 25.0, 6);
  // start from the ground-truth of the clean tensor: slightly off
  const BtdModel init = ground_truth_model(sc);
  const AlsResult r = als_refine(noisy.t, init, 40, 0.0);
  for (std::size_t s = 1; s < r.fit_history.size(); ++s)
    CHECK(r.fit_history[s] <= r.fit_history[s - 1] + 1e-12);
}

TEST_CASE("als from the diagonalization pipeline improves noisy angles") {
  const Scenario sc = small_block_scenario(0.2, 7);
  const NoisyTensor noisy = add_noise(sc.t, 30.0, 8);

  TediaConfig tc;
  tc.epsilon = 1e-8;
  tc.max_sweeps = 3000;
  DiagonalizationResult<double> run = tedia::tedia(noisy.t, tc);
  const BlockStructure bs = cluster_blocks(similarity(run.core));
  REQUIRE(bs.block_sizes == sc.block_sizes);

  const auto before = match_block_angles(sc.transforms, sc.block_sizes, run.transforms, bs);

  const BtdModel init = from_tedia(run, bs);
  const AlsResult als = als_refine(noisy.t, init, 200, 1e-12);
  CHECK(als.fit_history.back() <= als.fit_history.front() + 1e-12);

  BlockStructure contiguous;
  contiguous.perm.resize(9);
  std::iota(contiguous.perm.begin(), contiguous.perm.end(), 0);
  contiguous.block_sizes = sc.block_sizes;

  TransformSet<double> est;
  est.A_tilde = als.model.stacked_factor(1);
  est.B_tilde = als.model.stacked_factor(2);
  est.C_tilde = als.model.stacked_factor(3);
  est.A = est.A_tilde.partialPivLu().inverse();
  est.B = est.B_tilde.partialPivLu().inverse();
  est.C = est.C_tilde.partialPivLu().inverse();
  const auto after = match_block_angles(sc.transforms, sc.block_sizes, est, contiguous);

  double sum_before = 0.0, sum_after = 0.0;
  for (int mode = 0; mode < 3; ++mode)
    for (std::size_t blk = 0; blk < before[mode].size(); ++blk) {
      sum_before += before[mode][blk];
      sum_after += after[mode][blk];
    }
  CHECK(sum_after <= sum_before * 1.5 + 1e-12);  // never much worse
  CHECK(sum_after < 3 * 9 * 0.1);                // and genuinely small
}

TEST_CASE("random initialization usually lands in poor local minima") {
  const Scenario sc = small_block_scenario(0.2, 9);
  std::mt19937_64 rng(10);
  std::normal_distribution<double> gauss(0.0, 1.0);

  int bad = 0;
  const int restarts = 6;
  for (int rep = 0; rep < restarts; ++rep) {
    BtdModel init;
    for (int blk = 0; blk < 3; ++blk) {
      Tensor3D core(3, 3, 3);
      for (auto& x : core.storage()) x = gauss(rng);
      init.cores.push_back(core);
      for (int mode = 0; mode < 3; ++mode)
        init.factors[mode].push_back(test::random_matrix<double>(9, 3, rng()));
    }
    const AlsResult r = als_refine(sc.t, init, 60, 1e-9);
    if (r.fit_history.back() > 1e-3) ++bad;
  }
  CHECK(bad >= 1);
}
