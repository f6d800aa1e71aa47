#include <doctest.h>

#include "tedia/blocks.hpp"
#include "tedia/synth.hpp"
#include "test_support.hpp"

using namespace tedia;
using test::max_abs_diff;
using test::random_tensor;

namespace {

// block-diagonal tensor with the given blocks filled from a seeded generator
Tensor3D block_diag_tensor(const std::vector<int>& sizes, std::uint64_t seed) {
  int n = 0;
  for (int s : sizes) n += s;
  Tensor3D t(n, n, n);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  int off = 0;
  for (int s : sizes) {
    for (int i = 0; i < s; ++i)
      for (int j = 0; j < s; ++j)
        for (int k = 0; k < s; ++k) t(off + i, off + j, off + k) = gauss(rng);
    off += s;
  }
  return t;
}

std::vector<int> scramble(int n, std::uint64_t seed) {
  std::vector<int> p(n);
  std::iota(p.begin(), p.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(p.begin(), p.end(), rng);
  return p;
}

}  // namespace

TEST_CASE("similarity of a diagonal tensor") {
  const Tensor3D d = diagonal_tensor<double>({1.0, 2.0, 3.0});
  const SimilarityMatrices f = similarity(d);
  CHECK((f.F1 - MatD(VecD::Map(std::vector<double>{1, 2, 3}.data(), 3).asDiagonal())).norm() ==
        0.0);
  CHECK((f.F2 - f.F1).norm() == 0.0);
  CHECK((f.F3 - f.F1).norm() == 0.0);
  CHECK(f.F(0, 0) == 3.0);
  CHECK(f.F(1, 1) == 6.0);
  CHECK(f.F(2, 2) == 9.0);
}

TEST_CASE("similarity vanishes across blocks") {
  const Tensor3D t = block_diag_tensor({2, 1}, 1);
  const SimilarityMatrices f = similarity(t);
  CHECK(f.F(0, 2) == 0.0);
  CHECK(f.F(2, 0) == 0.0);
  CHECK(f.F(1, 2) == 0.0);
  CHECK(f.F(2, 1) == 0.0);
}

TEST_CASE("similarity matches brute force sums") {
  const Tensor3D t = random_tensor(4, 4, 4, 2);
  const SimilarityMatrices f = similarity(t);
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      double s1 = 0.0, s2 = 0.0, s3 = 0.0;
      for (int k = 0; k < 4; ++k) {
        s1 += std::abs(t(k, a, b));
        s2 += std::abs(t(a, k, b));
        s3 += std::abs(t(a, b, k));
      }
      CHECK(f.F1(a, b) == doctest::Approx(s1).epsilon(1e-12));
      CHECK(f.F2(a, b) == doctest::Approx(s2).epsilon(1e-12));
      CHECK(f.F3(a, b) == doctest::Approx(s3).epsilon(1e-12));
      CHECK(f.F(a, b) == doctest::Approx(s1 + s2 + s3).epsilon(1e-12));
    }
}

TEST_CASE("similarity is permutation equivariant") {
  const Tensor3D t = random_tensor(5, 5, 5, 3);
  const std::vector<int> p = scramble(5, 4);
  Tensor3D tp(5, 5, 5);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j)
      for (int k = 0; k < 5; ++k) tp(i, j, k) = t(p[i], p[j], p[k]);
  const SimilarityMatrices f = similarity(t);
  const SimilarityMatrices fp = similarity(tp);
  for (int a = 0; a < 5; ++a)
    for (int b = 0; b < 5; ++b)
      CHECK(fp.F(a, b) == doctest::Approx(f.F(p[a], p[b])).epsilon(1e-13));
}

TEST_CASE("rcm orders block-diagonal structure contiguously") {
  // two components {0,2} and {1}
  Tensor3D t(3, 3, 3);
  t(0, 0, 0) = 1.0;
  t(2, 2, 2) = 1.0;
  t(0, 2, 2) = 0.5;
  t(2, 0, 0) = 0.5;
  t(1, 1, 1) = 2.0;
  const SimilarityMatrices f = similarity(t);
  const BlockStructure b = rcm_blocks(f);
  REQUIRE(b.block_sizes.size() == 2);
  std::vector<std::vector<int>> groups;
  int pos = 0;
  for (int s : b.block_sizes) {
    std::vector<int> g(b.perm.begin() + pos, b.perm.begin() + pos + s);
    std::sort(g.begin(), g.end());
    groups.push_back(g);
    pos += s;
  }
  const bool ok = (groups[0] == std::vector<int>{0, 2} && groups[1] == std::vector<int>{1}) ||
                  (groups[0] == std::vector<int>{1} && groups[1] == std::vector<int>{0, 2});
  CHECK(ok);
}

TEST_CASE("rcm on scrambled block-diagonal cores reveals the blocks") {
  const std::vector<int> sizes{3, 2, 4};
  Tensor3D t = block_diag_tensor(sizes, 5);
  const std::vector<int> p = scramble(9, 6);
  Tensor3D tp(9, 9, 9);
  for (int i = 0; i < 9; ++i)
    for (int j = 0; j < 9; ++j)
      for (int k = 0; k < 9; ++k) tp(i, j, k) = t(p[i], p[j], p[k]);

  const BlockStructure b = rcm_blocks(similarity(tp));
  CHECK(block_offdiagonal_mass(tp, b) < 1e-12);
  std::vector<int> got = b.block_sizes;
  std::sort(got.begin(), got.end());
  CHECK(got == std::vector<int>{2, 3, 4});
}

TEST_CASE("rcm on a dense similarity gives a single block") {
  const Tensor3D t = random_tensor(4, 4, 4, 7);
  const BlockStructure b = rcm_blocks(similarity(t));
  CHECK(b.block_sizes == std::vector<int>{4});
}

TEST_CASE("clustering recovers noiseless blocks of sizes 5,5,5") {
  ScenarioConfig cfg;
  cfg.kind = ScenarioKind::BlockDiagonal;
  cfg.n = 15;
  cfg.block_sizes = {5, 5, 5};
  cfg.c = 0.2;
  const Scenario sc = make_block_scenario(cfg, 11);
  const BlockStructure b = cluster_blocks(similarity(sc.core));
  CHECK(b.block_sizes == std::vector<int>{5, 5, 5});
  CHECK(block_offdiagonal_mass(sc.core, b) < 1e-10);
}

TEST_CASE("clustering keeps singletons for a diagonal core") {
  const Tensor3D d = diagonal_tensor<double>({1.0, 2.0, 3.0, 4.0});
  const BlockStructure b = cluster_blocks(similarity(d));
  CHECK(b.block_sizes == std::vector<int>(4, 1));
}

TEST_CASE("clustering separates a noisy two-block core") {
  // off-block entries at 1% of in-block magnitude
  Tensor3D t = block_diag_tensor({3, 2}, 8);
  std::mt19937_64 rng(9);
  std::normal_distribution<double> gauss(0.0, 0.01);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j)
      for (int k = 0; k < 5; ++k) {
        const bool in_first = i < 3 && j < 3 && k < 3;
        const bool in_second = i >= 3 && j >= 3 && k >= 3;
        if (!in_first && !in_second) t(i, j, k) = gauss(rng);
      }
  const BlockStructure b = cluster_blocks(similarity(t), 0.1);
  std::vector<int> got = b.block_sizes;
  std::sort(got.begin(), got.end());
  CHECK(got == std::vector<int>{2, 3});
}

TEST_CASE("clustering is invariant under relabeling") {
  const Tensor3D t = block_diag_tensor({2, 3}, 10);
  const std::vector<int> p = scramble(5, 11);
  Tensor3D tp(5, 5, 5);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j)
      for (int k = 0; k < 5; ++k) tp(i, j, k) = t(p[i], p[j], p[k]);
  const BlockStructure b = cluster_blocks(similarity(tp));
  CHECK(block_offdiagonal_mass(tp, b) < 1e-12);
}

TEST_CASE("apply_block_permutation preserves reconstruction and determinants") {
  const Tensor3D t = random_tensor(5, 5, 5, 12);
  DiagonalizationResult<double> r = tedia::tedia(t);
  const double fit_before = residual_fit(t, r);

  BlockStructure b;
  b.perm = scramble(5, 13);
  b.block_sizes = {2, 3};

  apply_block_permutation(r.core, r.transforms, b);
  CHECK(residual_fit(t, r) < std::max(1e-10, 2.0 * fit_before + 1e-10));
  CHECK(std::abs(r.transforms.A.determinant() - 1.0) < 1e-8);
  CHECK(std::abs(r.transforms.B.determinant() - 1.0) < 1e-8);
  CHECK(std::abs(r.transforms.C.determinant() - 1.0) < 1e-8);

  SUBCASE("identity permutation is a no-op") {
    DiagonalizationResult<double> r2 = tedia::tedia(t);
    const Tensor3D before = r2.core;
    apply_block_permutation(r2.core, r2.transforms, BlockStructure::singletons(5));
    CHECK(max_abs_diff(r2.core, before) == 0.0);
  }
}

TEST_CASE("permutation sorts a scrambled block core") {
  const Tensor3D t = block_diag_tensor({2, 2}, 14);
  const std::vector<int> p = scramble(4, 15);
  Tensor3D tp(4, 4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      for (int k = 0; k < 4; ++k) tp(i, j, k) = t(p[i], p[j], p[k]);

  TransformSet<double> tr = TransformSet<double>::identity(4);
  const BlockStructure b = cluster_blocks(similarity(tp));
  Tensor3D core = tp;
  apply_block_permutation(core, tr, b);

  // after reordering, everything outside the contiguous blocks must vanish
  BlockStructure contiguous;
  contiguous.perm = {0, 1, 2, 3};
  contiguous.block_sizes = b.block_sizes;
  CHECK(block_offdiagonal_mass(core, contiguous) < 1e-12);
}

TEST_CASE("block_offdiagonal_mass special cases") {
  const Tensor3D t = random_tensor(4, 4, 4, 16);
  CHECK(block_offdiagonal_mass(t, BlockStructure::single_block(4)) == 0.0);
  const double singleton_mass = block_offdiagonal_mass(t, BlockStructure::singletons(4));
  CHECK(singleton_mass ==
        doctest::Approx(std::sqrt(off_norm_sq(t)) / frobenius_norm(t)).epsilon(1e-12));

  const Tensor3D bd = block_diag_tensor({2, 2}, 17);
  BlockStructure b;
  b.perm = {0, 1, 2, 3};
  b.block_sizes = {2, 2};
  CHECK(block_offdiagonal_mass(bd, b) == 0.0);
}

TEST_CASE("compound of two stationary blocks satisfies the stationarity condition") {
  // diagonal blocks are stationary; so is the counterexample block
  Tensor3D t(4, 4, 4);
  const Tensor3D e01 = test::counterexample_tensor();
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k) t(i, j, k) = e01(i, j, k);
  t(2, 2, 2) = 3.0;
  t(3, 3, 3) = -1.5;
  CHECK(check_brc(t, 1e-12).satisfied);
}

TEST_CASE("block structure text round trip") {
  BlockStructure b;
  b.perm = {2, 0, 1, 4, 3};
  b.block_sizes = {3, 2};
  const std::string text = block_structure_to_text(b);
  const BlockStructure back = block_structure_from_text(text);
  CHECK(back.perm == b.perm);
  CHECK(back.block_sizes == b.block_sizes);
  CHECK_THROWS_AS(block_structure_from_text("nonsense"), std::invalid_argument);
}
