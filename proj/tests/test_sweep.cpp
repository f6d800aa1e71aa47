#include <doctest.h>

#include "tedia/sweep.hpp"
#include "tedia/synth.hpp"
#include "test_support.hpp"

using namespace tedia;
using test::counterexample_tensor;
using test::max_abs_diff;
using test::random_tensor;
using test::random_tensor_c;

namespace {

template <class T>
void check_transform_invariants(const Tensor3<T>& t, const DiagonalizationResult<T>& r,
                                double det_tol = 1e-8) {
  const auto& tr = r.transforms;
  CHECK(std::abs(tr.A.determinant() - T(1)) < det_tol);
  CHECK(std::abs(tr.B.determinant() - T(1)) < det_tol);
  CHECK(std::abs(tr.C.determinant() - T(1)) < det_tol);
  const int n = t.n1();
  CHECK((tr.A * tr.A_tilde - Mat<T>::Identity(n, n)).norm() < 1e-8);
  CHECK((tr.B * tr.B_tilde - Mat<T>::Identity(n, n)).norm() < 1e-8);
  CHECK((tr.C * tr.C_tilde - Mat<T>::Identity(n, n)).norm() < 1e-8);
  CHECK(residual_fit(t, r) < 1e-8);
}

}  // namespace

TEST_CASE("diagonal tensor converges immediately") {
  const Tensor3D t = diagonal_tensor<double>({1.0, 2.0, 3.0, 4.0});
  const DiagonalizationResult<double> r = tedia::tedia(t);
  CHECK(r.converged);
  CHECK(r.sweeps_run == 1);
  CHECK(r.theta_max_history.back() == 0.0);
  CHECK(max_abs_diff(r.core, t) == 0.0);
  CHECK((r.transforms.A - MatD::Identity(4, 4)).norm() == 0.0);
}

TEST_CASE("noiseless cp scenario is recovered to machine precision") {
  ScenarioConfig cfg;
  cfg.kind = ScenarioKind::CpDiagonal;
  cfg.n = 5;
  cfg.c = 0.0;
  const Scenario sc = make_cp_scenario(cfg);

  TediaConfig tc;
  tc.epsilon = 1e-10;
  const DiagonalizationResult<double> r = tedia::tedia(sc.t, tc);
  CHECK(r.converged);
  const double rel_off = std::sqrt(off_norm_sq(r.core)) / frobenius_norm(r.core);
  CHECK(rel_off < 1e-8);
  check_transform_invariants(sc.t, r);
}

TEST_CASE("mixed cp scenario (c=0.5) is recovered") {
  ScenarioConfig cfg;
  cfg.kind = ScenarioKind::CpDiagonal;
  cfg.n = 5;
  cfg.c = 0.5;
  const Scenario sc = make_cp_scenario(cfg);

  TediaConfig tc;
  tc.epsilon = 1e-10;
  tc.max_sweeps = 500;
  const DiagonalizationResult<double> r = tedia::tedia(sc.t, tc);
  CHECK(r.converged);
  const double rel_off = std::sqrt(off_norm_sq(r.core)) / frobenius_norm(r.core);
  CHECK(rel_off < 1e-8);
  check_transform_invariants(sc.t, r);

  // recovered mixing columns match ground truth up to permutation and scale
  BlockStructure singles = BlockStructure::singletons(5);
  const auto angles = match_block_angles(sc.transforms, sc.block_sizes, r.transforms, singles);
  for (const auto& per_mode : angles)
    for (double sq : per_mode) CHECK(std::sqrt(sq) < 1e-6);
}

TEST_CASE("counterexample tensor is a fixed point; perturbing it escapes") {
  const Tensor3D e01 = counterexample_tensor();
  const DiagonalizationResult<double> r = tedia::tedia(e01);
  CHECK(r.converged);
  CHECK(r.theta_max_history.back() == 0.0);
  CHECK(max_abs_diff(r.core, e01) == 0.0);

  Tensor3D perturbed = e01;
  std::mt19937_64 rng(42);
  std::normal_distribution<double> gauss(0.0, 1e-3);
  for (auto& x : perturbed.storage()) x += gauss(rng);

  TediaConfig tc;
  tc.epsilon = 1e-12;
  tc.max_sweeps = 5000;
  const DiagonalizationResult<double> rp = tedia::tedia(perturbed, tc);
  CHECK(rp.off_norm_history.back() < std::sqrt(off_norm_sq(e01)));
}

TEST_CASE("off norm never increases across accepted steps") {
  TediaConfig tc;
  tc.trace_steps = true;
  tc.max_sweeps = 60;
  for (std::uint64_t seed : {11, 12, 13}) {
    const Tensor3D t = random_tensor(5, 5, 5, seed);
    const DiagonalizationResult<double> r = tedia::tedia(t, tc);
    for (std::size_t s = 1; s < r.step_off_norms.size(); ++s)
      CHECK(r.step_off_norms[s] <= r.step_off_norms[s - 1] * (1.0 + 1e-12) + 1e-15);
    check_transform_invariants(t, r);
  }
}

TEST_CASE("complex tensors diagonalize with monotone descent") {
  const Tensor3C t = random_tensor_c(4, 4, 4, 77);
  TediaConfig tc;
  tc.trace_steps = true;
  tc.max_sweeps = 300;
  const DiagonalizationResult<cplx> r = tedia::tedia(t, tc);
  for (std::size_t s = 1; s < r.step_off_norms.size(); ++s)
    CHECK(r.step_off_norms[s] <= r.step_off_norms[s - 1] * (1.0 + 1e-12) + 1e-15);
  check_transform_invariants(t, r, 1e-7);
  // a generic complex cubic tensor of size 4 has rank <= 4, so the core
  // should become essentially diagonal
  CHECK(std::sqrt(off_norm_sq(r.core)) / frobenius_norm(r.core) < 1e-6);
}

TEST_CASE("check_brc") {
  const Tensor3D d = diagonal_tensor<double>({1.0, 2.0, 3.0});
  const BrcResult rd = check_brc(d, 1e-10);
  CHECK(rd.satisfied);
  CHECK(rd.worst_residual == 0.0);

  const BrcResult re = check_brc(counterexample_tensor(), 1e-10);
  CHECK(re.satisfied);

  const Tensor3D t = random_tensor(4, 4, 4, 99);
  const BrcResult rt = check_brc(t, 1e-10);
  CHECK_FALSE(rt.satisfied);

  // residual equals the brute-force summation oracle
  double brute = 0.0;
  const int n = 4;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      double s1 = 0.0, s2 = 0.0, s3 = 0.0;
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          if (k == i && l == i) continue;
          s1 += t(i, k, l) * t(j, k, l);
          s2 += t(k, i, l) * t(k, j, l);
          s3 += t(k, l, i) * t(k, l, j);
        }
      brute = std::max({brute, std::abs(s1), std::abs(s2), std::abs(s3)});
    }
  CHECK(rt.worst_residual == doctest::Approx(brute).epsilon(1e-12));
}

TEST_CASE("brc residual is small at convergence") {
  ScenarioConfig cfg;
  cfg.kind = ScenarioKind::CpDiagonal;
  cfg.n = 4;
  cfg.c = 0.3;
  const Scenario sc = make_cp_scenario(cfg);
  TediaConfig tc;
  tc.epsilon = 1e-6;
  const DiagonalizationResult<double> r = tedia::tedia(sc.t, tc);
  REQUIRE(r.converged);
  CHECK(check_brc(r.core, 1e-5 * tc.epsilon).satisfied);
}

TEST_CASE("residual_fit") {
  const Tensor3D t = random_tensor(4, 4, 4, 123);
  DiagonalizationResult<double> r;
  r.core = t;
  r.transforms = TransformSet<double>::identity(4);
  CHECK(residual_fit(t, r) == 0.0);

  const DiagonalizationResult<double> run = tedia::tedia(t);
  CHECK(residual_fit(t, run) < 1e-8);
}

TEST_CASE("per-sweep theta history shrinks on a diagonalizable input") {
  ScenarioConfig cfg;
  cfg.kind = ScenarioKind::CpDiagonal;
  cfg.n = 5;
  cfg.c = 0.4;
  const Scenario sc = make_cp_scenario(cfg);
  const DiagonalizationResult<double> r = tedia::tedia(sc.t);
  REQUIRE(r.converged);
  CHECK(r.theta_max_history.back() < 1e-6);
  CHECK(r.off_norm_history.front() >= r.off_norm_history.back());
}

TEST_CASE("tedia input validation") {
  CHECK_THROWS_AS(tedia::tedia(random_tensor(2, 3, 2, 1)), std::invalid_argument);
  Tensor3D bad(2, 2, 2);
  bad(0, 0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(tedia::tedia(bad), std::invalid_argument);
  TediaConfig tc;
  tc.epsilon = 0.0;
  CHECK_THROWS_AS(tedia::tedia(diagonal_tensor<double>({1.0, 2.0}), tc), std::invalid_argument);
}
