#include <doctest.h>

#include "tedia/tensor.hpp"
#include "test_support.hpp"

using namespace tedia;
using test::counterexample_tensor;
using test::max_abs_diff;
using test::random_tensor;

namespace {

// brute-force triple sum: out(i,j,k) = sum_abc t(a,b,c) A(i,a) B(j,b) C(k,c)
Tensor3D triple_sum(const Tensor3D& t, const MatD& a, const MatD& b, const MatD& c) {
  const int n = t.n1();
  Tensor3D out(static_cast<int>(a.rows()), static_cast<int>(b.rows()),
               static_cast<int>(c.rows()));
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < b.rows(); ++j)
      for (int k = 0; k < c.rows(); ++k) {
        double s = 0.0;
        for (int al = 0; al < n; ++al)
          for (int be = 0; be < n; ++be)
            for (int ga = 0; ga < n; ++ga)
              s += t(al, be, ga) * a(i, al) * b(j, be) * c(k, ga);
        out(i, j, k) = s;
      }
  return out;
}

}  // namespace

TEST_CASE("mode_product identity leaves tensor unchanged") {
  const Tensor3D t = random_tensor(4, 3, 5, 1);
  for (int mode = 1; mode <= 3; ++mode) {
    const Tensor3D r = mode_product(t, MatD(MatD::Identity(t.dim(mode), t.dim(mode))), mode);
    CHECK(max_abs_diff(t, r) <= 1e-15 * frobenius_norm(t));
  }
}

TEST_CASE("mode_product diagonal scaling") {
  Tensor3D ones(2, 2, 2);
  for (auto& x : ones.storage()) x = 1.0;
  const MatD twice = 2.0 * MatD::Identity(2, 2);
  const Tensor3D r = mode_product(ones, twice, 1);
  for (const auto& x : r.storage()) CHECK(x == doctest::Approx(2.0));
}

TEST_CASE("mode products match the brute-force triple sum") {
  const Tensor3D t = random_tensor(3, 3, 3, 2);
  const MatD a = test::random_matrix<double>(3, 3, 3);
  const MatD b = test::random_matrix<double>(3, 3, 4);
  const MatD c = test::random_matrix<double>(3, 3, 5);
  const Tensor3D fast = mode_product(mode_product(mode_product(t, a, 1), b, 2), c, 3);
  const Tensor3D slow = triple_sum(t, a, b, c);
  CHECK(max_abs_diff(fast, slow) < 1e-12);
}

TEST_CASE("mode products commute across modes") {
  const Tensor3D t = random_tensor(4, 4, 4, 6);
  const MatD a = test::random_matrix<double>(4, 4, 7);
  const MatD b = test::random_matrix<double>(4, 4, 8);
  const Tensor3D ab = mode_product(mode_product(t, a, 1), b, 2);
  const Tensor3D ba = mode_product(mode_product(t, b, 2), a, 1);
  CHECK(max_abs_diff(ab, ba) < 1e-12);
}

TEST_CASE("mode_product rejects dimension mismatch") {
  const Tensor3D t = random_tensor(3, 4, 5, 9);
  CHECK_THROWS_AS(mode_product(t, MatD(MatD::Identity(4, 4)), 1), std::invalid_argument);
  CHECK_THROWS_AS(mode_product(t, MatD(MatD::Identity(3, 3)), 2), std::invalid_argument);
}

TEST_CASE("off zeroes exactly the spatial diagonal") {
  const Tensor3D d = diagonal_tensor<double>({1.0, 2.0, 3.0});
  const Tensor3D z = off(d);
  CHECK(frobenius_norm(z) == 0.0);

  Tensor3D ones(2, 2, 2);
  for (auto& x : ones.storage()) x = 1.0;
  CHECK(off_norm_sq(ones) == doctest::Approx(6.0));
  CHECK(frobenius_norm_sq(off(ones)) == doctest::Approx(6.0));
}

TEST_CASE("off on the counterexample tensor") {
  const Tensor3D e01 = counterexample_tensor();
  const Tensor3D z = off(e01);
  CHECK(z(0, 0, 0) == 0.0);
  CHECK(z(0, 1, 1) == 1.0);
  CHECK(z(1, 0, 1) == 1.0);
  CHECK(z(1, 1, 0) == 1.0);
  CHECK(frobenius_norm_sq(z) == doctest::Approx(3.0));
  CHECK(frobenius_norm(e01) == doctest::Approx(2.0));
}

TEST_CASE("off rejects non-cubic input") {
  const Tensor3D t = random_tensor(2, 3, 2, 10);
  CHECK_THROWS_AS(off(t), std::invalid_argument);
}

TEST_CASE("frobenius norm matches elementwise oracle") {
  const Tensor3D t = random_tensor(4, 5, 6, 11);
  double s = 0.0;
  for (const auto& x : t.storage()) s += x * x;
  CHECK(frobenius_norm(t) == doctest::Approx(std::sqrt(s)).epsilon(1e-14));
  CHECK(frobenius_norm(Tensor3D(2, 2, 2)) == 0.0);
}

TEST_CASE("norm splits into off plus diagonal part") {
  const Tensor3D t = random_tensor(5, 5, 5, 12);
  double diag_sq = 0.0;
  for (int i = 0; i < 5; ++i) diag_sq += t(i, i, i) * t(i, i, i);
  CHECK(frobenius_norm_sq(t) ==
        doctest::Approx(off_norm_sq(t) + diag_sq).epsilon(1e-13));
}

TEST_CASE("slice_vec layout and inner products") {
  const Tensor3D d2 = diagonal_tensor<double>({1.0, 2.0});
  const VecD s = slice_vec(d2, 1, 0);
  CHECK(s.size() == 4);
  CHECK(s[0] == 1.0);
  CHECK(s[1] == 0.0);
  CHECK(s[2] == 0.0);
  CHECK(s[3] == 0.0);

  const Tensor3D e01 = counterexample_tensor();
  const VecD s1 = slice_vec(e01, 1, 0);
  CHECK(s1[0] == 1.0);
  CHECK(s1[1] == 0.0);
  CHECK(s1[2] == 0.0);
  CHECK(s1[3] == 1.0);

  const Tensor3D t = random_tensor(4, 4, 4, 13);
  for (int mode = 1; mode <= 3; ++mode)
    for (int i = 0; i < 4; ++i) {
      const VecD v = slice_vec(t, mode, i);
      CHECK(slice_inner(t, mode, i, i) == doctest::Approx(v.squaredNorm()).epsilon(1e-13));
    }
  CHECK_THROWS_AS(slice_vec(t, 1, 4), std::invalid_argument);
}

TEST_CASE("complex slice inner products conjugate the first argument") {
  const Tensor3C t = test::random_tensor_c(3, 3, 3, 14);
  const Vec<cplx> vi = slice_vec(t, 1, 0);
  const Vec<cplx> vj = slice_vec(t, 1, 1);
  cplx expected = 0.0;
  for (int s = 0; s < vi.size(); ++s) expected += std::conj(vj[s]) * vi[s];
  const cplx got = slice_inner(t, 1, 1, 0);
  CHECK(std::abs(got - expected) < 1e-13);
}
