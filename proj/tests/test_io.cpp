#include <doctest.h>

#include <sstream>

#include "tedia/io.hpp"
#include "test_support.hpp"

using namespace tedia;
using test::max_abs_diff;

TEST_CASE("tensor files round trip exactly at 17 significant digits") {
  const Tensor3D t = test::random_tensor(3, 4, 2, 1);
  std::stringstream ss;
  write_tensor(ss, t);
  const Tensor3D back = expect_tensor<double>(read_tensor(ss), "roundtrip");
  CHECK(back.n1() == 3);
  CHECK(back.n2() == 4);
  CHECK(back.n3() == 2);
  CHECK(max_abs_diff(t, back) == 0.0);
}

TEST_CASE("complex tensor files round trip") {
  const Tensor3C t = test::random_tensor_c(2, 3, 2, 2);
  std::stringstream ss;
  write_tensor(ss, t);
  const Tensor3C back = expect_tensor<cplx>(read_tensor(ss), "roundtrip");
  CHECK(max_abs_diff(t, back) == 0.0);
}

TEST_CASE("tensor file layout puts the last index fastest") {
  Tensor3D t(2, 2, 2);
  int v = 0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k) t(i, j, k) = v++;
  std::stringstream ss;
  write_tensor(ss, t);
  std::string line;
  std::getline(ss, line);
  CHECK(line == "TEDIA-TENSOR 1");
  std::getline(ss, line);
  CHECK(line == "real");
  std::getline(ss, line);
  CHECK(line == "2 2 2");
  for (int expected = 0; expected < 8; ++expected) {
    std::getline(ss, line);
    CHECK(line == std::to_string(expected));
  }
}

TEST_CASE("matrix files round trip") {
  const MatD m = test::random_matrix<double>(3, 5, 3);
  std::stringstream ss;
  write_matrix(ss, m);
  const MatD back = expect_matrix<double>(read_matrix(ss), "roundtrip");
  CHECK((m - back).norm() == 0.0);

  const Mat<cplx> mc = test::random_matrix<cplx>(2, 2, 4);
  std::stringstream sc;
  write_matrix(sc, mc);
  CHECK((mc - expect_matrix<cplx>(read_matrix(sc), "roundtrip")).norm() == 0.0);
}

TEST_CASE("malformed inputs fail with line information") {
  auto parse = [](const std::string& text) {
    std::stringstream ss(text);
    return read_tensor(ss);
  };
  CHECK_THROWS_AS(parse("BOGUS 1\nreal\n1 1 1\n0\n"), FormatError);
  CHECK_THROWS_AS(parse("TEDIA-TENSOR 1\nquaternion\n1 1 1\n0\n"), FormatError);
  CHECK_THROWS_AS(parse("TEDIA-TENSOR 1\nreal\n2 2\n"), FormatError);
  CHECK_THROWS_AS(parse("TEDIA-TENSOR 1\nreal\n1 1 2\n0\n"), FormatError);  // short data
  CHECK_THROWS_AS(parse("TEDIA-TENSOR 1\nreal\n1 1 1\nabc\n"), FormatError);

  try {
    parse("TEDIA-TENSOR 1\nreal\n1 1 1\nabc\n");
  } catch (const FormatError& e) {
    CHECK(std::string(e.what()).find("line 4") != std::string::npos);
  }
  CHECK_THROWS_AS(read_tensor_file("/nonexistent/path.tensor"), std::runtime_error);
}

TEST_CASE("wrong scalar kind is reported") {
  const Tensor3D t = test::random_tensor(2, 2, 2, 5);
  std::stringstream ss;
  write_tensor(ss, t);
  CHECK_THROWS_AS(expect_tensor<cplx>(read_tensor(ss), "ctx"), FormatError);
}

TEST_CASE("format_value keeps 17 significant digits") {
  const double x = 1.0 / 3.0;
  CHECK(std::stod(format_value(x)) == x);
  CHECK(std::stod(format_value(1e-300)) == 1e-300);
}
