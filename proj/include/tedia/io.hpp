#pragma once

#include <iosfwd>
#include <string>
#include <variant>

#include "tedia/tensor.hpp"

namespace tedia {

/// Thrown on malformed input files; message carries the line number.
class FormatError : public std::runtime_error {
 public:
  explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

using AnyTensor = std::variant<Tensor3<double>, Tensor3<cplx>>;
using AnyMatrix = std::variant<Mat<double>, Mat<cplx>>;

// TEDIA-TENSOR v1: UTF-8 text. Line 1 "TEDIA-TENSOR 1", line 2 "real" or
// "complex", line 3 "N1 N2 N3", then one value per line in layout order
// (last index fastest); complex values as "re im". Writers emit 17
// significant digits.
void write_tensor(std::ostream& os, const Tensor3<double>& t);
void write_tensor(std::ostream& os, const Tensor3<cplx>& t);
void write_tensor_file(const std::string& path, const Tensor3<double>& t);
void write_tensor_file(const std::string& path, const Tensor3<cplx>& t);
AnyTensor read_tensor(std::istream& is);
AnyTensor read_tensor_file(const std::string& path);

// TEDIA-MATRIX 1: same scheme with "R C" on line 3, values row by row.
void write_matrix(std::ostream& os, const Mat<double>& m);
void write_matrix(std::ostream& os, const Mat<cplx>& m);
void write_matrix_file(const std::string& path, const Mat<double>& m);
void write_matrix_file(const std::string& path, const Mat<cplx>& m);
AnyMatrix read_matrix(std::istream& is);
AnyMatrix read_matrix_file(const std::string& path);

template <class T>
Tensor3<T> expect_tensor(AnyTensor v, const std::string& context);
template <class T>
Mat<T> expect_matrix(AnyMatrix v, const std::string& context);

std::string format_value(double x);  // 17 significant digits

}  // namespace tedia
