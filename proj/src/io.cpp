#include "tedia/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace tedia {

std::string format_value(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

namespace {

struct LineReader {
  std::istream& is;
  int line_no = 0;

  std::string next(const char* what) {
    std::string line;
    while (std::getline(is, line)) {
      ++line_no;
      // strip trailing CR from CRLF files
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) return line;
    }
    throw FormatError(std::string("unexpected end of file while reading ") + what);
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw FormatError("line " + std::to_string(line_no) + ": " + msg);
  }
};

double parse_double(LineReader& r, std::istringstream& ss, const char* what) {
  double v;
  if (!(ss >> v)) r.fail(std::string("expected a number for ") + what);
  return v;
}

void write_scalar_line(std::ostream& os, double x) { os << format_value(x) << '\n'; }
void write_scalar_line(std::ostream& os, const cplx& x) {
  os << format_value(x.real()) << ' ' << format_value(x.imag()) << '\n';
}

template <class T>
void write_tensor_impl(std::ostream& os, const Tensor3<T>& t) {
  os << "TEDIA-TENSOR 1\n";
  os << (is_complex_v<T> ? "complex" : "real") << '\n';
  os << t.n1() << ' ' << t.n2() << ' ' << t.n3() << '\n';
  for (const auto& x : t.storage()) write_scalar_line(os, x);
}

template <class T>
void write_matrix_impl(std::ostream& os, const Mat<T>& m) {
  os << "TEDIA-MATRIX 1\n";
  os << (is_complex_v<T> ? "complex" : "real") << '\n';
  os << m.rows() << ' ' << m.cols() << '\n';
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) write_scalar_line(os, m(r, c));
}

bool read_header(LineReader& r, const std::string& magic) {
  const std::string line = r.next("header");
  if (line != magic + " 1") r.fail("expected '" + magic + " 1', got '" + line + "'");
  const std::string kind = r.next("scalar kind");
  if (kind == "real") return false;
  if (kind == "complex") return true;
  r.fail("scalar kind must be 'real' or 'complex', got '" + kind + "'");
}

template <class T>
void read_values(LineReader& r, T* dst, std::size_t count) {
  for (std::size_t s = 0; s < count; ++s) {
    std::istringstream ss(r.next("value"));
    if constexpr (is_complex_v<T>) {
      const double re = parse_double(r, ss, "complex value (re)");
      const double im = parse_double(r, ss, "complex value (im)");
      dst[s] = cplx(re, im);
    } else {
      dst[s] = parse_double(r, ss, "value");
    }
  }
}

}  // namespace

void write_tensor(std::ostream& os, const Tensor3<double>& t) { write_tensor_impl(os, t); }
void write_tensor(std::ostream& os, const Tensor3<cplx>& t) { write_tensor_impl(os, t); }
void write_matrix(std::ostream& os, const Mat<double>& m) { write_matrix_impl(os, m); }
void write_matrix(std::ostream& os, const Mat<cplx>& m) { write_matrix_impl(os, m); }

AnyTensor read_tensor(std::istream& is) {
  LineReader r{is};
  const bool complex_kind = read_header(r, "TEDIA-TENSOR");
  std::istringstream ss(r.next("dimensions"));
  long n1, n2, n3;
  if (!(ss >> n1 >> n2 >> n3) || n1 <= 0 || n2 <= 0 || n3 <= 0)
    r.fail("expected three positive dimensions");
  if (complex_kind) {
    Tensor3<cplx> t(static_cast<int>(n1), static_cast<int>(n2), static_cast<int>(n3));
    read_values(r, t.data(), t.size());
    return t;
  }
  Tensor3<double> t(static_cast<int>(n1), static_cast<int>(n2), static_cast<int>(n3));
  read_values(r, t.data(), t.size());
  return t;
}

AnyMatrix read_matrix(std::istream& is) {
  LineReader r{is};
  const bool complex_kind = read_header(r, "TEDIA-MATRIX");
  std::istringstream ss(r.next("dimensions"));
  long rows, cols;
  if (!(ss >> rows >> cols) || rows <= 0 || cols <= 0)
    r.fail("expected two positive dimensions");
  if (complex_kind) {
    Mat<cplx> m(rows, cols);
    std::vector<cplx> buf(static_cast<std::size_t>(rows) * cols);
    read_values(r, buf.data(), buf.size());
    for (long i = 0; i < rows; ++i)
      for (long j = 0; j < cols; ++j) m(i, j) = buf[static_cast<std::size_t>(i) * cols + j];
    return m;
  }
  Mat<double> m(rows, cols);
  std::vector<double> buf(static_cast<std::size_t>(rows) * cols);
  read_values(r, buf.data(), buf.size());
  for (long i = 0; i < rows; ++i)
    for (long j = 0; j < cols; ++j) m(i, j) = buf[static_cast<std::size_t>(i) * cols + j];
  return m;
}

namespace {

template <class Fn>
void with_output_file(const std::string& path, Fn&& fn) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  fn(os);
  os.flush();
  if (!os) throw std::runtime_error("write to '" + path + "' failed");
}

std::ifstream open_input(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open '" + path + "' for reading");
  return is;
}

}  // namespace

void write_tensor_file(const std::string& path, const Tensor3<double>& t) {
  with_output_file(path, [&](std::ostream& os) { write_tensor(os, t); });
}
void write_tensor_file(const std::string& path, const Tensor3<cplx>& t) {
  with_output_file(path, [&](std::ostream& os) { write_tensor(os, t); });
}
void write_matrix_file(const std::string& path, const Mat<double>& m) {
  with_output_file(path, [&](std::ostream& os) { write_matrix(os, m); });
}
void write_matrix_file(const std::string& path, const Mat<cplx>& m) {
  with_output_file(path, [&](std::ostream& os) { write_matrix(os, m); });
}

AnyTensor read_tensor_file(const std::string& path) {
  auto is = open_input(path);
  try {
    return read_tensor(is);
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

AnyMatrix read_matrix_file(const std::string& path) {
  auto is = open_input(path);
  try {
    return read_matrix(is);
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

template <class T>
Tensor3<T> expect_tensor(AnyTensor v, const std::string& context) {
  if (auto* p = std::get_if<Tensor3<T>>(&v)) return std::move(*p);
  throw FormatError(context + ": tensor has the wrong scalar kind");
}

template <class T>
Mat<T> expect_matrix(AnyMatrix v, const std::string& context) {
  if (auto* p = std::get_if<Mat<T>>(&v)) return std::move(*p);
  throw FormatError(context + ": matrix has the wrong scalar kind");
}

template Tensor3<double> expect_tensor<double>(AnyTensor, const std::string&);
template Tensor3<cplx> expect_tensor<cplx>(AnyTensor, const std::string&);
template Mat<double> expect_matrix<double>(AnyMatrix, const std::string&);
template Mat<cplx> expect_matrix<cplx>(AnyMatrix, const std::string&);

}  // namespace tedia
