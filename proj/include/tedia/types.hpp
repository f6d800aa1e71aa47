#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <type_traits>

#include <Eigen/Dense>

namespace tedia {

using cplx = std::complex<double>;

template <class T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
template <class T>
using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;

using MatD = Mat<double>;
using VecD = Vec<double>;
using MatC = Mat<cplx>;

template <class T>
inline constexpr bool is_complex_v = false;
template <class U>
inline constexpr bool is_complex_v<std::complex<U>> = true;

inline double scalar_conj(double x) { return x; }
inline cplx scalar_conj(const cplx& x) { return std::conj(x); }

inline double real_part(double x) { return x; }
inline double real_part(const cplx& x) { return x.real(); }

inline double abs_sq(double x) { return x * x; }
inline double abs_sq(const cplx& x) { return std::norm(x); }

// Thrown when a real-domain elementary rotation would need 1+theta_a*theta_b < 0.
class RegularityError : public std::runtime_error {
 public:
  explicit RegularityError(const std::string& what) : std::runtime_error(what) {}
};

// Thrown when a linear system is too ill-conditioned to solve; callers should
// increase the damping parameter.
class SingularSystemError : public std::runtime_error {
 public:
  explicit SingularSystemError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace tedia
