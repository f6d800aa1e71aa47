#include "tedia/scaling.hpp"

#include <algorithm>
#include <cmath>

namespace tedia {

template <class T>
SliceEnergies slice_energies(const Tensor3<T>& e, int mode) {
  if (!e.is_cubic()) throw std::invalid_argument("slice_energies: tensor must be cubic");
  if (mode < 1 || mode > 3)
    throw std::invalid_argument("slice_energies: mode must be 1, 2 or 3");
  const int n = e.n1();
  SliceEnergies r;
  r.mode = mode;
  r.eta.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double s = real_part(slice_inner(e, mode, i, i));
    s -= abs_sq(e(i, i, i));
    r.eta[i] = s < 0.0 ? 0.0 : s;
  }
  return r;
}

ScalingResult optimal_scaling(const SliceEnergies& energies) {
  const auto& eta = energies.eta;
  const int n = static_cast<int>(eta.size());
  ScalingResult r;
  const double max_eta = n ? *std::max_element(eta.begin(), eta.end()) : 0.0;
  if (max_eta <= 0.0) {
    r.kind = ScalingKind::AllZero;
    r.d.assign(n, 1.0);
    return r;
  }
  const double zero_tol = 1e-14 * max_eta;
  bool any_zero = false;
  for (double x : eta) any_zero |= (x <= zero_tol);
  if (any_zero) {
    r.kind = ScalingKind::InfimumZero;
    return r;
  }

  double mean_log = 0.0;
  for (double x : eta) mean_log += std::log(x);
  mean_log /= n;
  r.kind = ScalingKind::Scaled;
  r.d.resize(n);
  double log_sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double log_d = 0.5 * (mean_log - std::log(eta[i]));
    r.d[i] = std::exp(log_d);
    log_sum += log_d;
  }
  // renormalize so prod d_i is 1 despite roundoff
  const double corr = std::exp(-log_sum / n);
  for (double& x : r.d) x *= corr;
  return r;
}

template <class T>
double scaling_optimality_residual(const Tensor3<T>& e) {
  double worst = 0.0;
  double max_eta = 0.0;
  for (int mode = 1; mode <= 3; ++mode) {
    const SliceEnergies s = slice_energies(e, mode);
    for (double x : s.eta) max_eta = std::max(max_eta, x);
    for (std::size_t i = 1; i < s.eta.size(); ++i)
      worst = std::max(worst, std::abs(s.eta[i] - s.eta[0]));
  }
  return worst / (max_eta + 1e-300);
}

template SliceEnergies slice_energies(const Tensor3<double>&, int);
template SliceEnergies slice_energies(const Tensor3<cplx>&, int);
template double scaling_optimality_residual(const Tensor3<double>&);
template double scaling_optimality_residual(const Tensor3<cplx>&);

}  // namespace tedia
