#include "tedia/sweep.hpp"

#include <cmath>
#include <limits>

namespace tedia {

namespace {

// Backup of the six slices a pair rotation can modify.
template <class T>
struct SliceBackup {
  int i, j, n;
  std::vector<T> data;  // 6 slices of n*n values each

  void capture(const Tensor3<T>& e) {
    n = e.n1();
    data.resize(static_cast<std::size_t>(6) * n * n);
    std::size_t p = 0;
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c) {
        data[p++] = e(i, b, c);
        data[p++] = e(j, b, c);
        data[p++] = e(b, i, c);
        data[p++] = e(b, j, c);
        data[p++] = e(b, c, i);
        data[p++] = e(b, c, j);
      }
  }
  void restore(Tensor3<T>& e) const {
    std::size_t p = 0;
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c) {
        e(i, b, c) = data[p++];
        e(j, b, c) = data[p++];
        e(b, i, c) = data[p++];
        e(b, j, c) = data[p++];
        e(b, c, i) = data[p++];
        e(b, c, j) = data[p++];
      }
  }
};

// Left-multiply rows (i,j) of M by the 2x2 block [[s,t_even],[t_odd,s]];
// this is how a rotation factor updates the accumulated demixing matrix.
template <class T>
void update_demixing(Mat<T>& m, int i, int j, const T& s, const T& t_even, const T& t_odd) {
  for (int c = 0; c < m.cols(); ++c) {
    const T xi = m(i, c), xj = m(j, c);
    m(i, c) = s * xi + t_even * xj;
    m(j, c) = t_odd * xi + s * xj;
  }
}

// Right-multiply columns (i,j) of M by the inverse block [[s,-t_even],[-t_odd,s]];
// this is how a rotation factor updates the accumulated mixing matrix.
template <class T>
void update_mixing(Mat<T>& m, int i, int j, const T& s, const T& t_even, const T& t_odd) {
  for (int r = 0; r < m.rows(); ++r) {
    const T xi = m(r, i), xj = m(r, j);
    m(r, i) = s * xi - t_odd * xj;
    m(r, j) = -t_even * xi + s * xj;
  }
}

template <class T>
void apply_transform_updates(TransformSet<T>& tr, const RotationParams<T>& p) {
  auto scale = [](const T& a, const T& b) {
    if constexpr (is_complex_v<T>) return std::sqrt(T(1) + a * b);
    else return std::sqrt(1.0 + a * b);
  };
  const T s1 = scale(p.theta[0], p.theta[1]);
  const T s2 = scale(p.theta[2], p.theta[3]);
  const T s3 = scale(p.theta[4], p.theta[5]);
  update_demixing(tr.A, p.i, p.j, s1, p.theta[0], p.theta[1]);
  update_demixing(tr.B, p.i, p.j, s2, p.theta[2], p.theta[3]);
  update_demixing(tr.C, p.i, p.j, s3, p.theta[4], p.theta[5]);
  update_mixing(tr.A_tilde, p.i, p.j, s1, p.theta[0], p.theta[1]);
  update_mixing(tr.B_tilde, p.i, p.j, s2, p.theta[2], p.theta[3]);
  update_mixing(tr.C_tilde, p.i, p.j, s3, p.theta[4], p.theta[5]);
}

template <class T>
double theta_norm(const RotationParams<T>& p) {
  double s = 0.0;
  for (const auto& x : p.theta) s += abs_sq(x);
  return std::sqrt(s);
}

}  // namespace

template <class T>
DiagonalizationResult<T> tedia(const Tensor3<T>& t, const TediaConfig& cfg,
                               const TransformSet<T>& init) {
  cfg.validate();
  if (!t.is_cubic()) throw std::invalid_argument("tedia: tensor must be cubic");
  if (!t.all_finite()) throw std::invalid_argument("tedia: tensor has non-finite entries");
  const int n = t.n1();

  DiagonalizationResult<T> res;
  res.transforms = init;
  res.core = mode_product(mode_product(mode_product(t, init.A, 1), init.B, 2), init.C, 3);
  Tensor3<T>& e = res.core;

  double off_sq = off_norm_sq(e);
  res.off_norm_history.push_back(std::sqrt(off_sq));

  for (int sweep = 0; sweep < cfg.max_sweeps; ++sweep) {
    double theta_max = 0.0;
    for (int i = 0; i < n - 1; ++i) {
      for (int j = i + 1; j < n; ++j) {
        const PairGradient<T> g = pair_gradient(e, i, j);
        const PairHessian<T> h = pair_hessian(e, i, j);

        SliceBackup<T> backup{i, j, n, {}};
        backup.capture(e);
        const double union_before = off_union_sq(e, i, j);

        // candidate evaluation: apply in place, measure, roll back on reject
        auto try_params = [&](const RotationParams<T>& p, bool strict) -> bool {
          if (!regularity_ok(p)) return false;
          apply_rotation_inplace(e, p);
          const double union_after = off_union_sq(e, i, j);
          const double off_sq_new = off_sq - union_before + union_after;
          const bool ok = strict ? off_sq_new < off_sq
                                 : off_sq_new <= off_sq * (1.0 + 1e-12) + 1e-300;
          if (!ok) {
            backup.restore(e);
            return false;
          }
          off_sq = off_sq_new < 0.0 ? 0.0 : off_sq_new;
          return true;
        };

        RotationParams<T> p;
        bool accepted = false;
        double mu_used = 0.0;
        if (try_solve_step(g, h, 0.0, i, j, p) && try_params(p, /*strict=*/false))
          accepted = true;

        if (!accepted) {
          double mu = real_part(h.H(0, 0));
          for (int d = 1; d < 6; ++d) mu = std::min(mu, real_part(h.H(d, d)));
          if (mu <= 0.0) mu = 1e-12 * (real_part(h.H.trace()) / 6.0 + 1.0);
          const double mu_cap = 1e12 * h.H.norm();
          while (mu <= mu_cap) {
            RotationParams<T> pd;
            if (try_solve_step(g, h, mu, i, j, pd) && try_params(pd, /*strict=*/true)) {
              accepted = true;
              p = pd;
              mu_used = mu;
              break;
            }
            mu *= cfg.mu_growth;
          }
        }

        if (accepted) {
          apply_transform_updates(res.transforms, p);
          theta_max = std::max(theta_max, theta_norm(p));
          if (cfg.trace_steps) res.step_off_norms.push_back(std::sqrt(off_sq));

          if (cfg.extra_damped_steps && mu_used > 0.0) {
            // optional polishing: a few more damped steps for the same pair
            for (int extra = 0; extra < 5; ++extra) {
              const PairGradient<T> g2 = pair_gradient(e, i, j);
              const PairHessian<T> h2 = pair_hessian(e, i, j);
              RotationParams<T> p2;
              if (!try_solve_step(g2, h2, mu_used, i, j, p2)) break;
              if (!regularity_ok(p2)) break;
              backup.capture(e);
              const double before2 = off_union_sq(e, i, j);
              apply_rotation_inplace(e, p2);
              const double off_sq_new = off_sq - before2 + off_union_sq(e, i, j);
              if (off_sq_new < off_sq) {
                off_sq = off_sq_new;
                apply_transform_updates(res.transforms, p2);
                theta_max = std::max(theta_max, theta_norm(p2));
                if (cfg.trace_steps) res.step_off_norms.push_back(std::sqrt(off_sq));
              } else {
                backup.restore(e);
                break;
              }
            }
          }
        }
        // rejected pairs are skipped with theta = 0
      }
    }

    if (!e.all_finite())
      throw std::runtime_error("tedia: non-finite values produced during sweep " +
                               std::to_string(sweep + 1));

    off_sq = off_norm_sq(e);  // refresh the incrementally tracked value
    res.theta_max_history.push_back(theta_max);
    res.off_norm_history.push_back(std::sqrt(off_sq));
    res.sweeps_run = sweep + 1;
    if (theta_max < cfg.epsilon) {
      res.converged = true;
      break;
    }
  }
  return res;
}

template <class T>
DiagonalizationResult<T> tedia(const Tensor3<T>& t, const TediaConfig& cfg) {
  if (!t.is_cubic()) throw std::invalid_argument("tedia: tensor must be cubic");
  return tedia(t, cfg, TransformSet<T>::identity(t.n1()));
}

template <class T>
BrcResult check_brc(const Tensor3<T>& e, double tol) {
  if (!e.is_cubic()) throw std::invalid_argument("check_brc: tensor must be cubic");
  const int n = e.n1();
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      T s1{}, s2{}, s3{};
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          if (k == i && l == i) continue;
          s1 += e(i, k, l) * scalar_conj(e(j, k, l));
          s2 += e(k, i, l) * scalar_conj(e(k, j, l));
          s3 += e(k, l, i) * scalar_conj(e(k, l, j));
        }
      worst = std::max({worst, std::abs(s1), std::abs(s2), std::abs(s3)});
    }
  }
  BrcResult r;
  r.worst_residual = worst;
  const double off_sq = off_norm_sq(e);
  r.threshold = off_sq > 0.0 ? tol * off_sq
                             : tol * static_cast<double>(n) * n * n;
  r.satisfied = worst < r.threshold;
  return r;
}

template <class T>
double residual_fit(const Tensor3<T>& t, const DiagonalizationResult<T>& r) {
  Tensor3<T> rec = mode_product(r.core, r.transforms.A_tilde, 1);
  rec = mode_product(rec, r.transforms.B_tilde, 2);
  rec = mode_product(rec, r.transforms.C_tilde, 3);
  const double tn = frobenius_norm(t);
  if (tn == 0.0) return frobenius_norm(rec - t);
  return frobenius_norm(rec - t) / tn;
}

template struct TransformSet<double>;
template struct TransformSet<cplx>;

template DiagonalizationResult<double> tedia(const Tensor3<double>&, const TediaConfig&);
template DiagonalizationResult<cplx> tedia(const Tensor3<cplx>&, const TediaConfig&);
template DiagonalizationResult<double> tedia(const Tensor3<double>&, const TediaConfig&,
                                             const TransformSet<double>&);
template DiagonalizationResult<cplx> tedia(const Tensor3<cplx>&, const TediaConfig&,
                                           const TransformSet<cplx>&);
template BrcResult check_brc(const Tensor3<double>&, double);
template BrcResult check_brc(const Tensor3<cplx>&, double);
template double residual_fit(const Tensor3<double>&, const DiagonalizationResult<double>&);
template double residual_fit(const Tensor3<cplx>&, const DiagonalizationResult<cplx>&);

}  // namespace tedia
