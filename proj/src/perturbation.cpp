#include "tedia/perturbation.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/LU>
#include <Eigen/SVD>

#include <unsupported/Eigen/KroneckerProduct>

namespace tedia {

AuxTensors compute_aux(const Tensor3D& t, const TransformSet<double>& tr) {
  if (!t.is_cubic()) throw std::invalid_argument("compute_aux: tensor must be cubic");
  AuxTensors a;
  a.Ta = mode_product(mode_product(t, tr.B, 2), tr.C, 3);
  a.Tb = mode_product(mode_product(t, tr.A, 1), tr.C, 3);
  a.Tc = mode_product(mode_product(t, tr.A, 1), tr.B, 2);
  const Tensor3D e = mode_product(a.Ta, tr.A, 1);
  const MatD At = tr.A.transpose(), Bt = tr.B.transpose(), Ct = tr.C.transpose();
  a.Ea = mode_product(mode_product(e, Bt, 2), Ct, 3);
  a.Eb = mode_product(mode_product(e, At, 1), Ct, 3);
  a.Ec = mode_product(mode_product(e, At, 1), Bt, 2);
  return a;
}

MatD assemble_h1(const Tensor3D& t, const TransformSet<double>& tr) {
  const int n = t.n1();
  const AuxTensors aux = compute_aux(t, tr);
  const Tensor3D e = mode_product(aux.Ta, tr.A, 1);
  const Tensor3D &Ta = aux.Ta, &Tb = aux.Tb, &Tc = aux.Tc;

  MatD h1 = MatD::Zero(3 * n * n, 3 * n * n);

  // diagonal-condition rows: (dA A^-1)_ii = sum_r dA(i,r) A~(r,i)
  for (int i = 0; i < n; ++i)
    for (int r = 0; r < n; ++r) {
      h1(condition_index(i, i, 0, n), theta_index(i, r, 0, n)) = tr.A_tilde(r, i);
      h1(condition_index(i, i, 1, n), theta_index(i, r, 1, n)) = tr.B_tilde(r, i);
      h1(condition_index(i, i, 2, n), theta_index(i, r, 2, n)) = tr.C_tilde(r, i);
    }

  // BRC rows; every sum excludes the slice's spatial-diagonal entry (i,i)
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const int row1 = condition_index(i, j, 0, n);
      const int row2 = condition_index(i, j, 1, n);
      const int row3 = condition_index(i, j, 2, n);

      for (int p = 0; p < n; ++p) {
        for (int r = 0; r < n; ++r) {
          // --- mode-1 BRC row: F = sum_{(s,u)!=(i,i)} e(i,s,u) e(j,s,u)
          double v = 0.0;
          if (p == i || p == j) {
            const int x = (p == i) ? j : i;
            for (int s = 0; s < n; ++s)
              for (int u = 0; u < n; ++u) {
                if (s == i && u == i) continue;
                v += Ta(r, s, u) * e(x, s, u);
              }
          }
          h1(row1, theta_index(p, r, 0, n)) = v;

          v = 0.0;
          for (int u = 0; u < n; ++u) {
            if (p == i && u == i) continue;
            v += Tb(i, r, u) * e(j, p, u) + Tb(j, r, u) * e(i, p, u);
          }
          h1(row1, theta_index(p, r, 1, n)) = v;

          v = 0.0;
          for (int s = 0; s < n; ++s) {
            if (s == i && p == i) continue;
            v += Tc(i, s, r) * e(j, s, p) + Tc(j, s, r) * e(i, s, p);
          }
          h1(row1, theta_index(p, r, 2, n)) = v;

          // --- mode-2 BRC row: F = sum_{(s,u)!=(i,i)} e(s,i,u) e(s,j,u)
          v = 0.0;
          for (int u = 0; u < n; ++u) {
            if (p == i && u == i) continue;
            v += Ta(r, i, u) * e(p, j, u) + Ta(r, j, u) * e(p, i, u);
          }
          h1(row2, theta_index(p, r, 0, n)) = v;

          v = 0.0;
          if (p == i || p == j) {
            const int x = (p == i) ? j : i;
            for (int s = 0; s < n; ++s)
              for (int u = 0; u < n; ++u) {
                if (s == i && u == i) continue;
                v += Tb(s, r, u) * e(s, x, u);
              }
          }
          h1(row2, theta_index(p, r, 1, n)) = v;

          v = 0.0;
          for (int s = 0; s < n; ++s) {
            if (s == i && p == i) continue;
            v += Tc(s, i, r) * e(s, j, p) + Tc(s, j, r) * e(s, i, p);
          }
          h1(row2, theta_index(p, r, 2, n)) = v;

          // --- mode-3 BRC row: F = sum_{(s,u)!=(i,i)} e(s,u,i) e(s,u,j)
          v = 0.0;
          for (int u = 0; u < n; ++u) {
            if (p == i && u == i) continue;
            v += Ta(r, u, i) * e(p, u, j) + Ta(r, u, j) * e(p, u, i);
          }
          h1(row3, theta_index(p, r, 0, n)) = v;

          v = 0.0;
          for (int s = 0; s < n; ++s) {
            if (s == i && p == i) continue;
            v += Tb(s, r, i) * e(s, p, j) + Tb(s, r, j) * e(s, p, i);
          }
          h1(row3, theta_index(p, r, 1, n)) = v;

          v = 0.0;
          if (p == i || p == j) {
            const int x = (p == i) ? j : i;
            for (int s = 0; s < n; ++s)
              for (int u = 0; u < n; ++u) {
                if (s == i && u == i) continue;
                v += Tc(s, u, r) * e(s, u, x);
              }
          }
          h1(row3, theta_index(p, r, 2, n)) = v;
        }
      }
    }
  }
  return h1;
}

MatD assemble_h2(const Tensor3D& t, const TransformSet<double>& tr) {
  const int n = t.n1();
  const AuxTensors aux = compute_aux(t, tr);
  const Tensor3D e = mode_product(aux.Ta, tr.A, 1);
  const MatD &A = tr.A, &B = tr.B, &C = tr.C;
  const Tensor3D &Ea = aux.Ea, &Eb = aux.Eb, &Ec = aux.Ec;

  MatD h2 = MatD::Zero(3 * n * n, n * n * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;  // diagonal-condition rows do not involve t
      const int row1 = condition_index(i, j, 0, n);
      const int row2 = condition_index(i, j, 1, n);
      const int row3 = condition_index(i, j, 2, n);
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l)
          for (int m = 0; m < n; ++m) {
            const int col = static_cast<int>((static_cast<std::size_t>(k) * n + l) * n + m);
            h2(row1, col) = -(A(i, k) * Ea(j, l, m) + A(j, k) * Ea(i, l, m) -
                              B(i, l) * C(i, m) * (A(i, k) * e(j, i, i) + A(j, k) * e(i, i, i)));
            h2(row2, col) = -(B(i, l) * Eb(k, j, m) + B(j, l) * Eb(k, i, m) -
                              A(i, k) * C(i, m) * (B(i, l) * e(i, j, i) + B(j, l) * e(i, i, i)));
            h2(row3, col) = -(C(i, m) * Ec(k, l, j) + C(j, m) * Ec(k, l, i) -
                              A(i, k) * B(i, l) * (C(i, m) * e(i, i, j) + C(j, m) * e(i, i, i)));
          }
    }
  }
  return h2;
}

MatD covariance(const MatD& h1, const MatD& h2, double sigma2) {
  Eigen::JacobiSVD<MatD> svd(h1, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double smax = sv(0);
  const double smin = sv(sv.size() - 1);
  if (!(smax > 0.0) || smax / std::max(smin, 1e-300) >= 1e12)
    throw SingularSystemError("covariance: H1 is numerically singular, solution unstable");
  const MatD x = svd.solve(h2);
  MatD cov = sigma2 * (x * x.transpose());
  cov = 0.5 * (cov + cov.transpose()).eval();
  return cov;
}

MatD predict_msae(const MatD& cov, const TransformSet<double>& tr) {
  const int n = static_cast<int>(tr.A.rows());
  MatD msae(3, n);
  for (int mode = 1; mode <= 3; ++mode) {
    // covariance of vec(dX) in column-major order, extracted from the
    // interleaved Theta convention
    MatD s(n * n, n * n);
    for (int p1 = 0; p1 < n; ++p1)
      for (int r1 = 0; r1 < n; ++r1)
        for (int p2 = 0; p2 < n; ++p2)
          for (int r2 = 0; r2 < n; ++r2)
            s(r1 * n + p1, r2 * n + p2) = cov(theta_index(p1, r1, mode - 1, n),
                                              theta_index(p2, r2, mode - 1, n));
    const MatD& mix = tr.mixing(mode);
    const MatD kron = Eigen::kroneckerProduct(mix.transpose(), mix).eval();
    const MatD smix = kron * s * kron.transpose();
    for (int i = 0; i < n; ++i) {
      const VecD col = mix.col(i);
      const double nrm2 = col.squaredNorm();
      const MatD proj = MatD::Identity(n, n) - col * col.transpose() / nrm2;
      const MatD blk = smix.block(i * n, i * n, n, n);
      msae(mode - 1, i) = (proj * blk).trace() / nrm2;
    }
  }
  return msae;
}

StabilityResult stability_check(const Tensor3D& t, const TransformSet<double>& tr) {
  const MatD h1 = assemble_h1(t, tr);
  Eigen::JacobiSVD<MatD> svd(h1);
  const auto& sv = svd.singularValues();
  StabilityResult r;
  const double smax = sv(0);
  r.h1_min_singular_ratio = smax > 0.0 ? sv(sv.size() - 1) / smax : 0.0;
  r.stable = r.h1_min_singular_ratio > 1e-10;
  return r;
}

PerturbationReport analyze_perturbation(const Tensor3D& t, const TransformSet<double>& tr,
                                        double sigma2) {
  PerturbationReport rep;
  rep.sigma2 = sigma2;

  const Tensor3D core =
      mode_product(mode_product(mode_product(t, tr.A, 1), tr.B, 2), tr.C, 3);
  const BrcResult brc = check_brc(core, 1e-4);
  const double off_sq = off_norm_sq(core);
  rep.brc_residual = off_sq > 0.0 ? brc.worst_residual / off_sq : 0.0;
  rep.stationary = rep.brc_residual < 1e-4;

  rep.H1 = assemble_h1(t, tr);
  rep.H2 = assemble_h2(t, tr);

  Eigen::JacobiSVD<MatD> svd(rep.H1);
  const auto& sv = svd.singularValues();
  const double smax = sv(0);
  rep.h1_min_singular_ratio = smax > 0.0 ? sv(sv.size() - 1) / smax : 0.0;
  rep.stable = rep.h1_min_singular_ratio > 1e-10;
  if (rep.stable) {
    rep.cov = covariance(rep.H1, rep.H2, sigma2);
    rep.msae = predict_msae(rep.cov, tr);
  }
  return rep;
}

std::string perturbation_summary(const PerturbationReport& rep) {
  std::ostringstream os;
  os << "stable: " << (rep.stable ? "yes" : "no") << '\n';
  os << "h1_min_singular_ratio: " << rep.h1_min_singular_ratio << '\n';
  os << "sigma2: " << rep.sigma2 << '\n';
  if (!rep.stationary)
    os << "warning: input is not BRC-stationary (relative residual "
       << rep.brc_residual << "); predictions are unreliable\n";
  if (rep.stable && rep.msae.size() > 0) {
    const char* names[3] = {"A", "B", "C"};
    for (int mode = 0; mode < 3; ++mode) {
      os << "msae_db_" << names[mode] << ":";
      for (int i = 0; i < rep.msae.cols(); ++i)
        os << ' ' << 10.0 * std::log10(rep.msae(mode, i) + 1e-300);
      os << '\n';
    }
  }
  return os.str();
}

}  // namespace tedia
