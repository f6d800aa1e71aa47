#include "tedia/btd.hpp"

#include <cmath>

#include <Eigen/QR>

namespace tedia {

namespace {

using RowMajorMapC =
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using RowMajorMap =
    Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

// support triples (global indices) of all block cores, in model order
std::vector<std::array<int, 3>> support_triples(const std::vector<int>& sizes) {
  std::vector<std::array<int, 3>> sup;
  int off = 0;
  for (int s : sizes) {
    for (int a = 0; a < s; ++a)
      for (int b = 0; b < s; ++b)
        for (int c = 0; c < s; ++c) sup.push_back({off + a, off + b, off + c});
    off += s;
  }
  return sup;
}

Tensor3D assemble_block_core(const BtdModel& m) {
  const auto sizes = m.block_sizes();
  int n = 0;
  for (int s : sizes) n += s;
  Tensor3D g(n, n, n);
  int off = 0;
  for (std::size_t b = 0; b < m.cores.size(); ++b) {
    const int s = sizes[b];
    for (int a = 0; a < s; ++a)
      for (int bb = 0; bb < s; ++bb)
        for (int c = 0; c < s; ++c) g(off + a, off + bb, off + c) = m.cores[b](a, bb, c);
    off += s;
  }
  return g;
}

void scatter_block_core(BtdModel& m, const VecD& g, const std::vector<int>& sizes) {
  int p = 0;
  for (std::size_t b = 0; b < m.cores.size(); ++b) {
    const int s = sizes[b];
    for (int a = 0; a < s; ++a)
      for (int bb = 0; bb < s; ++bb)
        for (int c = 0; c < s; ++c) m.cores[b](a, bb, c) = g[p++];
  }
}

}  // namespace

Tensor3D BtdModel::reconstruct() const {
  const int N = n();
  Tensor3D rec(N, N, N);
  for (std::size_t b = 0; b < cores.size(); ++b) {
    Tensor3D term = mode_product(cores[b], factors[0][b], 1);
    term = mode_product(term, factors[1][b], 2);
    term = mode_product(term, factors[2][b], 3);
    rec += term;
  }
  return rec;
}

double BtdModel::fit(const Tensor3D& t) const {
  const double tn = frobenius_norm(t);
  const double r = frobenius_norm(reconstruct() - t);
  return tn > 0.0 ? r / tn : r;
}

MatD BtdModel::stacked_factor(int mode) const {
  const int N = n();
  MatD m(N, N);
  int off = 0;
  for (const auto& blk : factors[mode - 1]) {
    m.middleCols(off, blk.cols()) = blk;
    off += static_cast<int>(blk.cols());
  }
  return m;
}

BtdModel from_tedia(const DiagonalizationResult<double>& r, const BlockStructure& b) {
  b.validate();
  Tensor3D core = r.core;
  TransformSet<double> tr = r.transforms;
  apply_block_permutation(core, tr, b);

  BtdModel m;
  int off = 0;
  for (int s : b.block_sizes) {
    Tensor3D blk(s, s, s);
    for (int i = 0; i < s; ++i)
      for (int j = 0; j < s; ++j)
        for (int k = 0; k < s; ++k) blk(i, j, k) = core(off + i, off + j, off + k);
    m.cores.push_back(std::move(blk));
    m.factors[0].push_back(tr.A_tilde.middleCols(off, s));
    m.factors[1].push_back(tr.B_tilde.middleCols(off, s));
    m.factors[2].push_back(tr.C_tilde.middleCols(off, s));
    off += s;
  }
  return m;
}

AlsResult als_refine(const Tensor3D& t, const BtdModel& init, int max_iter, double tol) {
  if (init.cores.empty()) throw std::invalid_argument("als_refine: empty model");
  const int N = init.n();
  if (!t.is_cubic() || t.n1() != N)
    throw std::invalid_argument("als_refine: model does not match tensor dimension");
  if (max_iter < 0) throw std::invalid_argument("als_refine: max_iter must be >= 0");

  AlsResult res;
  res.model = init;
  BtdModel& m = res.model;
  const auto sizes = m.block_sizes();
  const auto sup = support_triples(sizes);
  const int nsup = static_cast<int>(sup.size());

  double fit_prev = m.fit(t);
  res.fit_history.push_back(fit_prev);

  const Eigen::Index NN = static_cast<Eigen::Index>(N) * N;
  RowMajorMapC t1(t.data(), N, NN);

  for (int it = 0; it < max_iter; ++it) {
    // factor updates: one stacked LS solve per mode
    for (int mode = 1; mode <= 3; ++mode) {
      Tensor3D g = assemble_block_core(m);
      Tensor3D p = g;
      for (int m2 = 1; m2 <= 3; ++m2) {
        if (m2 == mode) continue;
        p = mode_product(p, m.stacked_factor(m2), m2);
      }
      // mode-m unfoldings of t and p; rows = mode index
      MatD tm(N, NN), pm(N, NN);
      for (int i = 0; i < N; ++i) {
        Eigen::Index q = 0;
        for (int j = 0; j < N; ++j)
          for (int k = 0; k < N; ++k) {
            const auto val = [&](const Tensor3D& x) {
              return mode == 1 ? x(i, j, k) : (mode == 2 ? x(j, i, k) : x(j, k, i));
            };
            tm(i, q) = val(t);
            pm(i, q) = val(p);
            ++q;
          }
      }
      Eigen::CompleteOrthogonalDecomposition<MatD> cod(pm.transpose());
      if (cod.rank() < N) res.rank_deficient = true;
      MatD u = cod.solve(tm.transpose()).transpose();
      // split the stacked solution back into blocks
      int off = 0;
      for (std::size_t b = 0; b < m.cores.size(); ++b) {
        m.factors[mode - 1][b] = u.middleCols(off, sizes[b]);
        off += sizes[b];
      }
    }

    // joint core update: restricted normal equations built from the three
    // factor Gram matrices (kron structure of the design columns)
    const MatD U = m.stacked_factor(1), V = m.stacked_factor(2), W = m.stacked_factor(3);
    const MatD gu = U.transpose() * U, gv = V.transpose() * V, gw = W.transpose() * W;
    Tensor3D proj = mode_product(t, MatD(U.transpose()), 1);
    proj = mode_product(proj, MatD(V.transpose()), 2);
    proj = mode_product(proj, MatD(W.transpose()), 3);

    MatD gram(nsup, nsup);
    VecD rhs(nsup);
    for (int a = 0; a < nsup; ++a) {
      rhs[a] = proj(sup[a][0], sup[a][1], sup[a][2]);
      for (int b = 0; b < nsup; ++b)
        gram(a, b) = gu(sup[a][0], sup[b][0]) * gv(sup[a][1], sup[b][1]) *
                     gw(sup[a][2], sup[b][2]);
    }
    Eigen::CompleteOrthogonalDecomposition<MatD> cod(gram);
    if (cod.rank() < nsup) res.rank_deficient = true;
    const VecD g = cod.solve(rhs);
    scatter_block_core(m, g, sizes);

    const double fit = m.fit(t);
    res.fit_history.push_back(fit);
    res.iterations = it + 1;
    const double improvement = fit_prev - fit;
    fit_prev = fit;
    if (improvement < tol * std::max(1.0, fit_prev)) break;
  }
  return res;
}

}  // namespace tedia
