#include "tedia/blocks.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace tedia {

BlockStructure BlockStructure::singletons(int n) {
  BlockStructure b;
  b.perm.resize(n);
  std::iota(b.perm.begin(), b.perm.end(), 0);
  b.block_sizes.assign(n, 1);
  return b;
}

BlockStructure BlockStructure::single_block(int n) {
  BlockStructure b;
  b.perm.resize(n);
  std::iota(b.perm.begin(), b.perm.end(), 0);
  b.block_sizes.assign(1, n);
  return b;
}

void BlockStructure::validate() const {
  const int n_ = n();
  std::vector<char> seen(n_, 0);
  for (int p : perm) {
    if (p < 0 || p >= n_ || seen[p])
      throw std::invalid_argument("BlockStructure: perm is not a permutation");
    seen[p] = 1;
  }
  int total = 0;
  for (int s : block_sizes) {
    if (s <= 0) throw std::invalid_argument("BlockStructure: nonpositive block size");
    total += s;
  }
  if (total != n_)
    throw std::invalid_argument("BlockStructure: block sizes do not sum to N");
}

template <class T>
SimilarityMatrices similarity(const Tensor3<T>& e) {
  if (!e.is_cubic()) throw std::invalid_argument("similarity: tensor must be cubic");
  const int n = e.n1();
  SimilarityMatrices f;
  f.F1 = MatD::Zero(n, n);
  f.F2 = MatD::Zero(n, n);
  f.F3 = MatD::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        f.F1(j, k) += std::abs(e(i, j, k));
        f.F2(i, k) += std::abs(e(i, j, k));
        f.F3(i, j) += std::abs(e(i, j, k));
      }
  f.F = f.F1 + f.F2 + f.F3;
  f.Fsym = f.F + f.F.transpose();
  return f;
}

namespace {

std::vector<std::vector<int>> threshold_adjacency(const MatD& fsym, double zero_tol) {
  const int n = static_cast<int>(fsym.rows());
  double fmax = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) fmax = std::max(fmax, fsym(i, j));
  const double thr = zero_tol * fmax;
  std::vector<std::vector<int>> adj(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j && fsym(i, j) > thr) adj[i].push_back(j);
  return adj;
}

}  // namespace

std::vector<int> rcm_order(const SimilarityMatrices& f, double zero_tol) {
  const int n = static_cast<int>(f.Fsym.rows());
  const auto adj = threshold_adjacency(f.Fsym, zero_tol);
  std::vector<int> degree(n);
  for (int i = 0; i < n; ++i) degree[i] = static_cast<int>(adj[i].size());

  auto by_degree_then_index = [&](int a, int b) {
    return degree[a] != degree[b] ? degree[a] < degree[b] : a < b;
  };

  std::vector<char> visited(n, 0);
  std::vector<int> order;
  order.reserve(n);
  for (;;) {
    // lowest-degree unvisited vertex starts the next component
    int start = -1;
    for (int i = 0; i < n; ++i)
      if (!visited[i] && (start < 0 || by_degree_then_index(i, start))) start = i;
    if (start < 0) break;

    std::vector<int> queue{start};
    visited[start] = 1;
    for (std::size_t qi = 0; qi < queue.size(); ++qi) {
      const int v = queue[qi];
      order.push_back(v);
      std::vector<int> next;
      for (int w : adj[v])
        if (!visited[w]) {
          visited[w] = 1;
          next.push_back(w);
        }
      std::sort(next.begin(), next.end(), by_degree_then_index);
      queue.insert(queue.end(), next.begin(), next.end());
    }
  }
  std::reverse(order.begin(), order.end());
  return order;
}

BlockStructure rcm_blocks(const SimilarityMatrices& f, double zero_tol) {
  const int n = static_cast<int>(f.Fsym.rows());
  const auto adj = threshold_adjacency(f.Fsym, zero_tol);
  const std::vector<int> order = rcm_order(f, zero_tol);

  // connected components define the blocks; order within perm follows RCM
  std::vector<int> comp(n, -1);
  int ncomp = 0;
  for (int i = 0; i < n; ++i) {
    if (comp[i] >= 0) continue;
    std::vector<int> stack{i};
    comp[i] = ncomp;
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      for (int w : adj[v])
        if (comp[w] < 0) {
          comp[w] = ncomp;
          stack.push_back(w);
        }
    }
    ++ncomp;
  }

  BlockStructure b;
  b.perm = order;
  std::vector<int> sizes;
  int run = 0;
  for (std::size_t p = 0; p < order.size(); ++p) {
    ++run;
    const bool last = p + 1 == order.size();
    if (last || comp[order[p + 1]] != comp[order[p]]) {
      sizes.push_back(run);
      run = 0;
    }
  }
  b.block_sizes = sizes;
  b.validate();
  return b;
}

BlockStructure cluster_blocks(const SimilarityMatrices& f, double stop_ratio) {
  if (!(stop_ratio > 0.0) || stop_ratio > 1.0)
    throw std::invalid_argument("cluster_blocks: stop_ratio must be in (0,1]");
  const int n = static_cast<int>(f.Fsym.rows());
  std::vector<std::vector<int>> clusters(n);
  for (int i = 0; i < n; ++i) clusters[i] = {i};

  // sum of Fsym entries between two clusters; averages divide by the pair count
  auto link_sum = [&](const std::vector<int>& a, const std::vector<int>& b) {
    double s = 0.0;
    for (int x : a)
      for (int y : b) s += f.Fsym(x, y);
    return s;
  };

  double initial_best = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) initial_best = std::max(initial_best, f.Fsym(i, j));

  if (initial_best > 0.0) {
    while (clusters.size() > 1) {
      double best = -1.0;
      std::size_t bi = 0, bj = 0;
      for (std::size_t i = 0; i < clusters.size(); ++i)
        for (std::size_t j = i + 1; j < clusters.size(); ++j) {
          const double avg = link_sum(clusters[i], clusters[j]) /
                             (static_cast<double>(clusters[i].size()) * clusters[j].size());
          if (avg > best) {
            best = avg;
            bi = i;
            bj = j;
          }
        }
      if (best < stop_ratio * initial_best) break;
      auto& ci = clusters[bi];
      ci.insert(ci.end(), clusters[bj].begin(), clusters[bj].end());
      clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(bj));
    }
  }

  for (auto& c : clusters) std::sort(c.begin(), c.end());
  std::sort(clusters.begin(), clusters.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });

  BlockStructure b;
  for (const auto& c : clusters) {
    b.block_sizes.push_back(static_cast<int>(c.size()));
    b.perm.insert(b.perm.end(), c.begin(), c.end());
  }
  b.validate();
  return b;
}

template <class T>
void apply_block_permutation(Tensor3<T>& e, TransformSet<T>& tr, const BlockStructure& b) {
  b.validate();
  const int n = e.n1();
  if (!e.is_cubic() || b.n() != n)
    throw std::invalid_argument("apply_block_permutation: size mismatch");

  const auto& p = b.perm;
  Tensor3<T> out(n, n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) out(i, j, k) = e(p[i], p[j], p[k]);

  auto permute_rows = [&](Mat<T>& m) {
    Mat<T> r(n, n);
    for (int i = 0; i < n; ++i) r.row(i) = m.row(p[i]);
    m = r;
  };
  auto permute_cols = [&](Mat<T>& m) {
    Mat<T> r(n, n);
    for (int j = 0; j < n; ++j) r.col(j) = m.col(p[j]);
    m = r;
  };
  permute_rows(tr.A);
  permute_rows(tr.B);
  permute_rows(tr.C);
  permute_cols(tr.A_tilde);
  permute_cols(tr.B_tilde);
  permute_cols(tr.C_tilde);

  // an odd permutation flips every determinant; negating index 0 in all
  // three modes restores det = 1 without breaking the reconstruction
  int inversions = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (p[i] > p[j]) ++inversions;
  if (inversions % 2 == 1) {
    tr.A.row(0) = -tr.A.row(0);
    tr.B.row(0) = -tr.B.row(0);
    tr.C.row(0) = -tr.C.row(0);
    tr.A_tilde.col(0) = -tr.A_tilde.col(0);
    tr.B_tilde.col(0) = -tr.B_tilde.col(0);
    tr.C_tilde.col(0) = -tr.C_tilde.col(0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          const int flips = (i == 0) + (j == 0) + (k == 0);
          if (flips % 2 == 1) out(i, j, k) = -out(i, j, k);
        }
  }
  e = std::move(out);
}

template <class T>
double block_offdiagonal_mass(const Tensor3<T>& e, const BlockStructure& b) {
  b.validate();
  const int n = e.n1();
  if (!e.is_cubic() || b.n() != n)
    throw std::invalid_argument("block_offdiagonal_mass: size mismatch");

  // cluster id of each original index
  std::vector<int> cid(n);
  int pos = 0, blk = 0;
  for (int sz : b.block_sizes) {
    for (int s = 0; s < sz; ++s) cid[b.perm[pos++]] = blk;
    ++blk;
  }

  double off_sq = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        if (!(cid[i] == cid[j] && cid[j] == cid[k])) off_sq += abs_sq(e(i, j, k));
  const double total = frobenius_norm(e);
  return total > 0.0 ? std::sqrt(off_sq) / total : 0.0;
}

std::string block_structure_to_text(const BlockStructure& b) {
  std::ostringstream os;
  os << "perm:";
  for (int p : b.perm) os << ' ' << p + 1;
  os << "\nsizes:";
  for (int s : b.block_sizes) os << ' ' << s;
  os << '\n';
  return os.str();
}

BlockStructure block_structure_from_text(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  BlockStructure b;
  bool have_perm = false, have_sizes = false;
  while (std::getline(is, line)) {
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "perm:") {
      int v;
      while (ls >> v) b.perm.push_back(v - 1);
      have_perm = true;
    } else if (tag == "sizes:") {
      int v;
      while (ls >> v) b.block_sizes.push_back(v);
      have_sizes = true;
    }
  }
  if (!have_perm || !have_sizes)
    throw std::invalid_argument("block structure text needs 'perm:' and 'sizes:' lines");
  b.validate();
  return b;
}

template SimilarityMatrices similarity(const Tensor3<double>&);
template SimilarityMatrices similarity(const Tensor3<cplx>&);
template void apply_block_permutation(Tensor3<double>&, TransformSet<double>&,
                                      const BlockStructure&);
template void apply_block_permutation(Tensor3<cplx>&, TransformSet<cplx>&,
                                      const BlockStructure&);
template double block_offdiagonal_mass(const Tensor3<double>&, const BlockStructure&);
template double block_offdiagonal_mass(const Tensor3<cplx>&, const BlockStructure&);

}  // namespace tedia
