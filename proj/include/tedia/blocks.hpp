#pragma once

#include <vector>

#include "tedia/sweep.hpp"
#include "tedia/tensor.hpp"

namespace tedia {

/// Column/row similarity matrices of a cubic core tensor:
/// F1(i,j) = sum_k |e_{kij}|, F2(i,j) = sum_k |e_{ikj}|, F3(i,j) = sum_k |e_{ijk}|,
/// F = F1+F2+F3, Fsym = F + F^T.
struct SimilarityMatrices {
  MatD F1, F2, F3, F, Fsym;
};

/// Simultaneous-mode permutation plus contiguous block boundaries over 0..N-1.
struct BlockStructure {
  std::vector<int> perm;         // new index p holds old index perm[p]
  std::vector<int> block_sizes;  // sums to N

  int n() const { return static_cast<int>(perm.size()); }
  std::vector<int> boundaries() const {  // start index of each block
    std::vector<int> b;
    int s = 0;
    for (int sz : block_sizes) {
      b.push_back(s);
      s += sz;
    }
    return b;
  }
  static BlockStructure singletons(int n);
  static BlockStructure single_block(int n);
  void validate() const;
};

template <class T>
SimilarityMatrices similarity(const Tensor3<T>& e);

/// Reverse Cuthill-McKee ordering of the graph with an edge wherever
/// Fsym exceeds zero_tol * max(Fsym). Ties break by ascending degree then
/// ascending index; disconnected components come out contiguous.
std::vector<int> rcm_order(const SimilarityMatrices& f, double zero_tol = 1e-8);

/// Average-link agglomerative clustering on Fsym. Starts from singletons,
/// repeatedly merges the pair of clusters with the largest average pairwise
/// similarity, and stops when that best average falls below
/// stop_ratio * (initial best pairwise similarity). Clusters are ordered by
/// smallest member, members ascending.
BlockStructure cluster_blocks(const SimilarityMatrices& f, double stop_ratio = 0.1);

/// Wraps an RCM ordering into a BlockStructure whose blocks are the
/// connected components of the thresholded graph, in RCM order.
BlockStructure rcm_blocks(const SimilarityMatrices& f, double zero_tol = 1e-8);

/// Reindex the core by perm in all three modes, permute demixing rows and
/// mixing columns accordingly, preserving the reconstruction identity and
/// determinant-one invariants (an odd permutation gets a sign fix).
template <class T>
void apply_block_permutation(Tensor3<T>& e, TransformSet<T>& tr, const BlockStructure& b);

/// Frobenius mass of entries whose three indices do not lie in one block,
/// divided by |e|_F.
template <class T>
double block_offdiagonal_mass(const Tensor3<T>& e, const BlockStructure& b);

// BlockStructure text format: line "perm: p1 ... pN" (1-based), line
// "sizes: s1 ... sB".
std::string block_structure_to_text(const BlockStructure& b);
BlockStructure block_structure_from_text(const std::string& text);

}  // namespace tedia
