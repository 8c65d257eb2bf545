#pragma once

// Ward-linkage agglomerative clustering of a layer's filters.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "fprune/filter_matrix.hpp"

namespace fprune {

/// Dense symmetric n x n matrix of doubles.
class SquareMatrix {
 public:
  SquareMatrix() = default;
  explicit SquareMatrix(std::size_t n, double fill = 0.0) : n_(n), v_(n * n, fill) {}

  std::size_t size() const noexcept { return n_; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return v_[i * n_ + j]; }
  double& operator()(std::size_t i, std::size_t j) noexcept { return v_[i * n_ + j]; }
  std::span<const double> row(std::size_t i) const noexcept { return {v_.data() + i * n_, n_}; }

 private:
  std::size_t n_ = 0;
  std::vector<double> v_;
};

/// D[j][j'] = squared Euclidean distance between rows j and j'. Each entry is
/// a single kernel call, so the result is identical for any thread count.
SquareMatrix pairwise_sq_distances(const FilterMatrix& filters, std::size_t threads = 1);

/// Element-wise sqrt of pairwise_sq_distances.
SquareMatrix pairwise_distances(const FilterMatrix& filters, std::size_t threads = 1);

/// Increase in within-cluster sum of squares when merging A and B:
/// |A||B| / (|A|+|B|) * ||m_A - m_B||^2.
double ward_merge_cost(std::size_t size_a, std::span<const double> centroid_a, std::size_t size_b,
                       std::span<const double> centroid_b);

struct Merge {
  // Node ids: leaves are 0..n-1, merge i creates node n + i.
  std::size_t left;
  std::size_t right;
  double cost;
  std::size_t size;

  friend bool operator==(const Merge&, const Merge&) = default;
};

struct Dendrogram {
  std::vector<Merge> merges;
  std::size_t n_leaves = 0;

  friend bool operator==(const Dendrogram&, const Dendrogram&) = default;
};

struct ClusterAssignment {
  std::vector<std::size_t> labels;
  std::size_t k = 0;

  /// Member indices of each cluster, ascending.
  std::vector<std::vector<std::size_t>> members() const;
  std::vector<std::size_t> sizes() const;

  friend bool operator==(const ClusterAssignment&, const ClusterAssignment&) = default;
};

/// Relabels so cluster ids appear in order of their smallest member index.
ClusterAssignment canonicalize(std::span<const std::size_t> labels);

/// Greedy Ward agglomeration with Lance-Williams updates. Equal costs are
/// resolved toward the lexicographically smallest (left, right) node-id pair.
Dendrogram agglomerate(const FilterMatrix& filters, std::size_t threads = 1);

/// Same, starting from precomputed squared distances.
Dendrogram agglomerate(const SquareMatrix& sq_distances);

/// Partition with k clusters: undoes the last k-1 merges. Labels are
/// canonical (numbered by smallest leaf index). Throws out_of_range unless
/// 1 <= k <= n_leaves.
ClusterAssignment cut(const Dendrogram& dendrogram, std::size_t k);

}  // namespace fprune
