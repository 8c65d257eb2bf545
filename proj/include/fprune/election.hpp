#pragma once

// Per-layer representative election: choose the cluster count with the best
// mean silhouette, drop clusters whose mean silhouette is negative and keep
// the filter nearest to each surviving cluster's centroid.

#include <cstddef>
#include <map>
#include <utility>
#include <vector>

#include "fprune/filter_matrix.hpp"
#include "fprune/hierarchy.hpp"
#include "fprune/silhouette.hpp"

namespace fprune {

struct ElectionConfig {
  double lambda = 0.1;          // minimum cluster rate, in (0, 1]
  std::size_t k_min_floor = 2;  // silhouette needs at least two clusters
  std::size_t threads = 1;      // distance-matrix workers; results do not depend on it
};

struct LayerElection {
  std::size_t k_star = 0;
  ClusterAssignment assignment;
  std::vector<std::size_t> kept;               // ascending filter indices
  std::vector<std::size_t> kept_cluster;       // cluster id of each kept index
  std::vector<std::size_t> dropped_clusters;   // ascending cluster ids
  std::vector<double> cluster_silhouette;      // s(C_k) at k_star
  std::map<std::size_t, double> silhouette_by_k;
};

struct KRange {
  std::size_t k_min;
  std::size_t k_max;
  friend bool operator==(const KRange&, const KRange&) = default;
};

/// k_min = max(floor(n_out * lambda), k_min_floor), k_max = n_out - 1, with
/// k_min clamped to k_max. Throws out_of_range if n_out < 2 and
/// invalid_argument for lambda outside (0, 1].
KRange k_range(std::size_t n_out, const ElectionConfig& config);

struct KSelection {
  std::size_t k_star;
  std::map<std::size_t, double> trace;  // K -> layer mean silhouette
};

/// Argmax of the layer mean silhouette over [k_min, k_max]; ties go to the
/// smallest K. One dendrogram is cut at every K.
KSelection select_k(const FilterMatrix& filters, const ElectionConfig& config);

/// Arithmetic mean of the cluster's members.
std::vector<double> cluster_centroid(const FilterMatrix& filters, const ClusterAssignment& assignment,
                                     std::size_t cluster);

/// Member nearest (Euclidean) to the cluster centroid; lowest index on ties.
std::size_t elect_representative(const FilterMatrix& filters, const ClusterAssignment& assignment,
                                 std::size_t cluster);

LayerElection elect_layer(const FilterMatrix& filters, const ElectionConfig& config);

}  // namespace fprune
