#pragma once

// Silhouette Coefficient of a clustering, on unsquared Euclidean distances.

#include <cstddef>
#include <vector>

#include "fprune/filter_matrix.hpp"
#include "fprune/hierarchy.hpp"

namespace fprune {

struct SilhouetteReport {
  std::vector<double> per_filter;
  std::vector<double> per_cluster;
  double layer_mean = 0.0;
  std::size_t k = 0;
};

/// Mean distance from filter j to the other members of its cluster.
/// Throws Error(singleton_cluster) if j is alone.
double cohesion(const FilterMatrix& filters, const ClusterAssignment& labels, std::size_t j);

/// Smallest mean distance from filter j to the members of any other cluster.
/// Throws Error(single_cluster) when k < 2.
double separation(const FilterMatrix& filters, const ClusterAssignment& labels, std::size_t j);

/// (b - a) / max(a, b); 0 for singleton clusters and when a = b = 0.
double silhouette_filter(double a, double b, std::size_t cluster_size);

SilhouetteReport silhouette_report(const FilterMatrix& filters, const ClusterAssignment& labels);

/// Report from precomputed Euclidean distances; used by the K search so the
/// distance matrix is built once per layer. k = 1 yields an all-zero report.
SilhouetteReport silhouette_report(const SquareMatrix& distances, const ClusterAssignment& labels);

}  // namespace fprune
