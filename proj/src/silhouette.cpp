#include "fprune/silhouette.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fprune/error.hpp"
#include "fprune/kernels.hpp"

namespace fprune {
namespace {

void check_labels(std::size_t n, const ClusterAssignment& labels) {
  if (labels.labels.size() != n) {
    throw Error(Errc::length_mismatch, "cluster labels do not cover every filter");
  }
  for (std::size_t l : labels.labels) {
    if (l >= labels.k) throw Error(Errc::out_of_range, "cluster label exceeds k");
  }
}

// Sum of distances from j to every member of each cluster.
template <typename Dist>
std::vector<double> cluster_sums(std::size_t n, const ClusterAssignment& labels, std::size_t j, Dist dist) {
  std::vector<double> sums(labels.k, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (i != j) sums[labels.labels[i]] += dist(j, i);
  }
  return sums;
}

double euclid(const FilterMatrix& f, std::size_t i, std::size_t j) {
  return std::sqrt(kernels::active().sq_l2(f.row_ptr(i), f.row_ptr(j), f.dim()));
}

}  // namespace

double cohesion(const FilterMatrix& filters, const ClusterAssignment& labels, std::size_t j) {
  check_labels(filters.rows(), labels);
  if (j >= filters.rows()) throw Error(Errc::out_of_range, "cohesion: filter index out of range");
  const std::size_t own = labels.labels[j];
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < filters.rows(); ++i) {
    if (i != j && labels.labels[i] == own) {
      sum += euclid(filters, j, i);
      ++count;
    }
  }
  if (count == 0) throw Error(Errc::singleton_cluster, "cohesion undefined: filter is alone in its cluster");
  return sum / static_cast<double>(count);
}

double separation(const FilterMatrix& filters, const ClusterAssignment& labels, std::size_t j) {
  check_labels(filters.rows(), labels);
  if (j >= filters.rows()) throw Error(Errc::out_of_range, "separation: filter index out of range");
  if (labels.k < 2) throw Error(Errc::single_cluster, "separation undefined with a single cluster");
  const auto sums = cluster_sums(filters.rows(), labels, j,
                                 [&](std::size_t a, std::size_t b) { return euclid(filters, a, b); });
  const auto sizes = labels.sizes();
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < labels.k; ++c) {
    if (c == labels.labels[j]) continue;
    best = std::min(best, sums[c] / static_cast<double>(sizes[c]));
  }
  return best;
}

double silhouette_filter(double a, double b, std::size_t cluster_size) {
  if (cluster_size <= 1) return 0.0;
  const double denom = std::max(a, b);
  if (denom == 0.0) return 0.0;
  return (b - a) / denom;
}

SilhouetteReport silhouette_report(const SquareMatrix& distances, const ClusterAssignment& labels) {
  const std::size_t n = distances.size();
  check_labels(n, labels);
  SilhouetteReport r;
  r.k = labels.k;
  r.per_filter.assign(n, 0.0);
  r.per_cluster.assign(labels.k, 0.0);
  if (labels.k >= 2) {
    const auto sizes = labels.sizes();
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t own = labels.labels[j];
      if (sizes[own] <= 1) continue;
      const auto sums = cluster_sums(n, labels, j, [&](std::size_t a, std::size_t b) { return distances(a, b); });
      const double a = sums[own] / static_cast<double>(sizes[own] - 1);
      double b = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < labels.k; ++c) {
        if (c != own) b = std::min(b, sums[c] / static_cast<double>(sizes[c]));
      }
      r.per_filter[j] = silhouette_filter(a, b, sizes[own]);
    }
    for (std::size_t j = 0; j < n; ++j) r.per_cluster[labels.labels[j]] += r.per_filter[j];
    for (std::size_t c = 0; c < labels.k; ++c) r.per_cluster[c] /= static_cast<double>(sizes[c]);
  }
  double total = 0.0;
  for (double s : r.per_filter) total += s;
  r.layer_mean = n == 0 ? 0.0 : total / static_cast<double>(n);
  return r;
}

SilhouetteReport silhouette_report(const FilterMatrix& filters, const ClusterAssignment& labels) {
  return silhouette_report(pairwise_distances(filters), labels);
}

}  // namespace fprune
