#include "fprune/election.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "fprune/error.hpp"
#include "fprune/kernels.hpp"

namespace fprune {
namespace {

void check_lambda(double lambda) {
  if (!(lambda > 0.0 && lambda <= 1.0)) {
    throw Error(Errc::invalid_argument, "lambda must lie in (0, 1], got " + std::to_string(lambda));
  }
}

void check_cluster(const FilterMatrix& filters, const ClusterAssignment& assignment, std::size_t cluster) {
  if (assignment.labels.size() != filters.rows()) {
    throw Error(Errc::length_mismatch, "cluster labels do not cover every filter");
  }
  if (cluster >= assignment.k) {
    throw Error(Errc::out_of_range, "unknown cluster id " + std::to_string(cluster));
  }
}

struct Searched {
  KSelection selection;
  Dendrogram dendrogram;
  SquareMatrix distances;
};

Searched search(const FilterMatrix& filters, const ElectionConfig& config) {
  const KRange range = k_range(filters.rows(), config);
  SquareMatrix sq = pairwise_sq_distances(filters, config.threads);
  Searched s{{0, {}}, agglomerate(sq), {}};
  for (std::size_t i = 0; i < sq.size(); ++i) {
    for (std::size_t j = 0; j < sq.size(); ++j) sq(i, j) = std::sqrt(sq(i, j));
  }
  s.distances = std::move(sq);

  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t k = range.k_min; k <= range.k_max; ++k) {
    const double mean = silhouette_report(s.distances, cut(s.dendrogram, k)).layer_mean;
    s.selection.trace[k] = mean;
    if (mean > best) {
      best = mean;
      s.selection.k_star = k;
    }
  }
  return s;
}

}  // namespace

KRange k_range(std::size_t n_out, const ElectionConfig& config) {
  check_lambda(config.lambda);
  if (n_out < 2) {
    throw Error(Errc::out_of_range, "k_range: a layer needs at least 2 filters, got " + std::to_string(n_out));
  }
  // The epsilon keeps decimal products such as 100 * 0.29 from flooring one low.
  const auto scaled = static_cast<std::size_t>(std::floor(static_cast<double>(n_out) * config.lambda + 1e-9));
  const std::size_t k_max = n_out - 1;
  const std::size_t k_min = std::min(std::max(scaled, config.k_min_floor), k_max);
  return {k_min, k_max};
}

KSelection select_k(const FilterMatrix& filters, const ElectionConfig& config) {
  return search(filters, config).selection;
}

std::vector<double> cluster_centroid(const FilterMatrix& filters, const ClusterAssignment& assignment,
                                     std::size_t cluster) {
  check_cluster(filters, assignment, cluster);
  const auto& k = kernels::active();
  std::vector<double> sum(filters.dim(), 0.0);
  std::size_t count = 0;
  for (std::size_t j = 0; j < filters.rows(); ++j) {
    if (assignment.labels[j] == cluster) {
      k.accumulate(sum.data(), filters.row_ptr(j), filters.dim());
      ++count;
    }
  }
  if (count == 0) throw Error(Errc::out_of_range, "cluster " + std::to_string(cluster) + " is empty");
  for (double& v : sum) v /= static_cast<double>(count);
  return sum;
}

std::size_t elect_representative(const FilterMatrix& filters, const ClusterAssignment& assignment,
                                 std::size_t cluster) {
  const std::vector<double> centroid = cluster_centroid(filters, assignment, cluster);
  const auto& k = kernels::active();
  std::size_t best = filters.rows();
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < filters.rows(); ++j) {
    if (assignment.labels[j] != cluster) continue;
    const double d = k.sq_l2_mixed(filters.row_ptr(j), centroid.data(), filters.dim());
    if (d < best_d) {
      best_d = d;
      best = j;
    }
  }
  return best;
}

LayerElection elect_layer(const FilterMatrix& filters, const ElectionConfig& config) {
  Searched s = search(filters, config);
  LayerElection e;
  e.k_star = s.selection.k_star;
  e.silhouette_by_k = std::move(s.selection.trace);
  e.assignment = cut(s.dendrogram, e.k_star);
  e.cluster_silhouette = silhouette_report(s.distances, e.assignment).per_cluster;

  std::vector<std::size_t> surviving;
  for (std::size_t c = 0; c < e.k_star; ++c) {
    if (e.cluster_silhouette[c] < 0.0) {
      e.dropped_clusters.push_back(c);
    } else {
      surviving.push_back(c);
    }
  }
  if (surviving.empty()) {
    // A layer must keep at least one filter: retain the best-scoring cluster.
    const auto best = std::max_element(e.cluster_silhouette.begin(), e.cluster_silhouette.end());
    const auto c = static_cast<std::size_t>(best - e.cluster_silhouette.begin());
    surviving.push_back(c);
    std::erase(e.dropped_clusters, c);
  }

  std::vector<std::pair<std::size_t, std::size_t>> picks;
  for (std::size_t c : surviving) picks.emplace_back(elect_representative(filters, e.assignment, c), c);
  std::sort(picks.begin(), picks.end());
  for (const auto& [j, c] : picks) {
    e.kept.push_back(j);
    e.kept_cluster.push_back(c);
  }
  return e;
}

}  // namespace fprune
