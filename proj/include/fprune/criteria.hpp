#pragma once

// Magnitude-style baselines: l1 / l2 filter norms and distance from the
// geometric median, each keeping a prescribed number of filters.

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "fprune/filter_matrix.hpp"

namespace fprune {

enum class CriterionKind { reprune, l1, l2, geometric_median };

std::string_view criterion_name(CriterionKind kind) noexcept;  // "reprune", "l1", "l2", "gm"
CriterionKind parse_criterion(std::string_view name);

struct Criterion {
  CriterionKind kind = CriterionKind::reprune;
  // Recognised keys: "tol", "max_iter" (geometric median only).
  std::map<std::string, double> params;
};

/// score[j] = ||F_j||_p for p in {1, 2}.
std::vector<double> norm_scores(const FilterMatrix& filters, int p);

struct GeometricMedian {
  std::vector<double> point;
  std::size_t iterations = 0;
  bool converged = false;
  /// Sum of distances from `point` to every filter after each iteration
  /// (index 0 is the starting centroid).
  std::vector<double> objective_trace;
};

inline constexpr double kDefaultWeiszfeldTol = 1e-8;
inline constexpr std::size_t kDefaultWeiszfeldMaxIter = 1000;

/// Weiszfeld iteration from the centroid until the step norm drops below
/// `tol`. If an iterate lands on a filter (distance < 1e-12) that filter is
/// returned. When max_iter is exhausted the last iterate comes back with
/// converged = false.
GeometricMedian geometric_median(const FilterMatrix& filters, double tol = kDefaultWeiszfeldTol,
                                 std::size_t max_iter = kDefaultWeiszfeldMaxIter);

/// Sum of Euclidean distances from `point` to every filter.
double median_objective(const FilterMatrix& filters, const std::vector<double>& point);

/// Indices of the `keep` highest-scoring filters (largest norm, or farthest
/// from the geometric median), ties to the lowest index, returned ascending.
/// Throws out_of_range unless 1 <= keep <= rows and invalid_argument for
/// CriterionKind::reprune, which goes through elect_layer instead.
std::vector<std::size_t> select_by_criterion(const FilterMatrix& filters, const Criterion& criterion,
                                             std::size_t keep);

}  // namespace fprune
