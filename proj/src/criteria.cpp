#include "fprune/criteria.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fprune/error.hpp"
#include "fprune/kernels.hpp"

namespace fprune {
namespace {

constexpr double kCoincident = 1e-12;

double param_or(const Criterion& c, const std::string& key, double fallback) {
  auto it = c.params.find(key);
  return it == c.params.end() ? fallback : it->second;
}

}  // namespace

std::string_view criterion_name(CriterionKind kind) noexcept {
  switch (kind) {
    case CriterionKind::reprune: return "reprune";
    case CriterionKind::l1: return "l1";
    case CriterionKind::l2: return "l2";
    case CriterionKind::geometric_median: return "gm";
  }
  return "unknown";
}

CriterionKind parse_criterion(std::string_view name) {
  for (auto k : {CriterionKind::reprune, CriterionKind::l1, CriterionKind::l2, CriterionKind::geometric_median}) {
    if (criterion_name(k) == name) return k;
  }
  throw Error(Errc::invalid_argument, "unknown criterion '" + std::string(name) + "'");
}

std::vector<double> norm_scores(const FilterMatrix& filters, int p) {
  if (p != 1 && p != 2) throw Error(Errc::invalid_argument, "norm_scores: p must be 1 or 2");
  const auto& k = kernels::active();
  std::vector<double> out(filters.rows());
  for (std::size_t j = 0; j < filters.rows(); ++j) {
    out[j] = p == 1 ? k.l1_norm(filters.row_ptr(j), filters.dim())
                    : std::sqrt(k.sq_norm(filters.row_ptr(j), filters.dim()));
  }
  return out;
}

double median_objective(const FilterMatrix& filters, const std::vector<double>& point) {
  const auto& k = kernels::active();
  double total = 0.0;
  for (std::size_t j = 0; j < filters.rows(); ++j) {
    total += std::sqrt(k.sq_l2_mixed(filters.row_ptr(j), point.data(), filters.dim()));
  }
  return total;
}

GeometricMedian geometric_median(const FilterMatrix& filters, double tol, std::size_t max_iter) {
  const auto& k = kernels::active();
  const std::size_t n = filters.rows();
  const std::size_t dim = filters.dim();

  GeometricMedian gm;
  gm.point.assign(dim, 0.0);
  for (std::size_t j = 0; j < n; ++j) k.accumulate(gm.point.data(), filters.row_ptr(j), dim);
  for (double& v : gm.point) v /= static_cast<double>(n);
  gm.objective_trace.push_back(median_objective(filters, gm.point));

  std::vector<double> dist(n);
  std::vector<double> next(dim);
  while (gm.iterations < max_iter) {
    for (std::size_t j = 0; j < n; ++j) {
      dist[j] = std::sqrt(k.sq_l2_mixed(filters.row_ptr(j), gm.point.data(), dim));
      if (dist[j] < kCoincident) {
        gm.point.assign(filters.row(j).begin(), filters.row(j).end());
        gm.converged = true;
        gm.objective_trace.push_back(median_objective(filters, gm.point));
        return gm;
      }
    }
    std::fill(next.begin(), next.end(), 0.0);
    double weight = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double w = 1.0 / dist[j];
      const float* row = filters.row_ptr(j);
      for (std::size_t d = 0; d < dim; ++d) next[d] += w * static_cast<double>(row[d]);
      weight += w;
    }
    double step = 0.0;
    for (std::size_t d = 0; d < dim; ++d) {
      next[d] /= weight;
      const double delta = next[d] - gm.point[d];
      step += delta * delta;
    }
    gm.point.swap(next);
    ++gm.iterations;
    gm.objective_trace.push_back(median_objective(filters, gm.point));
    if (std::sqrt(step) < tol) {
      gm.converged = true;
      break;
    }
  }
  return gm;
}

std::vector<std::size_t> select_by_criterion(const FilterMatrix& filters, const Criterion& criterion,
                                             std::size_t keep) {
  const std::size_t n = filters.rows();
  if (keep < 1 || keep > n) {
    throw Error(Errc::out_of_range, "keep=" + std::to_string(keep) + " outside [1, " + std::to_string(n) + "]");
  }
  std::vector<double> score;
  switch (criterion.kind) {
    case CriterionKind::l1: score = norm_scores(filters, 1); break;
    case CriterionKind::l2: score = norm_scores(filters, 2); break;
    case CriterionKind::geometric_median: {
      const auto max_iter = static_cast<std::size_t>(
          param_or(criterion, "max_iter", static_cast<double>(kDefaultWeiszfeldMaxIter)));
      // A non-converged iterate is still a usable centre for ranking.
      const GeometricMedian gm = geometric_median(filters, param_or(criterion, "tol", kDefaultWeiszfeldTol), max_iter);
      const auto& k = kernels::active();
      score.resize(n);
      for (std::size_t j = 0; j < n; ++j) {
        score[j] = std::sqrt(k.sq_l2_mixed(filters.row_ptr(j), gm.point.data(), filters.dim()));
      }
      break;
    }
    case CriterionKind::reprune:
      throw Error(Errc::invalid_argument, "select_by_criterion: reprune selection goes through elect_layer");
  }
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return score[a] > score[b]; });
  idx.resize(keep);
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace fprune
