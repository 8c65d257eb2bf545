#pragma once

// Post-fine-tuning diagnostics and lambda sweeps.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "fprune/compression.hpp"
#include "fprune/container.hpp"
#include "fprune/pipeline.hpp"

namespace fprune {

struct Cosine {
  double value = 0.0;
  bool zero_norm = false;  // one side had zero norm; value is then 0
};

/// dot / (|before| |after|). Throws Error(length_mismatch) on differing sizes.
Cosine cosine_similarity(std::span<const float> before, std::span<const float> after);

struct LayerSimilarity {
  std::string name;
  std::vector<double> cosines;  // one per kept filter, plan order
  double mean = 0.0;
};

struct SimilarityReport {
  static constexpr std::size_t kBins = 20;  // width 0.1 over [-1, 1]

  std::vector<LayerSimilarity> per_layer;
  std::vector<std::size_t> histogram = std::vector<std::size_t>(kBins, 0);
  std::size_t total = 0;
  std::size_t zero_norm = 0;
  double mean = 0.0;
  double fraction_near_zero = 0.0;  // cosine in [-0.1, 0.1]
  double fraction_mid = 0.0;        // cosine in [0.2, 0.6]

  /// Fraction of all filters with lo <= cosine <= hi.
  double fraction_in(double lo, double hi) const;
};

/// Histogram bin of a cosine value: [-1 + 0.1 i, -1 + 0.1 (i + 1)), with 1.0
/// in the last bin.
std::size_t histogram_bin(double cosine);

/// Compares two snapshots with identical conv shapes filter by filter.
SimilarityReport similarity_report_aligned(const ModelSnapshot& a, const ModelSnapshot& b);

/// `after` is a fine-tuned copy of apply_plan(before, plan); filters
/// correspond by position. Throws Error(shape_mismatch) otherwise.
SimilarityReport similarity_report(const ModelSnapshot& before, const ModelSnapshot& after, const PruningPlan& plan);

struct SweepRow {
  double lambda = 0.0;
  std::string layer;
  std::int64_t n_out = 0;
  std::size_t k_star = 0;
  std::size_t elected = 0;           // representatives chosen for the layer
  std::size_t dropped_clusters = 0;
  std::size_t kept = 0;              // filters kept after channel resolution
  double remaining_ratio = 1.0;
};

struct SweepTotal {
  double lambda = 0.0;
  std::uint64_t flops_before = 0, flops_after = 0;
  std::uint64_t params_before = 0, params_after = 0;
  double flops_reduction = 0.0;
  double params_reduction = 0.0;
  double speedup = 1.0;
};

struct SweepTable {
  std::vector<SweepRow> rows;      // |lambdas| x conv layers
  std::vector<SweepTotal> totals;  // one per lambda
};

SweepTable lambda_sweep(const ModelSnapshot& snapshot, const std::vector<double>& lambdas,
                        const PlanOptions& plan_options = {}, std::size_t threads = 1);

}  // namespace fprune
