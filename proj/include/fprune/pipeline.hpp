#pragma once

// Whole-model pruning: election (or a baseline criterion at matched keep
// counts), channel resolution, weight slicing and accounting.

#include <cstddef>
#include <map>
#include <optional>
#include <string>

#include "fprune/compression.hpp"
#include "fprune/election.hpp"

namespace fprune {

/// Elects every conv layer with at least two filters, skipping `skip`.
/// Layers run on up to `threads` workers; the result is identical for any
/// worker count.
std::map<std::string, LayerElection> elect_model(const ModelSnapshot& snapshot, const ElectionConfig& config,
                                                 const std::vector<std::string>& skip = {},
                                                 std::size_t threads = 1);

/// |kept_out| of every conv layer in the plan.
std::map<std::string, std::size_t> keep_counts(const ModelSnapshot& snapshot, const PruningPlan& plan);

struct PruneOptions {
  Criterion criterion;
  ElectionConfig election;
  PlanOptions plan;
  // Baselines only: per-layer keep counts. When absent they are taken from a
  // representative-election plan built with the same lambda.
  std::optional<std::map<std::string, std::size_t>> keep_counts;
  std::size_t threads = 1;
};

struct PruneResult {
  std::map<std::string, LayerElection> elections;  // empty for baselines given explicit counts
  PruningPlan plan;
  ModelSnapshot pruned;
  CompressionReport report;
};

PruneResult prune_model(const ModelSnapshot& snapshot, const PruneOptions& options);

}  // namespace fprune
