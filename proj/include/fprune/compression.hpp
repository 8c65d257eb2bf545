#pragma once

// Turning per-layer keep decisions into a channel-consistent plan, slicing
// weights by it, and counting FLOPs / parameters.
//
// FLOPs convention: one multiply-accumulate = 1 FLOP. Conv layers cost
// n_out * n_in * kernel_h * kernel_w * out_h * out_w, linear layers
// n_out * n_in. Parameters are conv/linear weights plus biases when a
// "<layer>.bias" tensor exists; normalization layers are not counted.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fprune/container.hpp"
#include "fprune/criteria.hpp"
#include "fprune/election.hpp"

namespace fprune {

struct LayerPlan {
  std::vector<std::size_t> kept_out;
  std::vector<std::size_t> kept_in;
  friend bool operator==(const LayerPlan&, const LayerPlan&) = default;
};

struct PruningPlan {
  // Every non-input layer of the snapshot has an entry.
  std::map<std::string, LayerPlan> per_layer;
  Criterion source;
  double lambda = 0.0;
};

/// What happens when several producers feed one add node (a residual stream).
enum class AddResolution {
  protect_identity,  // every producer on the stream keeps all filters
  union_of_kept,     // every producer keeps the union of their kept sets
  strict,            // kept sets must already agree, else Error(add_conflict)
};

std::string_view add_resolution_name(AddResolution r) noexcept;
AddResolution parse_add_resolution(std::string_view name);

/// nullopt means keep every filter of that conv layer.
using LayerKeep = std::optional<std::vector<std::size_t>>;

struct PlanOptions {
  AddResolution add_resolution = AddResolution::protect_identity;
  std::vector<std::string> protect;  // conv layers forced to keep all filters
};

/// Requires a decision for every conv layer (an entry in `keep`, possibly
/// nullopt, or a name in options.protect).
PruningPlan build_plan(const ModelSnapshot& snapshot, const std::map<std::string, LayerKeep>& keep,
                       const PlanOptions& options = {}, Criterion source = {}, double lambda = 0.0);

PruningPlan build_plan(const ModelSnapshot& snapshot, const std::map<std::string, LayerElection>& elections,
                       const PlanOptions& options = {}, double lambda = 0.0);

/// Plan that keeps every channel of every layer.
PruningPlan identity_plan(const ModelSnapshot& snapshot);

ModelSnapshot apply_plan(const ModelSnapshot& snapshot, const PruningPlan& plan);

struct LayerCost {
  std::string name;
  LayerKind kind = LayerKind::conv;
  std::uint64_t flops = 0;
  std::uint64_t params = 0;
  std::int64_t filters = 0;  // n_out
};

struct FlopsCount {
  std::vector<LayerCost> per_layer;  // conv and linear layers, in snapshot order
  std::uint64_t total_flops = 0;
  std::uint64_t total_params = 0;
};

FlopsCount count_flops(const ModelSnapshot& snapshot);

struct LayerCompression {
  std::string name;
  LayerKind kind = LayerKind::conv;
  std::uint64_t flops_before = 0, flops_after = 0;
  std::uint64_t params_before = 0, params_after = 0;
  std::int64_t filters_before = 0, filters_after = 0;
  double remaining_filter_ratio = 1.0;
};

struct CompressionReport {
  std::vector<LayerCompression> per_layer;
  std::uint64_t flops_before = 0, flops_after = 0;
  std::uint64_t params_before = 0, params_after = 0;
  double flops_reduction = 0.0;   // 1 - after / before
  double params_reduction = 0.0;
  double speedup = 1.0;           // flops_before / flops_after
};

/// Throws Error(topology_mismatch) unless both snapshots share layer names,
/// kinds, kernels and edges.
CompressionReport compression_report(const ModelSnapshot& before, const ModelSnapshot& after);

}  // namespace fprune
