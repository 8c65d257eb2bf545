#include "fprune/pipeline.hpp"

#include <algorithm>
#include <set>
#include <vector>

#include "fprune/error.hpp"
#include "fprune/parallel.hpp"

namespace fprune {

std::map<std::string, LayerElection> elect_model(const ModelSnapshot& snapshot, const ElectionConfig& config,
                                                 const std::vector<std::string>& skip, std::size_t threads) {
  const std::set<std::string> skipped(skip.begin(), skip.end());
  std::vector<std::string> names;
  for (const LayerSpec& l : snapshot.layers) {
    if (l.kind == LayerKind::conv && l.n_out >= 2 && !skipped.contains(l.name)) names.push_back(l.name);
  }
  std::vector<LayerElection> results(names.size());
  ElectionConfig inner = config;
  inner.threads = 1;
  parallel_for(names.size(), threads, [&](std::size_t i) {
    results[i] = elect_layer(filters_of(snapshot, names[i]), inner);
  });
  std::map<std::string, LayerElection> out;
  for (std::size_t i = 0; i < names.size(); ++i) out.emplace(names[i], std::move(results[i]));
  return out;
}

std::map<std::string, std::size_t> keep_counts(const ModelSnapshot& snapshot, const PruningPlan& plan) {
  std::map<std::string, std::size_t> out;
  for (const auto& name : snapshot.conv_layers()) {
    auto it = plan.per_layer.find(name);
    if (it == plan.per_layer.end()) throw Error(Errc::unknown_layer, "plan has no entry for conv layer '" + name + "'");
    out[name] = it->second.kept_out.size();
  }
  return out;
}

PruneResult prune_model(const ModelSnapshot& snapshot, const PruneOptions& options) {
  validate(snapshot);
  PruneResult r;
  std::map<std::string, LayerKeep> keep;
  for (const auto& name : snapshot.conv_layers()) keep[name] = std::nullopt;

  if (options.criterion.kind == CriterionKind::reprune) {
    r.elections = elect_model(snapshot, options.election, options.plan.protect, options.threads);
    for (const auto& [name, e] : r.elections) keep[name] = e.kept;
  } else {
    std::map<std::string, std::size_t> counts;
    if (options.keep_counts) {
      counts = *options.keep_counts;
    } else {
      r.elections = elect_model(snapshot, options.election, options.plan.protect, options.threads);
      std::map<std::string, LayerKeep> elected = keep;
      for (const auto& [name, e] : r.elections) elected[name] = e.kept;
      counts = keep_counts(snapshot, build_plan(snapshot, elected, options.plan));
    }
    std::vector<std::string> names;
    for (const auto& [name, count] : counts) {
      const LayerSpec* l = snapshot.find_layer(name);
      if (l == nullptr || l->kind != LayerKind::conv) {
        throw Error(Errc::unknown_layer, "keep count given for unknown conv layer '" + name + "'");
      }
      if (static_cast<std::int64_t>(count) < l->n_out) names.push_back(name);
    }
    std::vector<std::vector<std::size_t>> picks(names.size());
    parallel_for(names.size(), options.threads, [&](std::size_t i) {
      picks[i] = select_by_criterion(filters_of(snapshot, names[i]), options.criterion, counts.at(names[i]));
    });
    for (std::size_t i = 0; i < names.size(); ++i) keep[names[i]] = std::move(picks[i]);
  }

  r.plan = build_plan(snapshot, keep, options.plan, options.criterion, options.election.lambda);
  r.pruned = apply_plan(snapshot, r.plan);
  r.report = compression_report(snapshot, r.pruned);
  return r;
}

}  // namespace fprune
