#pragma once

// JSON and CSV forms of every report. Output is byte-stable: keys are emitted
// in a fixed order and floating-point values carry 9 significant digits.

#include <filesystem>
#include <map>
#include <nlohmann/json.hpp>
#include <string>

#include "fprune/analysis.hpp"
#include "fprune/compression.hpp"
#include "fprune/election.hpp"
#include "fprune/hierarchy.hpp"
#include "fprune/silhouette.hpp"

namespace fprune {

using Json = nlohmann::ordered_json;

/// x rounded to 9 significant digits (the value that "%.9g" prints).
double round9(double x);

Json to_json(const Dendrogram& d);
Json to_json(const SilhouetteReport& r);
Json to_json(const LayerElection& e);
Json to_json(const FlopsCount& f);
Json to_json(const CompressionReport& r);
Json to_json(const SimilarityReport& r);
Json to_json(const SweepTable& t);

/// The pruning decision record: plan per layer, plus the elections that
/// produced it when given.
Json plan_to_json(const PruningPlan& plan, const std::map<std::string, LayerElection>* elections = nullptr);
PruningPlan plan_from_json(const Json& j);
PruningPlan read_plan(const std::filesystem::path& path);

// CSV column schemas are listed in README.md.
std::string silhouette_csv(const SilhouetteReport& r, const ClusterAssignment& labels);
std::string compression_csv(const CompressionReport& r);
std::string similarity_csv(const SimilarityReport& r);
std::string sweep_csv(const SweepTable& t);

std::string dump(const Json& j);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace fprune
