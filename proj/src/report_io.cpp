#include "fprune/report_io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "fprune/error.hpp"

namespace fprune {
namespace {

std::string fmt9(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return buf;
}

Json index_list(const std::vector<std::size_t>& v) {
  Json a = Json::array();
  for (std::size_t x : v) a.push_back(x);
  return a;
}

Json real_list(const std::vector<double>& v) {
  Json a = Json::array();
  for (double x : v) a.push_back(round9(x));
  return a;
}

}  // namespace

double round9(double x) { return std::strtod(fmt9(x).c_str(), nullptr); }

Json to_json(const Dendrogram& d) {
  Json j;
  j["n_leaves"] = d.n_leaves;
  j["merges"] = Json::array();
  for (const Merge& m : d.merges) {
    j["merges"].push_back({{"left", m.left}, {"right", m.right}, {"cost", round9(m.cost)}, {"size", m.size}});
  }
  return j;
}

Json to_json(const SilhouetteReport& r) {
  return {{"k", r.k},
          {"layer_mean", round9(r.layer_mean)},
          {"per_cluster", real_list(r.per_cluster)},
          {"per_filter", real_list(r.per_filter)}};
}

Json to_json(const LayerElection& e) {
  Json by_k = Json::object();
  for (const auto& [k, v] : e.silhouette_by_k) by_k[std::to_string(k)] = round9(v);
  return {{"k_star", e.k_star},
          {"kept", index_list(e.kept)},
          {"kept_cluster", index_list(e.kept_cluster)},
          {"dropped_clusters", index_list(e.dropped_clusters)},
          {"cluster_silhouette", real_list(e.cluster_silhouette)},
          {"labels", index_list(e.assignment.labels)},
          {"silhouette_by_k", by_k}};
}

Json to_json(const FlopsCount& f) {
  Json layers = Json::array();
  for (const LayerCost& c : f.per_layer) {
    layers.push_back({{"name", c.name},
                      {"kind", std::string(layer_kind_name(c.kind))},
                      {"filters", c.filters},
                      {"flops", c.flops},
                      {"params", c.params}});
  }
  return {{"total_flops", f.total_flops}, {"total_params", f.total_params}, {"layers", layers}};
}

Json to_json(const CompressionReport& r) {
  Json layers = Json::array();
  for (const LayerCompression& c : r.per_layer) {
    layers.push_back({{"name", c.name},
                      {"kind", std::string(layer_kind_name(c.kind))},
                      {"filters_before", c.filters_before},
                      {"filters_after", c.filters_after},
                      {"remaining_filter_ratio", round9(c.remaining_filter_ratio)},
                      {"flops_before", c.flops_before},
                      {"flops_after", c.flops_after},
                      {"params_before", c.params_before},
                      {"params_after", c.params_after}});
  }
  return {{"flops_before", r.flops_before},
          {"flops_after", r.flops_after},
          {"flops_reduction", round9(r.flops_reduction)},
          {"params_before", r.params_before},
          {"params_after", r.params_after},
          {"params_reduction", round9(r.params_reduction)},
          {"speedup", round9(r.speedup)},
          {"layers", layers}};
}

Json to_json(const SimilarityReport& r) {
  Json layers = Json::array();
  for (const auto& l : r.per_layer) {
    layers.push_back({{"name", l.name}, {"mean", round9(l.mean)}, {"cosines", real_list(l.cosines)}});
  }
  Json hist = Json::array();
  for (std::size_t i = 0; i < r.histogram.size(); ++i) {
    const double lo = -1.0 + 0.1 * static_cast<double>(i);
    hist.push_back({{"lo", round9(lo)}, {"hi", round9(lo + 0.1)}, {"count", r.histogram[i]}});
  }
  return {{"total", r.total},
          {"mean", round9(r.mean)},
          {"zero_norm", r.zero_norm},
          {"fraction_near_zero", round9(r.fraction_near_zero)},
          {"fraction_mid", round9(r.fraction_mid)},
          {"histogram", hist},
          {"layers", layers}};
}

Json to_json(const SweepTable& t) {
  Json rows = Json::array();
  for (const SweepRow& r : t.rows) {
    rows.push_back({{"lambda", round9(r.lambda)},
                    {"layer", r.layer},
                    {"n_out", r.n_out},
                    {"k_star", r.k_star},
                    {"elected", r.elected},
                    {"dropped_clusters", r.dropped_clusters},
                    {"kept", r.kept},
                    {"remaining_ratio", round9(r.remaining_ratio)}});
  }
  Json totals = Json::array();
  for (const SweepTotal& s : t.totals) {
    totals.push_back({{"lambda", round9(s.lambda)},
                      {"flops_before", s.flops_before},
                      {"flops_after", s.flops_after},
                      {"flops_reduction", round9(s.flops_reduction)},
                      {"params_before", s.params_before},
                      {"params_after", s.params_after},
                      {"params_reduction", round9(s.params_reduction)},
                      {"speedup", round9(s.speedup)}});
  }
  return {{"rows", rows}, {"totals", totals}};
}

Json plan_to_json(const PruningPlan& plan, const std::map<std::string, LayerElection>* elections) {
  Json params = Json::object();
  for (const auto& [k, v] : plan.source.params) params[k] = round9(v);
  Json layers = Json::object();
  for (const auto& [name, lp] : plan.per_layer) {
    layers[name] = {{"kept_out", index_list(lp.kept_out)}, {"kept_in", index_list(lp.kept_in)}};
  }
  Json j = {{"criterion", std::string(criterion_name(plan.source.kind))},
            {"criterion_params", params},
            {"lambda", round9(plan.lambda)},
            {"layers", layers}};
  if (elections != nullptr) {
    Json e = Json::object();
    for (const auto& [name, el] : *elections) e[name] = to_json(el);
    j["elections"] = e;
  }
  return j;
}

PruningPlan plan_from_json(const Json& j) {
  PruningPlan plan;
  try {
    plan.source.kind = parse_criterion(j.at("criterion").get<std::string>());
    if (j.contains("criterion_params")) {
      for (const auto& [k, v] : j.at("criterion_params").items()) plan.source.params[k] = v.get<double>();
    }
    plan.lambda = j.value("lambda", 0.0);
    for (const auto& [name, lp] : j.at("layers").items()) {
      plan.per_layer[name] = {lp.at("kept_out").get<std::vector<std::size_t>>(),
                              lp.at("kept_in").get<std::vector<std::size_t>>()};
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::invalid_argument, std::string("malformed plan JSON: ") + e.what());
  }
  return plan;
}

PruningPlan read_plan(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot open plan '" + path.string() + "'");
  try {
    return plan_from_json(Json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::invalid_argument, "'" + path.string() + "': " + e.what());
  }
}

std::string silhouette_csv(const SilhouetteReport& r, const ClusterAssignment& labels) {
  std::ostringstream os;
  os << "filter,cluster,silhouette,cluster_silhouette\n";
  for (std::size_t j = 0; j < r.per_filter.size(); ++j) {
    const std::size_t c = labels.labels.at(j);
    os << j << ',' << c << ',' << fmt9(r.per_filter[j]) << ',' << fmt9(r.per_cluster.at(c)) << '\n';
  }
  return os.str();
}

std::string compression_csv(const CompressionReport& r) {
  std::ostringstream os;
  os << "layer,kind,filters_before,filters_after,remaining_filter_ratio,flops_before,flops_after,params_before,"
        "params_after\n";
  for (const auto& c : r.per_layer) {
    os << c.name << ',' << layer_kind_name(c.kind) << ',' << c.filters_before << ',' << c.filters_after << ','
       << fmt9(c.remaining_filter_ratio) << ',' << c.flops_before << ',' << c.flops_after << ',' << c.params_before
       << ',' << c.params_after << '\n';
  }
  return os.str();
}

std::string similarity_csv(const SimilarityReport& r) {
  std::ostringstream os;
  os << "layer,filter,cosine\n";
  for (const auto& l : r.per_layer) {
    for (std::size_t j = 0; j < l.cosines.size(); ++j) os << l.name << ',' << j << ',' << fmt9(l.cosines[j]) << '\n';
  }
  return os.str();
}

std::string sweep_csv(const SweepTable& t) {
  std::ostringstream os;
  os << "lambda,layer,n_out,k_star,elected,dropped_clusters,kept,remaining_ratio\n";
  for (const auto& r : t.rows) {
    os << fmt9(r.lambda) << ',' << r.layer << ',' << r.n_out << ',' << r.k_star << ',' << r.elected << ','
       << r.dropped_clusters << ',' << r.kept << ',' << fmt9(r.remaining_ratio) << '\n';
  }
  return os.str();
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::io, "cannot open '" + path.string() + "' for writing");
  out << text;
  out.flush();
  if (!out) throw Error(Errc::io, "write failure on '" + path.string() + "'");
}

}  // namespace fprune
