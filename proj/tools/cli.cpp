#include "cli.hpp"

#include <CLI11.hpp>
#include <cstdio>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

#include "fprune/analysis.hpp"
#include "fprune/compression.hpp"
#include "fprune/container.hpp"
#include "fprune/error.hpp"
#include "fprune/pipeline.hpp"
#include "fprune/report_io.hpp"

namespace fprune::cli {
namespace {

// Raised for anything wrong with what the user handed us.
struct InputError : Error {
  using Error::Error;
};

ContainerFormat parse_format(const std::string& f) {
  if (f == "json") return ContainerFormat::json;
  if (f == "fpwt") return ContainerFormat::fpwt;
  throw InputError(Errc::invalid_argument, "unknown --format '" + f + "'");
}

ModelSnapshot load(const std::string& path, const std::string& format) {
  try {
    return load_snapshot(path, parse_format(format));
  } catch (const InputError&) {
    throw;
  } catch (const Error& e) {
    throw InputError(e.code(), e.what());
  }
}

PruningPlan load_plan(const std::string& path) {
  try {
    return read_plan(path);
  } catch (const Error& e) {
    throw InputError(e.code(), e.what());
  }
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string sci(std::uint64_t v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3E", static_cast<double>(v));
  return buf;
}

std::string pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f%%", 100.0 * v);
  return buf;
}

void check_lambda(double lambda) {
  if (!(lambda > 0.0 && lambda <= 1.0)) throw InputError(Errc::invalid_argument, "--lambda must lie in (0, 1]");
}

struct Common {
  std::string input;
  std::string format = "fpwt";
  std::size_t threads = 1;
};

int cmd_inspect(const Common& c, bool as_json, const std::string& layer, double lambda,
                const std::string& silhouette_csv_path, std::ostream& out) {
  const ModelSnapshot snap = load(c.input, c.format);
  if (!layer.empty()) {
    check_lambda(lambda);
    const FilterMatrix filters = filters_of(snap, layer);
    ElectionConfig cfg;
    cfg.lambda = lambda;
    cfg.threads = c.threads;
    const LayerElection e = elect_layer(filters, cfg);
    const SilhouetteReport sil = silhouette_report(filters, e.assignment);
    Json j = {{"layer", layer},
              {"n_filters", filters.rows()},
              {"dim", filters.dim()},
              {"dendrogram", to_json(agglomerate(filters, c.threads))},
              {"election", to_json(e)},
              {"silhouette", to_json(sil)}};
    out << dump(j);
    if (!silhouette_csv_path.empty()) write_text(silhouette_csv_path, silhouette_csv(sil, e.assignment));
    return kOk;
  }

  const FlopsCount fc = count_flops(snap);
  if (as_json) {
    Json layers = Json::array();
    for (const LayerSpec& l : snap.layers) {
      layers.push_back({{"name", l.name},
                        {"kind", std::string(layer_kind_name(l.kind))},
                        {"n_in", l.n_in},
                        {"n_out", l.n_out},
                        {"kernel", {l.kernel_h, l.kernel_w}},
                        {"out", {l.out_h, l.out_w}},
                        {"predecessors", l.predecessors}});
    }
    Json meta = Json::object();
    for (const auto& [k, v] : snap.metadata) meta[k] = v;
    out << dump({{"layer_count", snap.layers.size()},
                 {"tensor_count", snap.tensors.size()},
                 {"metadata", meta},
                 {"layers", layers},
                 {"cost", to_json(fc)}});
    return kOk;
  }

  out << snap.layers.size() << " layers, " << snap.tensors.size() << " tensors\n";
  if (!snap.layers.empty()) {
    out << std::left << std::setw(28) << "layer" << std::setw(10) << "kind" << std::right << std::setw(7) << "n_in"
        << std::setw(7) << "n_out" << std::setw(8) << "kernel" << std::setw(9) << "out" << std::setw(12) << "flops"
        << std::setw(12) << "params" << "\n";
    std::map<std::string, const LayerCost*> cost;
    for (const auto& lc : fc.per_layer) cost[lc.name] = &lc;
    for (const LayerSpec& l : snap.layers) {
      const auto it = cost.find(l.name);
      out << std::left << std::setw(28) << l.name << std::setw(10) << layer_kind_name(l.kind) << std::right
          << std::setw(7) << l.n_in << std::setw(7) << l.n_out << std::setw(8)
          << (l.kind == LayerKind::conv ? std::to_string(l.kernel_h) + "x" + std::to_string(l.kernel_w) : "-")
          << std::setw(9) << (l.out_h > 0 ? std::to_string(l.out_h) + "x" + std::to_string(l.out_w) : "-")
          << std::setw(12) << (it != cost.end() ? sci(it->second->flops) : "-") << std::setw(12)
          << (it != cost.end() ? sci(it->second->params) : "-") << "\n";
    }
  }
  out << "total FLOPs " << sci(fc.total_flops) << " (" << fc.total_flops << "), params " << sci(fc.total_params)
      << " (" << fc.total_params << ")\n";
  return kOk;
}

struct PruneArgs {
  std::string output;
  std::string criterion = "reprune";
  double lambda = 0.1;
  std::string protect;
  std::string plan_out;
  std::string report_out;
  std::string report_csv;
  std::string keep_from;
  std::string add_resolution = "protect";
  bool as_json = false;
};

int cmd_prune(const Common& c, const PruneArgs& a, std::ostream& out) {
  check_lambda(a.lambda);
  const ModelSnapshot snap = load(c.input, c.format);
  PruneOptions opts;
  try {
    opts.criterion.kind = parse_criterion(a.criterion);
    opts.plan.add_resolution = parse_add_resolution(a.add_resolution);
  } catch (const Error& e) {
    throw InputError(e.code(), e.what());
  }
  opts.election.lambda = a.lambda;
  opts.plan.protect = split_list(a.protect);
  opts.threads = c.threads;
  if (!a.keep_from.empty()) {
    if (opts.criterion.kind == CriterionKind::reprune) {
      throw InputError(Errc::invalid_argument, "--keep-from applies to baseline criteria only");
    }
    const PruningPlan prior = load_plan(a.keep_from);
    try {
      opts.keep_counts = keep_counts(snap, prior);
    } catch (const Error& e) {
      throw InputError(Errc::shape_mismatch, e.what());
    }
  }
  const PruneResult r = prune_model(snap, opts);

  const auto fmt = parse_format(c.format);
  save_snapshot(r.pruned, a.output, fmt);
  const std::string plan_path = a.plan_out.empty() ? a.output + ".plan.json" : a.plan_out;
  const std::string report_path = a.report_out.empty() ? a.output + ".report.json" : a.report_out;
  write_text(plan_path, dump(plan_to_json(r.plan, r.elections.empty() ? nullptr : &r.elections)));
  write_text(report_path, dump(to_json(r.report)));
  if (!a.report_csv.empty()) write_text(a.report_csv, compression_csv(r.report));

  if (a.as_json) {
    out << dump(to_json(r.report));
  } else {
    out << "criterion " << a.criterion << ", lambda " << a.lambda << "\n"
        << "FLOPs  " << sci(r.report.flops_before) << " -> " << sci(r.report.flops_after) << " ("
        << pct(r.report.flops_reduction) << " reduced, " << std::setprecision(3) << r.report.speedup << "x)\n"
        << "params " << sci(r.report.params_before) << " -> " << sci(r.report.params_after) << " ("
        << pct(r.report.params_reduction) << " reduced)\n"
        << "wrote " << a.output << ", " << plan_path << ", " << report_path << "\n";
  }
  return kOk;
}

struct CompareArgs {
  std::string before, after, plan, report_out, csv_out;
};

int cmd_compare(const Common& c, const CompareArgs& a, std::ostream& out) {
  const ModelSnapshot before = load(a.before, c.format);
  const ModelSnapshot after = load(a.after, c.format);
  const PruningPlan plan = a.plan.empty() ? identity_plan(before) : load_plan(a.plan);
  const ModelSnapshot pruned = [&] {
    try {
      return apply_plan(before, plan);
    } catch (const Error& e) {
      throw Error(Errc::shape_mismatch, std::string("plan does not fit --before: ") + e.what());
    }
  }();
  const SimilarityReport sim = similarity_report_aligned(pruned, after);
  const CompressionReport comp = compression_report(before, after);
  const std::string text = dump({{"similarity", to_json(sim)}, {"compression", to_json(comp)}});
  if (a.report_out.empty()) {
    out << text;
  } else {
    write_text(a.report_out, text);
    out << "cosine mean " << round9(sim.mean) << " over " << sim.total << " filters; in [-0.1,0.1]: "
        << pct(sim.fraction_near_zero) << ", in [0.2,0.6]: " << pct(sim.fraction_mid) << "\n";
  }
  if (!a.csv_out.empty()) write_text(a.csv_out, similarity_csv(sim));
  return kOk;
}

int cmd_sweep(const Common& c, const std::string& lambdas_arg, const std::string& output, const std::string& csv,
              const std::string& add_resolution, const std::string& protect, std::ostream& out) {
  std::vector<double> lambdas;
  for (const auto& s : split_list(lambdas_arg)) {
    try {
      lambdas.push_back(std::stod(s));
    } catch (const std::exception&) {
      throw InputError(Errc::invalid_argument, "bad lambda '" + s + "'");
    }
    check_lambda(lambdas.back());
  }
  if (lambdas.empty()) throw InputError(Errc::invalid_argument, "--lambdas needs at least one value");
  const ModelSnapshot snap = load(c.input, c.format);
  PlanOptions po;
  try {
    po.add_resolution = parse_add_resolution(add_resolution);
  } catch (const Error& e) {
    throw InputError(e.code(), e.what());
  }
  po.protect = split_list(protect);
  const SweepTable t = lambda_sweep(snap, lambdas, po, c.threads);
  const std::string text = dump(to_json(t));
  if (output.empty()) {
    out << text;
  } else {
    write_text(output, text);
    for (const auto& tot : t.totals) {
      out << "lambda " << tot.lambda << ": FLOPs " << pct(tot.flops_reduction) << " reduced, params "
          << pct(tot.params_reduction) << " reduced\n";
    }
  }
  if (!csv.empty()) write_text(csv, sweep_csv(t));
  return kOk;
}

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case Errc::shape_mismatch:
    case Errc::topology_mismatch:
    case Errc::length_mismatch:
      return kShapeMismatch;
    case Errc::io:
    case Errc::bad_magic:
    case Errc::version_mismatch:
    case Errc::truncated:
    case Errc::non_finite:
    case Errc::invalid_snapshot:
      return kBadInput;
    default:
      return kFailure;
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Filter pruning by representative election"};
  app.require_subcommand(1);
  Common common;
  auto add_common = [&](CLI::App* sub, bool with_input) {
    if (with_input) sub->add_option("--input", common.input, "Model container")->required();
    sub->add_option("--format", common.format, "Container format")->check(CLI::IsMember({"fpwt", "json"}));
    sub->add_option("--threads", common.threads, "Worker threads (0 = all cores)");
  };

  auto* inspect = app.add_subcommand("inspect", "Layer table with FLOPs and parameter totals");
  add_common(inspect, true);
  bool inspect_json = false;
  std::string inspect_layer, inspect_csv;
  double inspect_lambda = 0.1;
  inspect->add_flag("--json", inspect_json, "Machine-readable output");
  inspect->add_option("--layer", inspect_layer, "Show dendrogram, silhouettes and election for one conv layer");
  inspect->add_option("--lambda", inspect_lambda, "Minimum cluster rate for --layer");
  inspect->add_option("--silhouette-csv", inspect_csv, "Per-filter silhouette CSV for --layer");

  auto* prune = app.add_subcommand("prune", "Prune every conv layer and write the narrower model");
  add_common(prune, true);
  PruneArgs pa;
  prune->add_option("--output", pa.output, "Pruned container")->required();
  prune->add_option("--criterion", pa.criterion, "Selection criterion")
      ->check(CLI::IsMember({"reprune", "l1", "l2", "gm"}));
  prune->add_option("--lambda", pa.lambda, "Minimum cluster rate in (0, 1]");
  prune->add_option("--protect", pa.protect, "Comma-separated conv layers to keep whole");
  prune->add_option("--plan-out", pa.plan_out, "Plan JSON (default <output>.plan.json)");
  prune->add_option("--report-out", pa.report_out, "Compression report JSON (default <output>.report.json)");
  prune->add_option("--report-csv", pa.report_csv, "Compression report CSV");
  prune->add_option("--keep-from", pa.keep_from, "Baselines: copy per-layer keep counts from this plan");
  prune->add_option("--add-resolution", pa.add_resolution, "Residual stream rule")
      ->check(CLI::IsMember({"protect", "union", "strict"}));
  prune->add_flag("--json", pa.as_json, "Print the compression report as JSON");

  auto* compare = app.add_subcommand("compare", "Cosine similarity of kept filters before and after fine-tuning");
  add_common(compare, false);
  CompareArgs ca;
  compare->add_option("--before", ca.before, "Unpruned container")->required();
  compare->add_option("--after", ca.after, "Fine-tuned pruned container")->required();
  compare->add_option("--plan", ca.plan, "Plan JSON that produced --after (default: identity)");
  compare->add_option("--report-out", ca.report_out, "Write the JSON report here instead of stdout");
  compare->add_option("--csv", ca.csv_out, "Per-filter cosine CSV");

  auto* sweep = app.add_subcommand("sweep", "Remaining filters and FLOPs across lambda values");
  add_common(sweep, true);
  std::string sweep_lambdas = "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9", sweep_out, sweep_csv, sweep_res = "protect",
              sweep_protect;
  sweep->add_option("--lambdas", sweep_lambdas, "Comma-separated lambda values");
  sweep->add_option("--output", sweep_out, "Sweep JSON (default stdout)");
  sweep->add_option("--csv", sweep_csv, "Sweep CSV");
  sweep->add_option("--add-resolution", sweep_res, "Residual stream rule")
      ->check(CLI::IsMember({"protect", "union", "strict"}));
  sweep->add_option("--protect", sweep_protect, "Comma-separated conv layers to keep whole");

  std::vector<std::string> storage{"fprune"};
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : storage) argv.push_back(s.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "fprune: " << e.what() << "\n";
    return kBadInput;
  }

  try {
    if (inspect->parsed()) return cmd_inspect(common, inspect_json, inspect_layer, inspect_lambda, inspect_csv, out);
    if (prune->parsed()) return cmd_prune(common, pa, out);
    if (compare->parsed()) return cmd_compare(common, ca, out);
    if (sweep->parsed()) return cmd_sweep(common, sweep_lambdas, sweep_out, sweep_csv, sweep_res, sweep_protect, out);
  } catch (const InputError& e) {
    err << "fprune: " << e.what() << "\n";
    return e.code() == Errc::shape_mismatch ? kShapeMismatch : kBadInput;
  } catch (const Error& e) {
    err << "fprune: " << errc_name(e.code()) << ": " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    err << "fprune: " << e.what() << "\n";
    return kFailure;
  }
  return kFailure;
}

}  // namespace fprune::cli
