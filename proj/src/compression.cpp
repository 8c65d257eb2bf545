#include "fprune/compression.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "fprune/error.hpp"

namespace fprune {
namespace {

std::vector<std::size_t> all_of(std::int64_t n) {
  std::vector<std::size_t> v(static_cast<std::size_t>(std::max<std::int64_t>(n, 0)));
  std::iota(v.begin(), v.end(), 0);
  return v;
}

std::vector<std::size_t> checked_keep(const std::string& layer, std::vector<std::size_t> kept, std::int64_t n_out) {
  std::sort(kept.begin(), kept.end());
  kept.erase(std::unique(kept.begin(), kept.end()), kept.end());
  if (kept.empty()) throw Error(Errc::invalid_argument, "layer '" + layer + "': empty keep set");
  if (kept.back() >= static_cast<std::size_t>(n_out)) {
    throw Error(Errc::out_of_range, "layer '" + layer + "': kept index " + std::to_string(kept.back()) +
                                        " >= n_out " + std::to_string(n_out));
  }
  return kept;
}

// Channel groups: layers whose outputs share one channel space. A group is
// opened by a producer (input, conv, linear); batchnorm / output nodes join
// their predecessor's group and add nodes merge all incoming groups.
struct Groups {
  std::vector<std::size_t> parent;
  std::size_t make() {
    parent.push_back(parent.size());
    return parent.size() - 1;
  }
  std::size_t find(std::size_t g) {
    while (parent[g] != g) g = parent[g] = parent[parent[g]];
    return g;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

// data is [rows, cols, inner] row-major; keeps the selected (row, col) slabs in order.
void slice_rows_cols(const std::vector<float>& data, std::int64_t cols, std::int64_t inner,
                     const std::vector<std::size_t>& keep_rows, const std::vector<std::size_t>& keep_cols,
                     std::vector<float>& out) {
  out.clear();
  out.reserve(keep_rows.size() * keep_cols.size() * static_cast<std::size_t>(inner));
  const auto inner_sz = static_cast<std::size_t>(inner);
  const auto cols_sz = static_cast<std::size_t>(cols);
  for (std::size_t r : keep_rows) {
    for (std::size_t c : keep_cols) {
      const auto begin = data.begin() + static_cast<std::ptrdiff_t>((r * cols_sz + c) * inner_sz);
      out.insert(out.end(), begin, begin + static_cast<std::ptrdiff_t>(inner_sz));
    }
  }
}

void check_range(const std::string& layer, const std::vector<std::size_t>& idx, std::int64_t n, const char* axis) {
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] >= static_cast<std::size_t>(n) || (i > 0 && idx[i] <= idx[i - 1])) {
      throw Error(Errc::out_of_range, "plan for layer '" + layer + "': " + axis +
                                          " indices must be ascending and below " + std::to_string(n));
    }
  }
}

}  // namespace

std::string_view add_resolution_name(AddResolution r) noexcept {
  switch (r) {
    case AddResolution::protect_identity: return "protect";
    case AddResolution::union_of_kept: return "union";
    case AddResolution::strict: return "strict";
  }
  return "unknown";
}

AddResolution parse_add_resolution(std::string_view name) {
  for (auto r : {AddResolution::protect_identity, AddResolution::union_of_kept, AddResolution::strict}) {
    if (add_resolution_name(r) == name) return r;
  }
  throw Error(Errc::invalid_argument, "unknown add resolution '" + std::string(name) + "'");
}

PruningPlan build_plan(const ModelSnapshot& snapshot, const std::map<std::string, LayerKeep>& keep,
                       const PlanOptions& options, Criterion source, double lambda) {
  const auto order = topological_order(snapshot);
  const auto& layers = snapshot.layers;
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < layers.size(); ++i) index[layers[i].name] = i;
  const std::set<std::string> protect(options.protect.begin(), options.protect.end());
  for (const auto& name : protect) {
    const LayerSpec* l = snapshot.find_layer(name);
    if (l == nullptr || l->kind != LayerKind::conv) {
      throw Error(Errc::unknown_layer, "protected layer '" + name + "' is not a conv layer");
    }
  }
  for (const auto& [name, k] : keep) {
    const LayerSpec* l = snapshot.find_layer(name);
    if (l == nullptr || l->kind != LayerKind::conv) {
      throw Error(Errc::unknown_layer, "keep decision for '" + name + "', which is not a conv layer");
    }
  }

  Groups groups;
  std::vector<std::size_t> group_of(layers.size());
  std::vector<std::int64_t> width_of_group;  // indexed by the group's opening id
  std::vector<std::vector<std::size_t>> producers;
  std::set<std::size_t> add_groups;

  auto pred_index = [&](const LayerSpec& l, std::size_t p) { return index.at(l.predecessors[p]); };

  for (std::size_t i : order) {
    const LayerSpec& l = layers[i];
    const bool produces = l.kind == LayerKind::input || l.kind == LayerKind::conv || l.kind == LayerKind::linear;
    if (l.kind != LayerKind::input && l.predecessors.empty()) {
      throw Error(Errc::inconsistent_graph, "layer '" + l.name + "' has no producer");
    }
    if (l.kind != LayerKind::add && l.predecessors.size() > 1) {
      throw Error(Errc::inconsistent_graph, "layer '" + l.name + "' has several predecessors but is not an add node");
    }
    if (produces) {
      const std::size_t g = groups.make();
      width_of_group.push_back(l.n_out);
      producers.push_back({i});
      group_of[i] = g;
      continue;
    }
    std::size_t g = group_of[pred_index(l, 0)];
    for (std::size_t p = 1; p < l.predecessors.size(); ++p) {
      const std::size_t other = group_of[pred_index(l, p)];
      const std::size_t ra = groups.find(g), rb = groups.find(other);
      if (width_of_group[ra] != width_of_group[rb]) {
        throw Error(Errc::inconsistent_graph, "add node '" + l.name + "' joins streams of different widths");
      }
      if (ra != rb) {
        groups.unite(ra, rb);
        const std::size_t root = groups.find(ra);
        const std::size_t gone = root == ra ? rb : ra;
        producers[root].insert(producers[root].end(), producers[gone].begin(), producers[gone].end());
      }
    }
    group_of[i] = g;
    if (l.kind == LayerKind::add) add_groups.insert(i);
  }

  // Decision per producer.
  auto decision = [&](std::size_t i) -> std::vector<std::size_t> {
    const LayerSpec& l = layers[i];
    if (l.kind != LayerKind::conv || protect.contains(l.name)) return all_of(l.n_out);
    auto it = keep.find(l.name);
    if (it == keep.end()) throw Error(Errc::invalid_argument, "no keep decision for conv layer '" + l.name + "'");
    if (!it->second) return all_of(l.n_out);
    return checked_keep(l.name, *it->second, l.n_out);
  };

  std::set<std::size_t> stream_roots;
  for (std::size_t i : add_groups) stream_roots.insert(groups.find(group_of[i]));

  std::map<std::size_t, std::vector<std::size_t>> resolved;  // group root -> kept channels
  for (std::size_t g = 0; g < producers.size(); ++g) {
    if (groups.find(g) != g) continue;
    const auto& members = producers[g];
    if (!stream_roots.contains(g)) {
      resolved[g] = decision(members.front());
      continue;
    }
    switch (options.add_resolution) {
      case AddResolution::protect_identity:
        resolved[g] = all_of(width_of_group[g]);
        break;
      case AddResolution::union_of_kept: {
        std::set<std::size_t> u;
        for (std::size_t m : members) {
          const auto d = decision(m);
          u.insert(d.begin(), d.end());
        }
        resolved[g].assign(u.begin(), u.end());
        break;
      }
      case AddResolution::strict: {
        const auto first = decision(members.front());
        for (std::size_t m : members) {
          if (decision(m) != first) {
            throw Error(Errc::add_conflict, "producers of residual stream through '" + layers[m].name +
                                                "' keep different channels");
          }
        }
        resolved[g] = first;
        break;
      }
    }
  }

  PruningPlan plan;
  plan.source = std::move(source);
  plan.lambda = lambda;
  for (std::size_t i : order) {
    const LayerSpec& l = layers[i];
    if (l.kind == LayerKind::input) continue;
    LayerPlan lp;
    lp.kept_out = resolved.at(groups.find(group_of[i]));
    const std::size_t pg = groups.find(group_of[pred_index(l, 0)]);
    const std::vector<std::size_t>& in = resolved.at(pg);
    const std::int64_t in_width = width_of_group[pg];
    switch (l.kind) {
      case LayerKind::conv:
        if (l.n_in != in_width) {
          throw Error(Errc::inconsistent_graph, "conv '" + l.name + "' expects " + std::to_string(l.n_in) +
                                                    " input channels, producer has " + std::to_string(in_width));
        }
        lp.kept_in = in;
        break;
      case LayerKind::linear: {
        // A flattened [C, H, W] producer feeds C * H * W inputs, channel-major.
        if (in_width <= 0 || l.n_in % in_width != 0) {
          throw Error(Errc::inconsistent_graph, "linear '" + l.name + "' input width is not a multiple of its producer's channels");
        }
        const auto per = static_cast<std::size_t>(l.n_in / in_width);
        for (std::size_t c : in) {
          for (std::size_t s = 0; s < per; ++s) lp.kept_in.push_back(c * per + s);
        }
        break;
      }
      default:
        if ((l.n_in != 0 && l.n_in != in_width) || (l.n_out != 0 && l.n_out != in_width)) {
          throw Error(Errc::inconsistent_graph, "layer '" + l.name + "' width disagrees with its producer");
        }
        lp.kept_in = lp.kept_out;
        break;
    }
    plan.per_layer.emplace(l.name, std::move(lp));
  }
  return plan;
}

PruningPlan build_plan(const ModelSnapshot& snapshot, const std::map<std::string, LayerElection>& elections,
                       const PlanOptions& options, double lambda) {
  std::map<std::string, LayerKeep> keep;
  for (const auto& [name, e] : elections) keep[name] = e.kept;
  return build_plan(snapshot, keep, options, Criterion{CriterionKind::reprune, {}}, lambda);
}

PruningPlan identity_plan(const ModelSnapshot& snapshot) {
  std::map<std::string, LayerKeep> keep;
  for (const auto& name : snapshot.conv_layers()) keep[name] = std::nullopt;
  return build_plan(snapshot, keep, {AddResolution::union_of_kept, {}}, Criterion{}, 1.0);
}

ModelSnapshot apply_plan(const ModelSnapshot& snapshot, const PruningPlan& plan) {
  ModelSnapshot out = snapshot;
  for (LayerSpec& l : out.layers) {
    auto it = plan.per_layer.find(l.name);
    if (it == plan.per_layer.end()) continue;
    const LayerPlan& lp = it->second;
    const std::int64_t old_out = l.n_out;

    if (l.kind == LayerKind::conv || l.kind == LayerKind::linear) {
      check_range(l.name, lp.kept_out, l.n_out, "kept_out");
      check_range(l.name, lp.kept_in, l.n_in, "kept_in");
      if (auto w = out.tensors.find(l.name + ".weight"); w != out.tensors.end()) {
        const std::int64_t inner = l.kind == LayerKind::conv ? l.kernel_h * l.kernel_w : 1;
        if (static_cast<std::int64_t>(w->second.data.size()) != l.n_out * l.n_in * inner) {
          throw Error(Errc::shape_mismatch, "layer '" + l.name + "': weight size does not match layer spec");
        }
        std::vector<float> sliced;
        slice_rows_cols(w->second.data, l.n_in, inner, lp.kept_out, lp.kept_in, sliced);
        w->second.data = std::move(sliced);
        w->second.shape[0] = static_cast<std::int64_t>(lp.kept_out.size());
        w->second.shape[1] = static_cast<std::int64_t>(lp.kept_in.size());
      }
      l.n_out = static_cast<std::int64_t>(lp.kept_out.size());
      l.n_in = static_cast<std::int64_t>(lp.kept_in.size());
    } else {
      const std::int64_t width = old_out != 0 ? old_out : l.n_in;
      check_range(l.name, lp.kept_out, width, "kept_out");
      if (l.n_out != 0) l.n_out = static_cast<std::int64_t>(lp.kept_out.size());
      if (l.n_in != 0) l.n_in = static_cast<std::int64_t>(lp.kept_in.size());
    }

    // Per-channel vectors (bias, normalization statistics) follow kept_out.
    for (const TensorRecord* t : snapshot.tensors_of(l.name)) {
      if (t->name == l.name + ".weight" && (l.kind == LayerKind::conv || l.kind == LayerKind::linear)) continue;
      if (t->shape.size() != 1 || t->shape[0] != old_out) continue;
      TensorRecord& rec = out.tensors.at(t->name);
      std::vector<float> sliced;
      sliced.reserve(lp.kept_out.size());
      for (std::size_t c : lp.kept_out) sliced.push_back(t->data[c]);
      rec.data = std::move(sliced);
      rec.shape[0] = static_cast<std::int64_t>(lp.kept_out.size());
    }
  }
  validate(out);
  return out;
}

FlopsCount count_flops(const ModelSnapshot& snapshot) {
  FlopsCount fc;
  for (const LayerSpec& l : snapshot.layers) {
    if (l.kind != LayerKind::conv && l.kind != LayerKind::linear) continue;
    LayerCost c{l.name, l.kind, 0, 0, l.n_out};
    const bool bias = snapshot.find_tensor(l.name + ".bias") != nullptr;
    if (l.kind == LayerKind::conv) {
      if (l.out_h <= 0 || l.out_w <= 0) {
        throw Error(Errc::missing_spatial, "conv layer '" + l.name + "' has no output spatial size");
      }
      const auto weights = static_cast<std::uint64_t>(l.n_out * l.n_in * l.kernel_h * l.kernel_w);
      c.flops = weights * static_cast<std::uint64_t>(l.out_h * l.out_w);
      c.params = weights;
    } else {
      c.flops = static_cast<std::uint64_t>(l.n_out * l.n_in);
      c.params = c.flops;
    }
    if (bias) c.params += static_cast<std::uint64_t>(l.n_out);
    fc.total_flops += c.flops;
    fc.total_params += c.params;
    fc.per_layer.push_back(std::move(c));
  }
  return fc;
}

CompressionReport compression_report(const ModelSnapshot& before, const ModelSnapshot& after) {
  if (before.layers.size() != after.layers.size()) {
    throw Error(Errc::topology_mismatch, "snapshots have different layer counts");
  }
  for (std::size_t i = 0; i < before.layers.size(); ++i) {
    const LayerSpec& a = before.layers[i];
    const LayerSpec& b = after.layers[i];
    if (a.name != b.name || a.kind != b.kind || a.predecessors != b.predecessors || a.kernel_h != b.kernel_h ||
        a.kernel_w != b.kernel_w || a.out_h != b.out_h || a.out_w != b.out_w) {
      throw Error(Errc::topology_mismatch, "layer " + std::to_string(i) + " ('" + a.name + "') differs in topology");
    }
  }
  const FlopsCount fb = count_flops(before);
  const FlopsCount fa = count_flops(after);
  CompressionReport r;
  for (std::size_t i = 0; i < fb.per_layer.size(); ++i) {
    const LayerCost& b = fb.per_layer[i];
    const LayerCost& a = fa.per_layer[i];
    LayerCompression lc;
    lc.name = b.name;
    lc.kind = b.kind;
    lc.flops_before = b.flops;
    lc.flops_after = a.flops;
    lc.params_before = b.params;
    lc.params_after = a.params;
    lc.filters_before = b.filters;
    lc.filters_after = a.filters;
    lc.remaining_filter_ratio = b.filters > 0 ? static_cast<double>(a.filters) / static_cast<double>(b.filters) : 1.0;
    r.per_layer.push_back(std::move(lc));
  }
  r.flops_before = fb.total_flops;
  r.flops_after = fa.total_flops;
  r.params_before = fb.total_params;
  r.params_after = fa.total_params;
  auto reduction = [](std::uint64_t before_v, std::uint64_t after_v) {
    return before_v == 0 ? 0.0 : 1.0 - static_cast<double>(after_v) / static_cast<double>(before_v);
  };
  r.flops_reduction = reduction(r.flops_before, r.flops_after);
  r.params_reduction = reduction(r.params_before, r.params_after);
  r.speedup = r.flops_after == 0 ? 1.0 : static_cast<double>(r.flops_before) / static_cast<double>(r.flops_after);
  return r;
}

}  // namespace fprune
