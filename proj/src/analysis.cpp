#include "fprune/analysis.hpp"

#include <algorithm>
#include <cmath>

#include "fprune/error.hpp"
#include "fprune/kernels.hpp"

namespace fprune {

Cosine cosine_similarity(std::span<const float> before, std::span<const float> after) {
  if (before.size() != after.size()) {
    throw Error(Errc::length_mismatch, "cosine_similarity: vectors differ in length");
  }
  const auto& k = kernels::active();
  const double nb = k.sq_norm(before.data(), before.size());
  const double na = k.sq_norm(after.data(), after.size());
  if (nb == 0.0 || na == 0.0) return {0.0, true};
  const double v = k.dot(before.data(), after.data(), before.size()) / (std::sqrt(nb) * std::sqrt(na));
  return {std::clamp(v, -1.0, 1.0), false};
}

std::size_t histogram_bin(double cosine) {
  const double pos = std::floor((std::clamp(cosine, -1.0, 1.0) + 1.0) * 10.0 + 1e-9);
  return static_cast<std::size_t>(std::clamp(pos, 0.0, static_cast<double>(SimilarityReport::kBins - 1)));
}

double SimilarityReport::fraction_in(double lo, double hi) const {
  if (total == 0) return 0.0;
  std::size_t hits = 0;
  for (const auto& l : per_layer) {
    for (double c : l.cosines) {
      if (c >= lo && c <= hi) ++hits;
    }
  }
  return static_cast<double>(hits) / static_cast<double>(total);
}

SimilarityReport similarity_report_aligned(const ModelSnapshot& a, const ModelSnapshot& b) {
  SimilarityReport r;
  double sum = 0.0;
  for (const auto& name : a.conv_layers()) {
    const LayerSpec* other = b.find_layer(name);
    if (other == nullptr || other->kind != LayerKind::conv) {
      throw Error(Errc::shape_mismatch, "conv layer '" + name + "' missing from the compared snapshot");
    }
    const FilterMatrix fa = filters_of(a, name);
    const FilterMatrix fb = filters_of(b, name);
    if (fa.rows() != fb.rows() || fa.dim() != fb.dim()) {
      throw Error(Errc::shape_mismatch, "conv layer '" + name + "': filter shapes differ (" +
                                            std::to_string(fa.rows()) + "x" + std::to_string(fa.dim()) + " vs " +
                                            std::to_string(fb.rows()) + "x" + std::to_string(fb.dim()) + ")");
    }
    LayerSimilarity ls{name, {}, 0.0};
    double layer_sum = 0.0;
    for (std::size_t j = 0; j < fa.rows(); ++j) {
      const Cosine c = cosine_similarity(fa.row(j), fb.row(j));
      if (c.zero_norm) ++r.zero_norm;
      ls.cosines.push_back(c.value);
      layer_sum += c.value;
      ++r.histogram[histogram_bin(c.value)];
    }
    ls.mean = layer_sum / static_cast<double>(fa.rows());
    sum += layer_sum;
    r.total += fa.rows();
    r.per_layer.push_back(std::move(ls));
  }
  if (r.total > 0) r.mean = sum / static_cast<double>(r.total);
  r.fraction_near_zero = r.fraction_in(-0.1, 0.1);
  r.fraction_mid = r.fraction_in(0.2, 0.6);
  return r;
}

SimilarityReport similarity_report(const ModelSnapshot& before, const ModelSnapshot& after, const PruningPlan& plan) {
  return similarity_report_aligned(apply_plan(before, plan), after);
}

SweepTable lambda_sweep(const ModelSnapshot& snapshot, const std::vector<double>& lambdas,
                        const PlanOptions& plan_options, std::size_t threads) {
  SweepTable t;
  for (double lambda : lambdas) {
    PruneOptions opts;
    opts.criterion = {CriterionKind::reprune, {}};
    opts.election.lambda = lambda;
    opts.plan = plan_options;
    opts.threads = threads;
    const PruneResult res = prune_model(snapshot, opts);
    for (const LayerSpec& l : snapshot.layers) {
      if (l.kind != LayerKind::conv) continue;
      SweepRow row;
      row.lambda = lambda;
      row.layer = l.name;
      row.n_out = l.n_out;
      row.kept = res.plan.per_layer.at(l.name).kept_out.size();
      if (auto it = res.elections.find(l.name); it != res.elections.end()) {
        row.k_star = it->second.k_star;
        row.elected = it->second.kept.size();
        row.dropped_clusters = it->second.dropped_clusters.size();
      } else {
        row.k_star = static_cast<std::size_t>(l.n_out);
        row.elected = static_cast<std::size_t>(l.n_out);
      }
      row.remaining_ratio = static_cast<double>(row.kept) / static_cast<double>(l.n_out);
      t.rows.push_back(std::move(row));
    }
    const CompressionReport& rep = res.report;
    t.totals.push_back({lambda, rep.flops_before, rep.flops_after, rep.params_before, rep.params_after,
                        rep.flops_reduction, rep.params_reduction, rep.speedup});
  }
  return t;
}

}  // namespace fprune
