// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

#include "cli.hpp"
#include "fprune/compression.hpp"
#include "fprune/election.hpp"
#include "fprune/hierarchy.hpp"
#include "fprune/pipeline.hpp"
#include "fprune/silhouette.hpp"
#include "fprune/zoo.hpp"
#include "oracles.hpp"

using namespace fprune;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(const char* id, bool ok, const std::string& detail) {
  std::printf("%s %-22s %s\n", ok ? "PASS" : "FAIL", id, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

template <class... A>
std::string fmt(const char* f, A... a) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, a...);
  return buf;
}

bool close_rel(double x, double ref, double tol) { return std::abs(x - ref) <= tol * std::max(1.0, std::abs(ref)); }

std::vector<ModelSnapshot> fixtures() {
  std::vector<ModelSnapshot> f;
  for (int d : {20, 32, 56, 110}) f.push_back(zoo::resnet_cifar(d));
  f.push_back(zoo::vgg16_cifar());
  f.push_back(zoo::vgg16_imagenet());
  f.push_back(zoo::conv_chain({8, 16, 16}));
  f.push_back(zoo::conv_chain({2, 3, 5}, 3, 4, 2, {7, 2.0}));
  return f;
}

FilterMatrix permuted(const FilterMatrix& m, const std::vector<std::size_t>& perm) {
  std::vector<float> data;
  for (std::size_t p : perm) data.insert(data.end(), m.row(p).begin(), m.row(p).end());
  return FilterMatrix(m.rows(), m.dim(), data);
}

FilterMatrix mapped(const FilterMatrix& m, const std::function<float(float)>& f) {
  std::vector<float> d(m.data().begin(), m.data().end());
  for (float& v : d) v = f(v);
  return FilterMatrix(m.rows(), m.dim(), d);
}

// Values on a 1/1024 grid in [-4, 4]: shifts by 16 and scaling by 3 stay exact.
FilterMatrix dyadic(std::mt19937_64& rng, std::size_t n, std::size_t dim) {
  std::uniform_int_distribution<int> u(-4096, 4096);
  std::vector<float> d(n * dim);
  for (float& v : d) v = static_cast<float>(u(rng)) / 1024.0f;
  return FilterMatrix(n, dim, d);
}

void ward_oracle() {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<std::size_t> nd(2, 64), dd(1, 32);
  const auto t0 = std::chrono::steady_clock::now();
  int bad = 0;
  std::size_t cuts = 0;
  for (int t = 0; t < 200; ++t) {
    const auto m = oracle::random_matrix(rng, nd(rng), dd(rng));
    const auto o = oracle::ward(oracle::rows_of(m));
    const auto d = agglomerate(m);
    bool ok = true;
    for (std::size_t k = 1; k <= m.rows(); ++k, ++cuts) ok = ok && cut(d, k).labels == o.partitions[k];
    bad += !ok;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  report("ward-oracle", bad == 0 && secs < 60.0,
         fmt("200 instances, %zu cuts, %d mismatched instances, %.2f s (limit 60 s)", cuts, bad, secs));
}

void silhouette_oracle() {
  std::mt19937_64 rng(2025);
  std::uniform_int_distribution<std::size_t> nd(3, 64), dd(1, 32);
  double worst = 0;
  int bad = 0;
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = nd(rng);
    const auto m = oracle::random_matrix(rng, n, dd(rng));
    std::uniform_int_distribution<std::size_t> kd(2, n - 1);
    const auto a = cut(agglomerate(m), kd(rng));
    const auto r = silhouette_report(m, a);
    const auto o = oracle::silhouette(oracle::rows_of(m), a.labels);
    const auto sizes = a.sizes();
    bool ok = true;
    auto cmp = [&](double x, double ref) {
      worst = std::max(worst, std::abs(x - ref) / std::max(1.0, std::abs(ref)));
      ok = ok && close_rel(x, ref, 1e-6);
    };
    for (std::size_t j = 0; j < n; ++j) {
      if (sizes[a.labels[j]] > 1) cmp(cohesion(m, a, j), o.a[j]);
      cmp(separation(m, a, j), o.b[j]);
      cmp(r.per_filter[j], o.per_filter[j]);
    }
    for (std::size_t c = 0; c < a.k; ++c) cmp(r.per_cluster[c], o.per_cluster[c]);
    cmp(r.layer_mean, o.layer_mean);
    bad += !ok;
  }
  report("silhouette-oracle", bad == 0,
         fmt("200 instances, %d outside 1e-6, worst relative error %.2e", bad, worst));
}

void k_recovery() {
  std::mt19937_64 rng(2026);
  std::uniform_int_distribution<std::size_t> per(4, 10), dim(4, 16);
  ElectionConfig cfg;
  cfg.lambda = 0.01;
  int hits = 0;
  for (int t = 0; t < 100; ++t) {
    const std::size_t g = 2 + static_cast<std::size_t>(t % 4);
    const auto m = oracle::blobs(rng, g, per(rng), dim(rng), 10.0);
    const auto r = k_range(m.rows(), cfg);
    if (g < r.k_min || g > r.k_max) continue;
    hits += select_k(m, cfg).k_star == g;
  }
  report("k-recovery", hits >= 95, fmt("K* = G in %d / 100 trials (G in 2..5, separation 10 sigma, need >= 95)", hits));
}

void representatives() {
  std::mt19937_64 rng(2027);
  std::uniform_int_distribution<std::size_t> nd(2, 48), dd(1, 24);
  std::uniform_real_distribution<double> ld(0.05, 0.9);
  std::size_t checked = 0, violations = 0;
  for (int t = 0; t < 100; ++t) {
    const auto m = t % 2 ? oracle::random_matrix(rng, nd(rng), dd(rng))
                         : oracle::blobs(rng, 2 + t % 5, 2 + t % 7, 1 + t % 9, 6.0);
    ElectionConfig cfg;
    cfg.lambda = ld(rng);
    const auto e = elect_layer(m, cfg);
    const auto x = oracle::rows_of(m);
    const auto members = e.assignment.members();
    for (std::size_t i = 0; i < e.kept.size(); ++i, ++checked) {
      const auto& mem = members[e.kept_cluster[i]];
      const auto c = oracle::mean_of(x, mem);
      const double dk = oracle::sq_dist(x[e.kept[i]], c);
      for (std::size_t j : mem) violations += oracle::sq_dist(x[j], c) < dk;
    }
  }
  report("representative", violations == 0,
         fmt("%zu representatives over 100 instances, %zu strictly closer co-members", checked, violations));
}

void k_min() {
  ElectionConfig cfg;
  cfg.lambda = 0.1;
  const auto r = k_range(64, cfg);
  report("k-min", r.k_min == 6, fmt("n_out = 64, lambda = 0.1 gives k_min = %zu (expect 6), k_max = %zu", r.k_min,
                                    r.k_max));
}

void flops() {
  const double r56 = static_cast<double>(count_flops(zoo::resnet_cifar(56)).total_flops);
  const bool ok56 = std::abs(r56 - 1.253e8) / 1.253e8 <= 0.05;

  // Uniform keep ratio over conv layers, chosen to reach 52.7% FLOPs reduction.
  const auto vgg = zoo::vgg16_imagenet();
  const auto base = count_flops(vgg).total_flops;
  double best_gap = 1.0, best_ratio = 0;
  std::uint64_t best_after = 0;
  for (int step = 1; step < 1000; ++step) {
    const double ratio = step / 1000.0;
    std::map<std::string, LayerKeep> keep;
    for (const auto& c : vgg.conv_layers()) {
      const auto n = static_cast<std::size_t>(vgg.find_layer(c)->n_out);
      std::vector<std::size_t> k(std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(ratio * n))));
      std::iota(k.begin(), k.end(), 0);
      keep[c] = k;
    }
    const auto plan = build_plan(vgg, keep);
    ModelSnapshot shape;
    shape.layers = vgg.layers;
    for (auto& l : shape.layers) {
      if (auto it = plan.per_layer.find(l.name); it != plan.per_layer.end() && l.kind != LayerKind::input) {
        if (l.kind == LayerKind::conv || l.kind == LayerKind::linear) {
          l.n_out = static_cast<std::int64_t>(it->second.kept_out.size());
          l.n_in = static_cast<std::int64_t>(it->second.kept_in.size());
        }
      }
    }
    for (const auto& [name, t] : vgg.tensors)
      if (name.ends_with(".bias")) shape.tensors[name] = t;
    const auto after = count_flops(shape).total_flops;
    const double gap = std::abs(1.0 - double(after) / double(base) - 0.527);
    if (gap < best_gap) {
      best_gap = gap;
      best_ratio = ratio;
      best_after = after;
    }
  }
  const bool okv = std::abs(double(best_after) - 7.41e9) / 7.41e9 <= 0.05;
  report("flops", ok56 && okv,
         fmt("ResNet-56 %.4e (target 1.253e8 +-5%%); VGG-16 ImageNet %.4e -> %.4e at keep ratio %.3f, "
             "reduction %.1f%% (target 7.41e9 +-5%%)",
             r56, double(base), double(best_after), best_ratio, 100.0 * (1.0 - double(best_after) / double(base))));
}

void guaranteed_reduction() {
  std::size_t layers = 0, bad = 0;
  for (const auto& s : fixtures()) {
    ElectionConfig cfg;
    for (const auto& [name, e] : elect_model(s, cfg)) {
      ++layers;
      bad += e.kept.size() + 1 > static_cast<std::size_t>(s.find_layer(name)->n_out);
    }
  }
  report("guaranteed-reduction", bad == 0 && layers > 0,
         fmt("%zu conv layers with n_out >= 2 across 8 fixtures, %zu with |kept| > n_out - 1", layers, bad));
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), {}};
}

void determinism() {
  const auto dir = fs::temp_directory_path() / "fprune_acceptance";
  fs::create_directories(dir);
  const auto in = dir / "resnet56.fpwt";
  write_container(zoo::resnet_cifar(56), in);
  std::ostringstream sink;
  bool ran = true;
  for (const char* out : {"a.fpwt", "b.fpwt"}) {
    ran = ran && cli::run({"prune", "--input", in.string(), "--output", (dir / out).string(), "--lambda", "0.1",
                           "--threads", out[0] == 'a' ? "1" : "4"},
                          sink, sink) == 0;
  }
  const bool same_plan = slurp(dir / "a.fpwt.plan.json") == slurp(dir / "b.fpwt.plan.json");
  const bool same_report = slurp(dir / "a.fpwt.report.json") == slurp(dir / "b.fpwt.report.json");
  report("determinism", ran && same_plan && same_report,
         fmt("two prune runs on ResNet-56 (1 and 4 threads): plan %s, report %s", same_plan ? "identical" : "differs",
             same_report ? "identical" : "differs"));
}

void baseline_parity() {
  std::size_t layers = 0, mismatched = 0, differing = 0;
  for (const auto& s : {zoo::resnet_cifar(56), zoo::vgg16_cifar()}) {
    const auto ref = prune_model(s, {});
    const auto counts = keep_counts(s, ref.plan);
    for (auto kind : {CriterionKind::l1, CriterionKind::l2, CriterionKind::geometric_median}) {
      PruneOptions o;
      o.criterion.kind = kind;
      o.keep_counts = counts;
      const auto b = prune_model(s, o);
      for (std::size_t i = 0; i < ref.report.per_layer.size(); ++i) {
        ++layers;
        mismatched += b.report.per_layer[i].flops_after != ref.report.per_layer[i].flops_after;
        const auto& name = ref.report.per_layer[i].name;
        differing += b.plan.per_layer.at(name).kept_out != ref.plan.per_layer.at(name).kept_out;
      }
    }
  }
  report("baseline-parity", mismatched == 0,
         fmt("%zu layer comparisons (l1, l2, gm on ResNet-56 and VGG-16), %zu FLOPs mismatches, %zu with other indices",
             layers, mismatched, differing));
}

void invariance() {
  std::mt19937_64 rng(2028);
  std::size_t layers = 0, scale_bad = 0, shift_bad = 0, perm_bad = 0;
  ElectionConfig cfg;
  cfg.lambda = 0.1;
  std::vector<FilterMatrix> inputs;
  for (int t = 0; t < 40; ++t) inputs.push_back(dyadic(rng, 8 + t, 4 + t % 9));
  const auto r20 = zoo::resnet_cifar(20);
  for (const auto& c : r20.conv_layers()) inputs.push_back(filters_of(r20, c));

  for (const auto& m : inputs) {
    ++layers;
    const auto e = elect_layer(m, cfg);
    for (float c : {0.25f, 3.0f, 1024.0f}) scale_bad += elect_layer(mapped(m, [c](float v) { return v * c; }), cfg).kept != e.kept;
    shift_bad += elect_layer(mapped(m, [](float v) { return v + 16.0f; }), cfg).kept != e.kept;

    // Permuted run: same clusters, and each representative is a member at the
    // minimum centroid distance (two-member clusters tie exactly).
    std::vector<std::size_t> perm(m.rows());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    const auto ep = elect_layer(permuted(m, perm), cfg);
    std::vector<std::size_t> back(m.rows());
    for (std::size_t i = 0; i < perm.size(); ++i) back[perm[i]] = ep.assignment.labels[i];
    bool ok = ep.k_star == e.k_star && oracle::canonical(back) == e.assignment.labels && ep.kept.size() == e.kept.size();
    if (ok) {
      const auto x = oracle::rows_of(m);
      const auto members = e.assignment.members();
      for (std::size_t kp : ep.kept) {
        const std::size_t orig = perm[kp];
        const auto& mem = members[e.assignment.labels[orig]];
        const auto c = oracle::mean_of(x, mem);
        double best = 1e300;
        for (std::size_t j : mem) best = std::min(best, oracle::sq_dist(x[j], c));
        ok = ok && oracle::sq_dist(x[orig], c) <= best;
      }
    }
    perm_bad += !ok;
  }
  report("invariance", scale_bad == 0 && shift_bad == 0 && perm_bad == 0,
         fmt("%zu layers: scaling x0.25/x3/x1024 %zu changed, +16 shift %zu changed, permutation %zu inconsistent",
             layers, scale_bad, shift_bad, perm_bad));
}

}  // namespace

int main() {
  ward_oracle();
  silhouette_oracle();
  k_recovery();
  representatives();
  k_min();
  flops();
  guaranteed_reduction();
  determinism();
  baseline_parity();
  invariance();
  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
