// Naive reference implementations used only by the tests. Nothing here calls
// into the library's math; inputs are plain nested vectors.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <random>
#include <vector>

#include "fprune/container.hpp"
#include "fprune/filter_matrix.hpp"

namespace oracle {

using Rows = std::vector<std::vector<double>>;

inline Rows rows_of(const fprune::FilterMatrix& m) {
  Rows r(m.rows(), std::vector<double>(m.dim()));
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t d = 0; d < m.dim(); ++d) r[i][d] = m.row(i)[d];
  return r;
}

inline double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t d = 0; d < a.size(); ++d) s += (a[d] - b[d]) * (a[d] - b[d]);
  return s;
}

inline double dist(const std::vector<double>& a, const std::vector<double>& b) { return std::sqrt(sq_dist(a, b)); }

inline std::vector<double> mean_of(const Rows& x, const std::vector<std::size_t>& members) {
  std::vector<double> c(x[0].size(), 0.0);
  for (std::size_t j : members)
    for (std::size_t d = 0; d < c.size(); ++d) c[d] += x[j][d];
  for (double& v : c) v /= static_cast<double>(members.size());
  return c;
}

/// Labels numbered by first appearance.
inline std::vector<std::size_t> canonical(const std::vector<std::size_t>& labels) {
  std::map<std::size_t, std::size_t> remap;
  std::vector<std::size_t> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto [it, fresh] = remap.try_emplace(labels[i], remap.size());
    out[i] = it->second;
  }
  return out;
}

/// Greedy Ward from scratch: at every step score every live pair by
/// |A||B|/(|A|+|B|) * ||mean_A - mean_B||^2 recomputed from the members, merge
/// the cheapest (smallest node-id pair on ties). partitions[k] holds the
/// canonical labels when k clusters remain.
struct WardResult {
  std::vector<std::vector<std::size_t>> partitions;  // index k = 1..n
  std::vector<double> costs;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
};

inline WardResult ward(const Rows& x) {
  const std::size_t n = x.size();
  struct Node {
    std::size_t id;
    std::vector<std::size_t> members;
    std::vector<double> mean;
  };
  std::vector<Node> live;
  for (std::size_t i = 0; i < n; ++i) live.push_back({i, {i}, x[i]});
  WardResult r;
  r.partitions.resize(n + 1);
  auto snapshot = [&] {
    std::vector<std::size_t> lab(n);
    for (std::size_t c = 0; c < live.size(); ++c)
      for (std::size_t j : live[c].members) lab[j] = c;
    r.partitions[live.size()] = canonical(lab);
  };
  snapshot();
  std::size_t next_id = n;
  while (live.size() > 1) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t bi = 0, bj = 0;
    std::pair<std::size_t, std::size_t> best_ids{SIZE_MAX, SIZE_MAX};
    for (std::size_t i = 0; i < live.size(); ++i) {
      for (std::size_t j = i + 1; j < live.size(); ++j) {
        const double na = static_cast<double>(live[i].members.size());
        const double nb = static_cast<double>(live[j].members.size());
        const double cost = na * nb / (na + nb) * sq_dist(live[i].mean, live[j].mean);
        const std::pair<std::size_t, std::size_t> ids{std::min(live[i].id, live[j].id),
                                                      std::max(live[i].id, live[j].id)};
        if (cost < best || (cost == best && ids < best_ids)) {
          best = cost;
          bi = i;
          bj = j;
          best_ids = ids;
        }
      }
    }
    Node merged{next_id++, live[bi].members, {}};
    merged.members.insert(merged.members.end(), live[bj].members.begin(), live[bj].members.end());
    std::sort(merged.members.begin(), merged.members.end());
    merged.mean = mean_of(x, merged.members);
    r.costs.push_back(best);
    r.pairs.push_back(best_ids);
    live.erase(live.begin() + static_cast<std::ptrdiff_t>(bj));
    live.erase(live.begin() + static_cast<std::ptrdiff_t>(bi));
    live.push_back(std::move(merged));
    snapshot();
  }
  return r;
}

struct Silhouette {
  std::vector<double> a, b;  // NaN where undefined (singletons, k < 2)
  std::vector<double> per_filter;
  std::vector<double> per_cluster;
  double layer_mean = 0;
};

/// Mean intra-cluster and min mean foreign-cluster distance by explicit loops.
inline Silhouette silhouette(const Rows& x, const std::vector<std::size_t>& labels) {
  const std::size_t n = x.size();
  std::size_t k = 0;
  for (std::size_t l : labels) k = std::max(k, l + 1);
  Silhouette s;
  s.per_filter.assign(n, 0.0);
  s.per_cluster.assign(k, 0.0);
  s.a.assign(n, std::nan(""));
  s.b.assign(n, std::nan(""));
  if (k >= 2) {
    for (std::size_t j = 0; j < n; ++j) {
      std::vector<double> sum(k, 0.0);
      std::vector<std::size_t> cnt(k, 0);
      for (std::size_t i = 0; i < n; ++i) {
        if (i == j) continue;
        sum[labels[i]] += dist(x[i], x[j]);
        ++cnt[labels[i]];
      }
      const std::size_t own = labels[j];
      double b = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < k; ++c)
        if (c != own && cnt[c] > 0) b = std::min(b, sum[c] / static_cast<double>(cnt[c]));
      s.b[j] = b;
      if (cnt[own] == 0) continue;  // singleton
      const double a = sum[own] / static_cast<double>(cnt[own]);
      s.a[j] = a;
      const double m = std::max(a, b);
      s.per_filter[j] = m == 0 ? 0.0 : (b - a) / m;
    }
  }
  std::vector<std::size_t> size(k, 0);
  for (std::size_t j = 0; j < n; ++j) {
    s.per_cluster[labels[j]] += s.per_filter[j];
    ++size[labels[j]];
  }
  for (std::size_t c = 0; c < k; ++c) s.per_cluster[c] /= static_cast<double>(size[c]);
  double total = 0;
  for (double v : s.per_filter) total += v;
  s.layer_mean = total / static_cast<double>(n);
  return s;
}

/// Member closest to the cluster mean, first index on ties.
inline std::size_t nearest_to_mean(const Rows& x, const std::vector<std::size_t>& members) {
  const auto c = mean_of(x, members);
  std::size_t best = members.front();
  double bd = std::numeric_limits<double>::infinity();
  for (std::size_t j : members) {
    const double d = sq_dist(x[j], c);
    if (d < bd) {
      bd = d;
      best = j;
    }
  }
  return best;
}

/// Full election by brute force on top of the naive Ward and silhouette.
struct Election {
  std::size_t k_star = 0;
  std::vector<std::size_t> kept;
};

inline Election elect(const Rows& x, double lambda) {
  const std::size_t n = x.size();
  const auto w = ward(x);
  std::size_t k_min = std::max<std::size_t>(static_cast<std::size_t>(std::floor(n * lambda + 1e-9)), 2);
  const std::size_t k_max = n - 1;
  k_min = std::min(k_min, k_max);
  Election e;
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t k = k_min; k <= k_max; ++k) {
    const double m = k < 2 ? 0.0 : silhouette(x, w.partitions[k]).layer_mean;
    if (m > best) {
      best = m;
      e.k_star = k;
    }
  }
  const auto& lab = w.partitions[e.k_star];
  Silhouette s;
  if (e.k_star < 2) {
    s.per_cluster.assign(e.k_star, 0.0);
  } else {
    s = silhouette(x, lab);
  }
  std::vector<std::vector<std::size_t>> members(e.k_star);
  for (std::size_t j = 0; j < n; ++j) members[lab[j]].push_back(j);
  bool any = false;
  for (std::size_t c = 0; c < e.k_star; ++c) any = any || s.per_cluster[c] >= 0;
  std::size_t fallback = 0;
  for (std::size_t c = 1; c < e.k_star; ++c)
    if (s.per_cluster[c] > s.per_cluster[fallback]) fallback = c;
  for (std::size_t c = 0; c < e.k_star; ++c) {
    if (any ? s.per_cluster[c] >= 0 : c == fallback) e.kept.push_back(nearest_to_mean(x, members[c]));
  }
  std::sort(e.kept.begin(), e.kept.end());
  return e;
}

inline double median_objective(const Rows& x, const std::vector<double>& p) {
  double s = 0;
  for (const auto& r : x) s += dist(r, p);
  return s;
}

/// Best objective on a dense 2-D grid followed by local refinement passes.
inline double grid_median_objective(const Rows& x) {
  double lo0 = 1e300, hi0 = -1e300, lo1 = 1e300, hi1 = -1e300;
  for (const auto& r : x) {
    lo0 = std::min(lo0, r[0]);
    hi0 = std::max(hi0, r[0]);
    lo1 = std::min(lo1, r[1]);
    hi1 = std::max(hi1, r[1]);
  }
  double best = 1e300, cx = 0, cy = 0;
  double step0 = (hi0 - lo0) / 200, step1 = (hi1 - lo1) / 200;
  for (int i = 0; i <= 200; ++i)
    for (int j = 0; j <= 200; ++j) {
      const std::vector<double> p{lo0 + i * step0, lo1 + j * step1};
      const double v = median_objective(x, p);
      if (v < best) {
        best = v;
        cx = p[0];
        cy = p[1];
      }
    }
  for (int pass = 0; pass < 6; ++pass) {
    step0 /= 20;
    step1 /= 20;
    const double ox = cx, oy = cy;
    for (int i = -20; i <= 20; ++i)
      for (int j = -20; j <= 20; ++j) {
        const std::vector<double> p{ox + i * step0, oy + j * step1};
        const double v = median_objective(x, p);
        if (v < best) {
          best = v;
          cx = p[0];
          cy = p[1];
        }
      }
  }
  return best;
}

/// Indices of the `keep` largest scores, ties to the lowest index, ascending.
inline std::vector<std::size_t> top_k(const std::vector<double>& scores, std::size_t keep) {
  std::vector<std::size_t> idx(scores.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] != scores[b] ? scores[a] > scores[b] : a < b;
  });
  idx.resize(keep);
  std::sort(idx.begin(), idx.end());
  return idx;
}

/// Weight tensor [o, i, h, w] restricted to the given rows and input channels.
inline std::vector<float> slice4(const std::vector<float>& w, std::int64_t o, std::int64_t i, std::int64_t hw,
                                 const std::vector<std::size_t>& rows, const std::vector<std::size_t>& cols) {
  (void)o;
  std::vector<float> out;
  for (std::size_t r : rows)
    for (std::size_t c : cols)
      for (std::int64_t s = 0; s < hw; ++s) out.push_back(w[(r * i + c) * hw + s]);
  return out;
}

/// MACs and weights straight from the layer list.
struct Recount {
  std::uint64_t flops = 0, params = 0;
};

inline Recount recount(const fprune::ModelSnapshot& s) {
  Recount r;
  for (const auto& l : s.layers) {
    std::uint64_t w = 0, hw = 1;
    if (l.kind == fprune::LayerKind::conv) {
      w = static_cast<std::uint64_t>(l.n_out * l.n_in * l.kernel_h * l.kernel_w);
      hw = static_cast<std::uint64_t>(l.out_h * l.out_w);
    } else if (l.kind == fprune::LayerKind::linear) {
      w = static_cast<std::uint64_t>(l.n_out * l.n_in);
    } else {
      continue;
    }
    r.flops += w * hw;
    r.params += w + (s.tensors.count(l.name + ".bias") ? static_cast<std::uint64_t>(l.n_out) : 0);
  }
  return r;
}

/// g blobs of `per` filters with unit noise std; blob centres are redrawn
/// until every pair lies at least `sep` apart. truth receives each row's blob.
inline fprune::FilterMatrix blobs(std::mt19937_64& rng, std::size_t g, std::size_t per, std::size_t dim, double sep,
                                  std::vector<std::size_t>* truth = nullptr) {
  std::normal_distribution<double> noise(0.0, 1.0);
  Rows centres;
  while (centres.size() < g) {
    std::vector<double> c(dim);
    for (double& v : c) v = noise(rng) * sep;
    bool ok = true;
    for (const auto& o : centres) ok = ok && dist(c, o) >= sep;
    if (ok) centres.push_back(std::move(c));
  }
  std::vector<float> data;
  for (std::size_t c = 0; c < g; ++c)
    for (std::size_t p = 0; p < per; ++p) {
      for (std::size_t d = 0; d < dim; ++d) data.push_back(static_cast<float>(centres[c][d] + noise(rng)));
      if (truth) truth->push_back(c);
    }
  return fprune::FilterMatrix(g * per, dim, std::move(data));
}

inline fprune::FilterMatrix random_matrix(std::mt19937_64& rng, std::size_t n, std::size_t dim, double scale = 1.0) {
  std::normal_distribution<float> nd(0.0f, static_cast<float>(scale));
  std::vector<float> data(n * dim);
  for (float& v : data) v = nd(rng);
  return fprune::FilterMatrix(n, dim, std::move(data));
}

}  // namespace oracle
