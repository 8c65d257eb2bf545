#include "fprune/hierarchy.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include "fprune/error.hpp"
#include "fprune/kernels.hpp"
#include "fprune/parallel.hpp"

namespace fprune {

SquareMatrix pairwise_sq_distances(const FilterMatrix& filters, std::size_t threads) {
  const std::size_t n = filters.rows();
  const std::size_t dim = filters.dim();
  const auto& k = kernels::active();
  SquareMatrix d(n);
  parallel_for(n, threads, [&](std::size_t i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = k.sq_l2(filters.row_ptr(i), filters.row_ptr(j), dim);
      d(i, j) = v;
      d(j, i) = v;
    }
  });
  return d;
}

SquareMatrix pairwise_distances(const FilterMatrix& filters, std::size_t threads) {
  SquareMatrix d = pairwise_sq_distances(filters, threads);
  for (std::size_t i = 0; i < d.size(); ++i) {
    for (std::size_t j = 0; j < d.size(); ++j) d(i, j) = std::sqrt(d(i, j));
  }
  return d;
}

double ward_merge_cost(std::size_t size_a, std::span<const double> centroid_a, std::size_t size_b,
                       std::span<const double> centroid_b) {
  if (centroid_a.size() != centroid_b.size()) {
    throw Error(Errc::length_mismatch, "ward_merge_cost: centroid dimensions differ");
  }
  double sq = 0.0;
  for (std::size_t i = 0; i < centroid_a.size(); ++i) {
    const double d = centroid_a[i] - centroid_b[i];
    sq += d * d;
  }
  const double a = static_cast<double>(size_a);
  const double b = static_cast<double>(size_b);
  return a * b / (a + b) * sq;
}

std::vector<std::vector<std::size_t>> ClusterAssignment::members() const {
  std::vector<std::vector<std::size_t>> out(k);
  for (std::size_t j = 0; j < labels.size(); ++j) out[labels[j]].push_back(j);
  return out;
}

std::vector<std::size_t> ClusterAssignment::sizes() const {
  std::vector<std::size_t> out(k, 0);
  for (std::size_t l : labels) ++out[l];
  return out;
}

ClusterAssignment canonicalize(std::span<const std::size_t> labels) {
  ClusterAssignment out;
  out.labels.resize(labels.size());
  std::vector<std::size_t> remap;
  constexpr auto unset = std::numeric_limits<std::size_t>::max();
  for (std::size_t j = 0; j < labels.size(); ++j) {
    if (labels[j] >= remap.size()) remap.resize(labels[j] + 1, unset);
    if (remap[labels[j]] == unset) remap[labels[j]] = out.k++;
    out.labels[j] = remap[labels[j]];
  }
  return out;
}

Dendrogram agglomerate(const FilterMatrix& filters, std::size_t threads) {
  return agglomerate(pairwise_sq_distances(filters, threads));
}

Dendrogram agglomerate(const SquareMatrix& sq_distances) {
  const std::size_t n = sq_distances.size();
  Dendrogram out;
  out.n_leaves = n;
  if (n < 2) return out;
  out.merges.reserve(n - 1);

  constexpr auto none = std::numeric_limits<std::size_t>::max();
  constexpr double inf = std::numeric_limits<double>::infinity();

  // Ward cost between singletons is half the squared distance.
  SquareMatrix cost(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) cost(i, j) = 0.5 * sq_distances(i, j);
  }

  // Slots hold live clusters; `order` lists live slots by ascending node id.
  // A merged cluster takes the lower slot and the largest node id, so it is
  // always appended at the back of `order`.
  std::vector<std::size_t> node_of(n), size(n, 1), order(n);
  std::iota(node_of.begin(), node_of.end(), 0);
  std::iota(order.begin(), order.end(), 0);

  // nn[p]: live slot with a larger node id minimizing cost(p, .), first in
  // node-id order on ties.
  std::vector<std::size_t> nn(n, none);
  std::vector<double> nn_cost(n, inf);
  auto refresh = [&](std::size_t p) {
    nn[p] = none;
    nn_cost[p] = inf;
    bool after = false;
    for (std::size_t q : order) {
      if (q == p) {
        after = true;
      } else if (after && cost(p, q) < nn_cost[p]) {
        nn[p] = q;
        nn_cost[p] = cost(p, q);
      }
    }
  };
  for (std::size_t p : order) refresh(p);

  for (std::size_t step = 0; step + 1 < n; ++step) {
    std::size_t a = none;
    for (std::size_t p : order) {
      if (nn[p] != none && (a == none || nn_cost[p] < nn_cost[a])) a = p;
    }
    const std::size_t b = nn[a];
    const double merge_cost = cost(a, b);
    const std::size_t sa = size[a], sb = size[b];
    out.merges.push_back({node_of[a], node_of[b], merge_cost, sa + sb});

    for (std::size_t q : order) {
      if (q == a || q == b) continue;
      const double sq = static_cast<double>(size[q]);
      const double total = static_cast<double>(sa + sb) + sq;
      const double v = ((static_cast<double>(sa) + sq) * cost(a, q) +
                        (static_cast<double>(sb) + sq) * cost(b, q) - sq * merge_cost) /
                       total;
      cost(a, q) = v;
      cost(q, a) = v;
    }
    size[a] = sa + sb;
    node_of[a] = n + step;
    std::erase(order, a);
    std::erase(order, b);
    order.push_back(a);
    nn[a] = none;
    nn_cost[a] = inf;
    nn[b] = none;

    for (std::size_t p : order) {
      if (p == a) continue;
      if (nn[p] == a || nn[p] == b) {
        refresh(p);
      } else if (cost(p, a) < nn_cost[p]) {
        nn[p] = a;
        nn_cost[p] = cost(p, a);
      }
    }
  }
  return out;
}

ClusterAssignment cut(const Dendrogram& dendrogram, std::size_t k) {
  const std::size_t n = dendrogram.n_leaves;
  if (k < 1 || k > n) {
    throw Error(Errc::out_of_range, "cut: k=" + std::to_string(k) + " outside [1, " + std::to_string(n) + "]");
  }
  if (dendrogram.merges.size() + 1 != n) {
    throw Error(Errc::invalid_argument, "cut: dendrogram does not have n_leaves - 1 merges");
  }
  std::vector<std::size_t> parent(2 * n - 1);
  std::iota(parent.begin(), parent.end(), 0);
  for (std::size_t i = 0; i < n - k; ++i) {
    const Merge& m = dendrogram.merges[i];
    parent[m.left] = n + i;
    parent[m.right] = n + i;
  }
  std::vector<std::size_t> roots(n);
  for (std::size_t j = 0; j < n; ++j) {
    std::size_t r = j;
    while (parent[r] != r) r = parent[r];
    roots[j] = r;
  }
  return canonicalize(roots);
}

}  // namespace fprune
