#include <doctest.h>

#include <random>

#include "fprune/analysis.hpp"
#include "fprune/error.hpp"
#include "fprune/pipeline.hpp"
#include "fprune/zoo.hpp"
#include "oracles.hpp"

using namespace fprune;

namespace {

ModelSnapshot perturbed(ModelSnapshot s, double scale, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> nd(0.0f, static_cast<float>(scale));
  for (auto& [name, t] : s.tensors)
    for (float& v : t.data) v += nd(rng);
  return s;
}

ModelSnapshot flipped(ModelSnapshot s) {
  for (const auto& c : s.conv_layers())
    for (float& v : s.tensors.at(c + ".weight").data) v = -v;
  return s;
}

}  // namespace

TEST_SUITE("analysis") {
  TEST_CASE("cosine examples") {
    const std::vector<float> v{1, 2, 3}, w{-1, -2, -3}, x{1, 0}, y{0, 1}, z{0, 0};
    CHECK(cosine_similarity(v, v).value == doctest::Approx(1.0));
    CHECK(cosine_similarity(x, y).value == 0.0);
    CHECK(cosine_similarity(v, w).value == doctest::Approx(-1.0));
    const auto zn = cosine_similarity(x, z);
    CHECK(zn.zero_norm);
    CHECK(zn.value == 0.0);
    CHECK_THROWS_AS(cosine_similarity(v, x), Error);
  }

  TEST_CASE("histogram bins") {
    CHECK(histogram_bin(-1.0) == 0);
    CHECK(histogram_bin(1.0) == 19);
    CHECK(histogram_bin(0.0) == 10);
    CHECK(histogram_bin(-0.05) == 9);
    CHECK(histogram_bin(0.35) == 13);
  }

  TEST_CASE("unchanged and sign-flipped weights") {
    const auto s = zoo::conv_chain({6, 5}, 3, 4, 2);
    const auto r = prune_model(s, {});
    const auto same = similarity_report(s, r.pruned, r.plan);
    CHECK(same.total == r.pruned.tensors.at("conv1.weight").shape[0] + r.pruned.tensors.at("conv2.weight").shape[0]);
    for (const auto& l : same.per_layer)
      for (double c : l.cosines) CHECK(c == doctest::Approx(1.0));
    CHECK(same.histogram[19] == same.total);

    const auto neg = similarity_report(s, flipped(r.pruned), r.plan);
    for (const auto& l : neg.per_layer)
      for (double c : l.cosines) CHECK(c == doctest::Approx(-1.0));
    CHECK(neg.mean == doctest::Approx(-1.0));
  }

  TEST_CASE("random perturbation matches a per-filter loop and is symmetric") {
    const auto s = zoo::vgg16_cifar();
    const auto r = prune_model(s, {});
    const auto after = perturbed(r.pruned, 0.2, 77);
    const auto rep = similarity_report(s, after, r.plan);
    for (const auto& l : rep.per_layer) {
      const auto a = oracle::rows_of(filters_of(r.pruned, l.name));
      const auto b = oracle::rows_of(filters_of(after, l.name));
      REQUIRE(a.size() == l.cosines.size());
      for (std::size_t j = 0; j < a.size(); ++j) {
        double dot = 0, na = 0, nb = 0;
        for (std::size_t d = 0; d < a[j].size(); ++d) {
          dot += a[j][d] * b[j][d];
          na += a[j][d] * a[j][d];
          nb += b[j][d] * b[j][d];
        }
        CHECK(l.cosines[j] == doctest::Approx(dot / std::sqrt(na * nb)).epsilon(1e-9));
        CHECK(l.cosines[j] >= -1.0);
        CHECK(l.cosines[j] <= 1.0);
      }
    }
    const auto back = similarity_report_aligned(after, r.pruned);
    CHECK(back.mean == rep.mean);
    CHECK(back.histogram == rep.histogram);
    CHECK(rep.fraction_in(-1.0, 1.0) == doctest::Approx(1.0));
  }

  TEST_CASE("shape mismatch is reported") {
    const auto s = zoo::conv_chain({6, 5}, 3, 4, 2);
    const auto r = prune_model(s, {});
    try {
      similarity_report_aligned(s, r.pruned);
      FAIL("expected shape_mismatch");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::shape_mismatch);
    }
  }

  TEST_CASE("lambda sweep") {
    const auto s = zoo::resnet_cifar(20);
    const std::vector<double> lambdas{0.1, 0.5, 0.9, 1.0};
    const auto t = lambda_sweep(s, lambdas);
    CHECK(t.rows.size() == lambdas.size() * s.conv_layers().size());
    CHECK(t.totals.size() == lambdas.size());
    std::map<double, std::size_t> kept;
    for (const auto& row : t.rows) {
      kept[row.lambda] += row.kept;
      const auto n = static_cast<std::size_t>(row.n_out);
      const auto floor_k = std::min(static_cast<std::size_t>(std::floor(row.n_out * row.lambda + 1e-9)), n - 1);
      const std::size_t bound = floor_k > row.dropped_clusters ? floor_k - row.dropped_clusters : 1;
      CHECK(row.kept >= std::max<std::size_t>(bound, 1));
      CHECK(row.elected <= static_cast<std::size_t>(row.n_out - 1));
    }
    CHECK(kept[0.9] >= kept[0.1]);
    CHECK(t.totals[0].flops_reduction >= t.totals[2].flops_reduction);
    // lambda = 1 cuts at n - 1 clusters: one filter removed per prunable layer
    for (const auto& row : t.rows) {
      if (row.lambda == 1.0) {
        CHECK(row.k_star == static_cast<std::size_t>(row.n_out - 1));
      }
    }
  }
}
