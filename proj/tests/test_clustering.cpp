#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <set>

#include "isp/clustering.hpp"
#include "support/builders.hpp"
#include "support/oracles.hpp"

using namespace isp;
using testing_support::make_embedding;

namespace {

EmbeddingMatrix random_points(std::mt19937_64& rng, std::size_t n, std::size_t dim,
                              Metric metric = Metric::euclidean) {
  std::vector<double> data;
  for (std::size_t i = 0; i < n * dim; ++i)
    data.push_back(static_cast<double>(rng() % 2000) / 100.0 - 10.0 + 0.005);
  return make_embedding(dim, std::move(data), metric);
}

}  // namespace

TEST_CASE("k equal to point count: every item its own centroid, inertia 0") {
  EmbeddingMatrix e = make_embedding(2, {0, 0, 5, 0, 0, 5, 9, 9});
  ClusterModel m = kmeans(e, 4, 123);
  CHECK(m.inertia == doctest::Approx(0.0));
  std::set<std::size_t> clusters(m.assignments.begin(), m.assignments.end());
  CHECK(clusters.size() == 4);
}

TEST_CASE("two well-separated blobs are recovered exactly at k=2") {
  std::mt19937_64 rng(2024);
  std::vector<double> data;
  for (int i = 0; i < 12; ++i) {
    const double cx = i < 6 ? 0.0 : 100.0;
    data.push_back(cx + static_cast<double>(rng() % 100) / 100.0);
    data.push_back(static_cast<double>(rng() % 100) / 100.0);
  }
  ClusterModel m = kmeans(make_embedding(2, data), 2, 7);
  for (int i = 1; i < 6; ++i) CHECK(m.assignments[i] == m.assignments[0]);
  for (int i = 7; i < 12; ++i) CHECK(m.assignments[i] == m.assignments[6]);
  CHECK(m.assignments[0] != m.assignments[6]);
}

TEST_CASE("fixed seed reproduces centroids bit for bit") {
  std::mt19937_64 rng(555);
  EmbeddingMatrix e = random_points(rng, 100, 3);
  ClusterModel a = kmeans(e, 5, 99);
  ClusterModel b = kmeans(e, 5, 99);
  CHECK(a.centroids == b.centroids);
  CHECK(a.assignments == b.assignments);
  CHECK(a.inertia == b.inertia);
}

TEST_CASE("lloyd inertia is non-increasing under both metrics") {
  std::mt19937_64 rng(31337);
  for (int rep = 0; rep < 10; ++rep) {
    for (Metric metric : {Metric::euclidean, Metric::cosine}) {
      EmbeddingMatrix e = random_points(rng, 40 + rep * 5, 4, metric);
      ClusterModel m = kmeans(e, 3 + rep % 4, 1000 + rep);
      REQUIRE(!m.inertia_history.empty());
      for (std::size_t i = 1; i < m.inertia_history.size(); ++i)
        CHECK(m.inertia_history[i] <= m.inertia_history[i - 1] + 1e-9);
      CHECK(m.inertia == doctest::Approx(m.inertia_history.back()));
    }
  }
}

TEST_CASE("every cluster ends up non-empty") {
  std::mt19937_64 rng(808);
  for (int rep = 0; rep < 8; ++rep) {
    EmbeddingMatrix e = random_points(rng, 20, 2);
    const std::size_t k = 2 + rep * 2;
    ClusterModel m = kmeans(e, k, rep);
    std::set<std::size_t> seen(m.assignments.begin(), m.assignments.end());
    CHECK(seen.size() == k);
  }
}

TEST_CASE("repair survives heavy duplication") {
  // 16 copies of one point plus 4 outliers, k=5: duplicates cannot feed 5
  // distinct centroids without the farthest-point reseeding.
  std::vector<double> data;
  for (int i = 0; i < 16; ++i) {
    data.push_back(1.0);
    data.push_back(1.0);
  }
  for (int i = 0; i < 4; ++i) {
    data.push_back(50.0 + 10.0 * i);
    data.push_back(-20.0 * i);
  }
  ClusterModel m = kmeans(make_embedding(2, data), 5, 42);
  std::set<std::size_t> seen(m.assignments.begin(), m.assignments.end());
  CHECK(seen.size() == 5);
}

TEST_CASE("invalid k is rejected") {
  EmbeddingMatrix e = make_embedding(2, {1, 2, 3, 4});
  CHECK_THROWS_AS(kmeans(e, 0, 1), Error);
  CHECK_THROWS_AS(kmeans(e, 3, 1), Error);
}

TEST_CASE("diversity costs: analytic cases") {
  ClusterModel model;
  model.k = 1;
  model.dim = 2;
  model.metric = Metric::euclidean;
  model.centroids = {0.0, 0.0};
  model.assignments = {0, 0};
  EmbeddingMatrix e = make_embedding(2, {3.0, 4.0, 0.0, 0.0});
  auto costs = diversity_costs(e, model);
  REQUIRE(costs.size() == 2);
  CHECK(costs[0] == doctest::Approx(5.0));
  CHECK(costs[1] == doctest::Approx(0.0));
}

TEST_CASE("diversity costs match a brute-force nearest-centroid scan") {
  std::mt19937_64 rng(606);
  EmbeddingMatrix e = random_points(rng, 60, 3);
  ClusterModel m = kmeans(e, 6, 11);
  auto costs = diversity_costs(e, m);
  for (std::size_t i = 0; i < e.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    std::vector<double> p(e.row(i).begin(), e.row(i).end());
    for (std::size_t c = 0; c < m.k; ++c) {
      std::vector<double> cent(m.centroid(c).begin(), m.centroid(c).end());
      best = std::min(best, oracle::euclid(p, cent));
    }
    CHECK(costs[i] == doctest::Approx(best).epsilon(1e-12));
  }
}

TEST_CASE("dimension mismatch between embedding and model is rejected") {
  std::mt19937_64 rng(1);
  EmbeddingMatrix e = random_points(rng, 10, 3);
  ClusterModel m = kmeans(e, 2, 5);
  EmbeddingMatrix other = random_points(rng, 4, 2);
  CHECK_THROWS_AS(diversity_costs(other, m), Error);
}
