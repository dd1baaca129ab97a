#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "isp/pipeline.hpp"
#include "support/builders.hpp"
#include "support/oracles.hpp"

using namespace isp;
using testing_support::make_catalog;
using testing_support::make_embedding;
using testing_support::make_item;

namespace {

// 10 items / 6 labels with enough overlap that the optimum is interesting.
Catalog ten_item_catalog() {
  return make_catalog(
      {
          make_item("i0", {{"g", "l1"}, {"g", "l2"}}),
          make_item("i1", {{"g", "l2"}, {"g", "l3"}}),
          make_item("i2", {{"g", "l3"}}),
          make_item("i3", {{"g", "l4"}, {"g", "l5"}}),
          make_item("i4", {{"g", "l5"}, {"g", "l6"}}),
          make_item("i5", {{"g", "l6"}, {"g", "l1"}}),
          make_item("i6", {{"g", "l2"}}),
          make_item("i7", {{"g", "l4"}}),
          make_item("i8", {{"g", "l6"}}),
          make_item("i9", {{"g", "l1"}}),
      },
      {"g"});
}

EmbeddingMatrix ten_item_embedding() {
  // Two loose groups so the diversity costs are not degenerate.
  return make_embedding(2, {0, 0,   1, 0,   0, 1,   10, 10, 11, 10,
                            10, 11, 1, 1,   11, 11, 12, 10, 2, 0},
                        Metric::euclidean,
                        {"i0", "i1", "i2", "i3", "i4", "i5", "i6", "i7", "i8", "i9"});
}

oracle::Instance oracle_instance(const IncidenceMatrix& m) {
  oracle::Instance inst;
  inst.rows = m.row_count();
  inst.sets.resize(m.col_count());
  for (std::size_t c = 0; c < m.col_count(); ++c)
    for (std::size_t r = 0; r < m.row_count(); ++r)
      if (m.at(r, c)) inst.sets[c].push_back(r);
  return inst;
}

std::size_t union_rows(const IncidenceMatrix& m, const std::vector<std::size_t>& cols) {
  std::size_t covered = 0;
  for (std::size_t r = 0; r < m.row_count(); ++r)
    for (std::size_t c : cols)
      if (m.at(r, c)) {
        ++covered;
        break;
      }
  return covered;
}

}  // namespace

TEST_CASE("dominating item: k=1 and the final selection is that item") {
  Catalog c = make_catalog(
      {make_item("hero", {{"g", "a"}, {"g", "b"}, {"g", "c"}}),
       make_item("x1", {{"g", "a"}}), make_item("x2", {{"g", "b"}}),
       make_item("x3", {{"g", "c"}})},
      {"g"});
  EmbeddingMatrix e = make_embedding(2, {0, 0, 1, 0, 0, 1, 1, 1}, Metric::euclidean,
                                     {"hero", "x1", "x2", "x3"});
  IspConfig config;
  config.seed = 3;
  IspResult r = solve_isp(c, e, config);
  CHECK(r.k == 1);
  CHECK(r.clusters.k == 1);
  CHECK(r.final.item_ids == std::vector<std::string>{"hero"});
  CHECK(r.coverage.overall.fraction() == doctest::Approx(1.0));
}

TEST_CASE("ten-item fixture: full coverage and exhaustive-minimal size") {
  Catalog c = ten_item_catalog();
  EmbeddingMatrix e = ten_item_embedding();
  IspConfig config;
  config.seed = 17;
  config.backends = BackendPolicy::uniform(Backend::exact);
  IspResult r = solve_isp(c, e, config);

  const double optimum = oracle::min_cover_cost(oracle_instance(r.incidence));
  CHECK(r.unicost.objective == doctest::Approx(optimum));
  CHECK(r.k == static_cast<std::size_t>(optimum));
  CHECK(r.final.item_ids.size() <= r.k);
  CHECK(r.final.covered_rows == r.incidence.row_count());
  CHECK(r.coverage.overall.fraction() == doctest::Approx(1.0));
}

TEST_CASE("ten-item fixture, t=2: covered rows equal the max-cover@2 optimum") {
  Catalog c = ten_item_catalog();
  EmbeddingMatrix e = ten_item_embedding();
  IspConfig config;
  config.seed = 17;
  config.t = 2;
  config.backends = BackendPolicy::uniform(Backend::exact);
  IspResult r = solve_isp(c, e, config);
  REQUIRE(r.final.item_ids.size() == 2);

  // Brute force over all 2-subsets of the diverse selection.
  std::size_t best = 0;
  const auto& cand = r.diverse.item_indices;
  for (std::size_t a = 0; a < cand.size(); ++a)
    for (std::size_t b = a + 1; b < cand.size(); ++b)
      best = std::max(best, union_rows(r.incidence, {cand[a], cand[b]}));
  CHECK(r.final.covered_rows == best);
}

TEST_CASE("t at or above the diverse size returns diverse unchanged") {
  Catalog c = ten_item_catalog();
  EmbeddingMatrix e = ten_item_embedding();
  IspConfig config;
  config.seed = 17;
  IspResult unbounded = solve_isp(c, e, config);
  config.t = unbounded.diverse.item_ids.size();
  IspResult bounded = solve_isp(c, e, config);
  CHECK(bounded.final.item_ids == bounded.diverse.item_ids);
  CHECK(bounded.final.item_ids == unbounded.final.item_ids);
}

TEST_CASE("t=0 is invalid") {
  IspConfig config;
  config.t = 0;
  CHECK_THROWS_AS(solve_isp(ten_item_catalog(), ten_item_embedding(), config), Error);
}

TEST_CASE("same seed, same result; solve is deterministic") {
  Catalog c = ten_item_catalog();
  EmbeddingMatrix e = ten_item_embedding();
  IspConfig config;
  config.seed = 99;
  IspResult a = solve_isp(c, e, config);
  IspResult b = solve_isp(c, e, config);
  CHECK(a.final.item_ids == b.final.item_ids);
  CHECK(a.costs == b.costs);
  CHECK(a.clusters.centroids == b.clusters.centroids);
}

TEST_CASE("diversity mode: cardinality bound caps, warm start merely seeds") {
  // Both cheap singles beat the bundle once multipliers kick in, but only
  // warm_start mode may take two items when k = 1.
  Catalog c = make_catalog({make_item("bundle", {{"g", "a"}, {"g", "b"}}),
                            make_item("singleA", {{"g", "a"}}),
                            make_item("singleB", {{"g", "b"}})},
                           {"g"});
  EmbeddingMatrix e = make_embedding(2, {9, 0, 0, 1, 0, -1}, Metric::euclidean,
                                     {"bundle", "singleA", "singleB"});
  IspConfig config;
  config.seed = 5;
  config.backends = BackendPolicy::uniform(Backend::exact);
  config.cost_multipliers = {{"singleA", 0.001}, {"singleB", 0.001}};

  config.diversity_mode = DiversityMode::cardinality_bound;
  IspResult capped = solve_isp(c, e, config);
  CHECK(capped.k == 1);
  CHECK(capped.diverse.item_ids == std::vector<std::string>{"bundle"});

  config.diversity_mode = DiversityMode::warm_start;
  IspResult seeded = solve_isp(c, e, config);
  CHECK(seeded.diverse.item_ids == std::vector<std::string>{"singleA", "singleB"});
  CHECK(seeded.coverage.overall.fraction() == doctest::Approx(1.0));
}

TEST_CASE("cost multipliers must be positive and reference known items") {
  IspConfig config;
  config.cost_multipliers = {{"i0", -1.0}};
  CHECK_THROWS_AS(solve_isp(ten_item_catalog(), ten_item_embedding(), config), Error);
  config.cost_multipliers = {{"ghost", 1.0}};
  CHECK_THROWS_AS(solve_isp(ten_item_catalog(), ten_item_embedding(), config), Error);
}

TEST_CASE("category subset and pair categories flow through the flow") {
  Catalog c = make_catalog(
      {make_item("m1", {{"genre", "a"}, {"lang", "en"}, {"junk", "zz"}}),
       make_item("m2", {{"genre", "b"}, {"lang", "fr"}, {"junk", "zz"}})},
      {"genre", "lang", "junk"});
  EmbeddingMatrix e =
      make_embedding(1, {0.0, 1.0}, Metric::euclidean, {"m1", "m2"});
  IspConfig config;
  config.seed = 1;
  config.categories = {"genre", "lang"};
  config.pair_categories = {{"genre", "lang"}};
  IspResult r = solve_isp(c, e, config);
  // rows: genre a/b, lang en/fr, pairs a x en / b x fr -> both items required
  CHECK(r.incidence.row_count() == 6);
  CHECK(r.final.item_ids.size() == 2);
  bool saw_junk = false;
  for (const Label& l : r.incidence.labels) saw_junk |= l.category == "junk";
  CHECK_FALSE(saw_junk);
}

TEST_CASE("embedding size must match the catalog") {
  IspConfig config;
  EmbeddingMatrix wrong = make_embedding(2, {1, 2, 3, 4});
  CHECK_THROWS_AS(solve_isp(ten_item_catalog(), wrong, config), Error);
}

TEST_CASE("coverage: empty selection covers nothing") {
  IncidenceMatrix inc = build_incidence(ten_item_catalog());
  Selection none;
  CoverageReport r = coverage(none, inc);
  CHECK(r.overall.covered == 0);
  CHECK(r.overall.fraction() == 0.0);
  for (const auto& [cat, cc] : r.per_category) CHECK(cc.covered == 0);
}

TEST_CASE("coverage: full catalog covers every coverable row") {
  Catalog c = ten_item_catalog();
  IncidenceMatrix inc = build_incidence(c);
  Selection all;
  for (const Item& item : c.items) all.item_ids.push_back(item.id);
  CoverageReport r = coverage(all, inc);
  CHECK(r.overall.covered == inc.row_count());
  CHECK(r.overall.fraction() == doctest::Approx(1.0));
}

TEST_CASE("coverage: fractions equal a brute-force union, per category") {
  Catalog c = make_catalog(
      {make_item("m1", {{"genre", "a"}, {"lang", "en"}}),
       make_item("m2", {{"genre", "b"}, {"lang", "fr"}}),
       make_item("m3", {{"genre", "c"}, {"lang", "fr"}})},
      {"genre", "lang"});
  IncidenceMatrix inc = build_incidence(c);
  Selection sel;
  sel.item_ids = {"m1", "m3"};
  CoverageReport r = coverage(sel, inc);
  CHECK(r.overall.covered == 4);  // a, c, en, fr
  CHECK(r.overall.total == 5);
  REQUIRE(r.per_category.size() == 2);
  CHECK(r.per_category[0].first == "genre");
  CHECK(r.per_category[0].second.covered == 2);
  CHECK(r.per_category[0].second.total == 3);
  CHECK(r.per_category[1].second.covered == 2);
  CHECK(r.per_category[1].second.total == 2);
}

TEST_CASE("coverage: unknown selection id is rejected") {
  IncidenceMatrix inc = build_incidence(ten_item_catalog());
  Selection sel;
  sel.item_ids = {"ghost"};
  CHECK_THROWS_AS(coverage(sel, inc), Error);
}

TEST_CASE("baselines: exhaustive size returns all items, seeds reproduce") {
  Catalog c = ten_item_catalog();
  EmbeddingMatrix e = ten_item_embedding();
  Selection r1 = baseline_random(c, c.size(), 4);
  CHECK(r1.item_ids.size() == c.size());
  Selection r2 = baseline_random(c, 4, 123);
  Selection r3 = baseline_random(c, 4, 123);
  CHECK(r2.item_ids == r3.item_ids);
  CHECK(r2.item_ids.size() == 4);
  Selection k1 = baseline_kmeans(c, e, c.size(), 9);
  CHECK(k1.item_ids.size() == c.size());
}

TEST_CASE("baseline sizes are validated") {
  Catalog c = ten_item_catalog();
  CHECK_THROWS_AS(baseline_random(c, 0, 1), Error);
  CHECK_THROWS_AS(baseline_random(c, c.size() + 1, 1), Error);
}

TEST_CASE("kmeans baseline: two blobs, size 2, one representative each") {
  std::vector<Item> items;
  std::vector<double> data;
  for (int i = 0; i < 8; ++i) {
    items.push_back(make_item("p" + std::to_string(i), {{"g", "x"}}));
    data.push_back(i < 4 ? 0.0 + i * 0.1 : 50.0 + i * 0.1);
    data.push_back(0.0);
  }
  std::vector<std::string> ids;
  for (const auto& item : items) ids.push_back(item.id);
  Catalog c = make_catalog(std::move(items), {"g"});
  EmbeddingMatrix e = make_embedding(2, std::move(data), Metric::euclidean, ids);
  Selection s = baseline_kmeans(c, e, 2, 21);
  REQUIRE(s.item_ids.size() == 2);
  const bool first_low = s.item_indices[0] < 4;
  const bool second_low = s.item_indices[1] < 4;
  CHECK(first_low != second_low);
}
