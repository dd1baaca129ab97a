#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <random>
#include <sstream>

#include "isp/embedding.hpp"
#include "support/builders.hpp"
#include "support/oracles.hpp"

using namespace isp;
using testing_support::make_catalog;
using testing_support::make_item;
using testing_support::write_temp;

namespace {

// Independent tf-idf reference: same stated formulas, separate code path.
std::map<std::string, std::map<std::string, double>> reference_tfidf(
    const std::vector<std::pair<std::string, std::string>>& docs) {
  auto tokenize = [](const std::string& text) {
    std::vector<std::string> tokens;
    std::string current;
    for (char ch : text) {
      if (std::isalnum(static_cast<unsigned char>(ch))) {
        current.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
      } else if (!current.empty()) {
        tokens.push_back(current);
        current.clear();
      }
    }
    if (!current.empty()) tokens.push_back(current);
    return tokens;
  };
  std::map<std::string, std::size_t> df;
  for (const auto& [id, text] : docs) {
    std::map<std::string, bool> seen;
    for (const auto& tok : tokenize(text))
      if (!seen[tok]) {
        seen[tok] = true;
        ++df[tok];
      }
  }
  const double n = static_cast<double>(docs.size());
  std::map<std::string, std::map<std::string, double>> rows;
  for (const auto& [id, text] : docs) {
    std::map<std::string, double> tf;
    for (const auto& tok : tokenize(text)) tf[tok] += 1.0;
    for (auto& [tok, count] : tf)
      rows[id][tok] = count * (std::log(n / (1.0 + static_cast<double>(df[tok]))) + 1.0);
  }
  return rows;
}

}  // namespace

TEST_CASE("tfidf: identical single-word texts give identical rows, cosine 0") {
  Catalog c = make_catalog({make_item("a", {}, "word"), make_item("b", {}, "word")}, {});
  EmbeddingMatrix e = tfidf_embed(c, 16, false);
  e.set_metric(Metric::cosine);
  CHECK(pairwise_distance(e, 0, 1) == doctest::Approx(0.0));
}

TEST_CASE("tfidf: disjoint vocabularies give orthogonal rows, cosine 1") {
  Catalog c = make_catalog({make_item("a", {}, "a b"), make_item("b", {}, "c d")}, {});
  EmbeddingMatrix e = tfidf_embed(c, 16, false);
  e.set_metric(Metric::cosine);
  CHECK(pairwise_distance(e, 0, 1) == doctest::Approx(1.0));
}

TEST_CASE("tfidf: 20-document corpus matches the reference computation") {
  std::vector<std::pair<std::string, std::string>> docs;
  for (int i = 0; i < 20; ++i) {
    std::string text;
    if (i < 5) text += "alpha ";
    if (i == 0) text += "alpha ";  // tf(alpha)=2 in doc 0
    if (i % 2 == 0) text += "beta ";
    if (i % 4 == 0) text += "gamma gamma ";
    text += "delta" + std::to_string(i % 7);
    docs.emplace_back("d" + std::to_string(i), text);
  }
  std::vector<Item> items;
  for (const auto& [id, text] : docs) items.push_back(make_item(id, {}, text));
  Catalog c = make_catalog(std::move(items), {});

  std::vector<std::string> vocab;
  EmbeddingMatrix e = tfidf_embed(c, 64, false, &vocab);
  auto ref = reference_tfidf(docs);
  for (std::size_t i = 0; i < c.size(); ++i) {
    auto row = e.row(i);
    for (std::size_t t = 0; t < vocab.size(); ++t) {
      const auto& expected = ref[c.items[i].id];
      auto it = expected.find(vocab[t]);
      const double want = it == expected.end() ? 0.0 : it->second;
      CHECK(row[t] == doctest::Approx(want).epsilon(1e-12));
    }
  }
  // Frozen spot value: doc 0 has tf(alpha)=2, df(alpha)=5, N=20:
  // 2 * (ln(20/6) + 1) = 4.4079456086518722
  const std::size_t alpha_col =
      std::find(vocab.begin(), vocab.end(), "alpha") - vocab.begin();
  REQUIRE(alpha_col < vocab.size());
  CHECK(e.row(0)[alpha_col] == doctest::Approx(4.4079456086518722).epsilon(1e-14));
}

TEST_CASE("tfidf: vocabulary capped by document frequency, ties lexicographic") {
  // dfs: common=4, aa=2, bb=2, zz=1
  Catalog c = make_catalog({make_item("1", {}, "common aa"), make_item("2", {}, "common aa"),
                            make_item("3", {}, "common bb zz"), make_item("4", {}, "common bb")},
                           {});
  std::vector<std::string> vocab;
  EmbeddingMatrix e = tfidf_embed(c, 2, false, &vocab);
  CHECK(vocab == std::vector<std::string>{"common", "aa"});
  CHECK(e.dim() == 2);
}

TEST_CASE("tfidf: empty corpus is an error, empty text a zero row") {
  Catalog empty = make_catalog({make_item("a", {}, ""), make_item("b", {}, "")}, {});
  CHECK_THROWS_AS(tfidf_embed(empty, 8, false), Error);

  Catalog mixed = make_catalog({make_item("a", {}, "hello"), make_item("b", {}, "")}, {});
  EmbeddingMatrix e = tfidf_embed(mixed, 8, true);
  auto row = e.row(1);
  for (double x : row) CHECK(x == 0.0);
}

TEST_CASE("tfidf: normalize gives unit L2 rows for nonempty texts") {
  Catalog c = make_catalog({make_item("a", {}, "x y z"), make_item("b", {}, "x q")}, {});
  EmbeddingMatrix e = tfidf_embed(c, 8, true);
  for (std::size_t i = 0; i < 2; ++i) {
    double norm = 0.0;
    for (double x : e.row(i)) norm += x * x;
    CHECK(std::sqrt(norm) == doctest::Approx(1.0));
  }
}

TEST_CASE("distance: unit axes euclidean sqrt(2), identity zero") {
  std::vector<double> a{1.0, 0.0}, b{0.0, 1.0};
  CHECK(vector_distance(a, b, Metric::euclidean) == doctest::Approx(std::sqrt(2.0)));
  CHECK(vector_distance(a, a, Metric::euclidean) == 0.0);
}

TEST_CASE("distance: random set matches brute-force recomputation") {
  std::mt19937_64 rng(99);
  std::vector<std::vector<double>> points;
  std::vector<double> flat;
  for (int i = 0; i < 10; ++i) {
    std::vector<double> p;
    for (int d = 0; d < 6; ++d) p.push_back((rng() % 2000) / 500.0 - 2.0 + 0.25);
    points.push_back(p);
    flat.insert(flat.end(), p.begin(), p.end());
  }
  for (Metric metric : {Metric::euclidean, Metric::cosine}) {
    EmbeddingMatrix e = testing_support::make_embedding(6, flat, metric);
    for (std::size_t i = 0; i < 10; ++i) {
      CHECK(pairwise_distance(e, i, i) == 0.0);
      for (std::size_t j = 0; j < 10; ++j) {
        const double want = metric == Metric::euclidean
                                ? oracle::euclid(points[i], points[j])
                                : oracle::cosine_dist(points[i], points[j]);
        CHECK(pairwise_distance(e, i, j) == doctest::Approx(want).epsilon(1e-12));
        CHECK(pairwise_distance(e, i, j) == pairwise_distance(e, j, i));
      }
    }
  }
}

TEST_CASE("cosine metric rejects zero rows") {
  CHECK_THROWS_AS(
      testing_support::make_embedding(2, {1.0, 2.0, 0.0, 0.0}, Metric::cosine), Error);
  EmbeddingMatrix e = testing_support::make_embedding(2, {1.0, 2.0, 0.0, 0.0});
  CHECK_THROWS_AS(e.set_metric(Metric::cosine), Error);
}

TEST_CASE("embedding file: loads in catalog order regardless of row order") {
  Catalog c = make_catalog(
      {make_item("m1", {}, ""), make_item("m2", {}, ""), make_item("m3", {}, "")}, {});
  auto ordered = write_temp("embed", ".txt",
                            "dim=4 metric=euclidean\n"
                            "m1 1 0 0 0\nm2 0 1 0 0\nm3 0 0 1 0\n");
  auto shuffled = write_temp("embed", ".txt",
                             "dim=4 metric=euclidean\n"
                             "m3 0 0 1 0\nm1 1 0 0 0\nm2 0 1 0 0\n");
  EmbeddingMatrix a = load_embeddings(ordered, c);
  EmbeddingMatrix b = load_embeddings(shuffled, c);
  REQUIRE(a.size() == 3);
  CHECK(a.dim() == 4);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t d = 0; d < 4; ++d) CHECK(a.row(i)[d] == b.row(i)[d]);
  CHECK(a.row(1)[1] == 1.0);  // m2 row landed at index 1
}

TEST_CASE("embedding file: catalog id missing from file") {
  Catalog c = make_catalog({make_item("m1", {}, ""), make_item("m2", {}, "")}, {});
  auto path = write_temp("embed", ".txt", "dim=2 metric=euclidean\nm1 1 2\n");
  try {
    load_embeddings(path, c);
    FAIL("expected missing_item");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::missing_item);
    CHECK(std::string(e.what()).find("m2") != std::string::npos);
  }
}

TEST_CASE("embedding file: extra ids ignored, malformed rows rejected") {
  Catalog c = make_catalog({make_item("m1", {}, "")}, {});
  auto extra = write_temp("embed", ".txt",
                          "dim=2 metric=cosine\nm1 1 2\nghost 3 4\n");
  EmbeddingMatrix e = load_embeddings(extra, c);
  CHECK(e.size() == 1);
  CHECK(e.metric() == Metric::cosine);

  auto short_row = write_temp("embed", ".txt", "dim=3 metric=euclidean\nm1 1 2\n");
  CHECK_THROWS_AS(load_embeddings(short_row, c), Error);
  // Known header tokens may come in any order; unknown ones are rejected.
  auto reordered = write_temp("embed", ".txt", "metric=euclidean dim=2\nm1 1 2\n");
  CHECK(load_embeddings(reordered, c).dim() == 2);
  auto bad_header = write_temp("embed", ".txt", "dim=2 rows=1\nm1 1 2\n");
  CHECK_THROWS_AS(load_embeddings(bad_header, c), Error);
  auto dup = write_temp("embed", ".txt", "dim=2 metric=euclidean\nm1 1 2\nm1 3 4\n");
  CHECK_THROWS_AS(load_embeddings(dup, c), Error);
}

TEST_CASE("subset slices rows in the given order") {
  EmbeddingMatrix e = testing_support::make_embedding(2, {1, 2, 3, 4, 5, 6});
  EmbeddingMatrix s = e.subset({2, 0});
  REQUIRE(s.size() == 2);
  CHECK(s.row(0)[0] == 5.0);
  CHECK(s.row(1)[0] == 1.0);
  CHECK(s.item_ids()[0] == "e2");
}
