#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "isp/catalog.hpp"
#include "isp/error.hpp"

namespace isp {

enum class Metric { euclidean, cosine };

Metric metric_from_name(const std::string& name);
const char* metric_name(Metric m);

/// Dense |items| x dim matrix, rows aligned to catalog item order.
/// Entries are always finite; under the cosine metric zero rows are invalid.
class EmbeddingMatrix {
 public:
  EmbeddingMatrix() = default;
  EmbeddingMatrix(std::vector<std::string> item_ids, std::size_t dim,
                  std::vector<double> data, Metric metric);

  std::size_t size() const { return item_ids_.size(); }
  std::size_t dim() const { return dim_; }
  Metric metric() const { return metric_; }
  const std::vector<std::string>& item_ids() const { return item_ids_; }
  std::size_t index_of(const std::string& id) const;

  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * dim_, dim_};
  }

  /// Switching to cosine re-validates that no row is zero.
  void set_metric(Metric m);

  /// Row subset in the given order (used to slice simulation universes).
  EmbeddingMatrix subset(const std::vector<std::size_t>& rows) const;

 private:
  std::vector<std::string> item_ids_;
  std::size_t dim_ = 0;
  std::vector<double> data_;
  Metric metric_ = Metric::euclidean;
};

/// Metric distance between two raw vectors.
double vector_distance(std::span<const double> a, std::span<const double> b,
                       Metric metric);

/// Metric distance between items i and j; exactly 0 when i == j.
double pairwise_distance(const EmbeddingMatrix& e, std::size_t i, std::size_t j);

/// Native tf-idf embedder over item texts.
///   tokens: lowercased, split on non-alphanumerics
///   idf = ln(N / (1 + df)) + 1, tf = raw count, entry = tf * idf
///   vocabulary = top vocab_size terms by document frequency, ties lexicographic
/// Items with empty text get a zero row (callers may warn). Throws
/// empty_corpus when no item has text.
EmbeddingMatrix tfidf_embed(const Catalog& catalog, std::size_t vocab_size,
                            bool normalize,
                            std::vector<std::string>* vocabulary_out = nullptr);

/// Text format: header "dim=<d> metric=<m>", then "id v1 .. vd" per line.
/// Rows are reordered to catalog order; ids absent from the catalog are
/// ignored, catalog ids missing from the file raise missing_item.
EmbeddingMatrix load_embeddings(const std::filesystem::path& path,
                                const Catalog& catalog);

}  // namespace isp
