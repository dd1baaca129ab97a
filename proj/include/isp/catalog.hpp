#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "isp/error.hpp"

namespace isp {

/// One categorical tag, e.g. {"genre", "comedy"}. Composite rows built from
/// category pairs use {"a×b", "v1×v2"}.
struct Label {
  std::string category;
  std::string value;

  friend bool operator==(const Label&, const Label&) = default;
  friend auto operator<=>(const Label& a, const Label& b) {
    if (auto c = a.category <=> b.category; c != 0) return c;
    return a.value <=> b.value;
  }
};

struct Item {
  std::string id;
  std::vector<Label> labels;  // deduplicated, sorted
  std::string text;           // optional free text, used by the tfidf embedder
};

/// Item order is load order and defines column indices everywhere downstream.
struct Catalog {
  std::vector<Item> items;
  std::vector<std::string> categories;

  std::size_t size() const { return items.size(); }
  /// Index of an item id, or throws unknown_item.
  std::size_t index_of(const std::string& id) const;
  bool has_category(const std::string& category) const;

 private:
  mutable std::unordered_map<std::string, std::size_t> id_index_;
  friend Catalog finalize_catalog(std::vector<Item> items,
                                  std::vector<std::string> categories);
};

/// Builds a Catalog from already-parsed parts, checking id uniqueness.
Catalog finalize_catalog(std::vector<Item> items,
                         std::vector<std::string> categories);

enum class CatalogFormat { csv, json, auto_detect };

/// CSV header: id,text,<category1>,... with "|"-separated multi-values.
/// JSON: array of {id, text, labels:{category:[values]}}.
Catalog load_catalog(const std::filesystem::path& path,
                     CatalogFormat format = CatalogFormat::auto_detect);

/// Boolean label-by-item structure. Rows are sorted by (category, value);
/// columns follow catalog item order. Labels carried by no column are moved
/// to `uncoverable` so covering instances stay feasible.
struct IncidenceMatrix {
  std::vector<Label> labels;
  std::vector<std::string> item_ids;
  std::vector<std::vector<std::uint64_t>> row_bits;  // per row, blocks over columns
  std::vector<Label> uncoverable;

  std::size_t row_count() const { return labels.size(); }
  std::size_t col_count() const { return item_ids.size(); }
  bool at(std::size_t row, std::size_t col) const {
    return (row_bits[row][col >> 6] >> (col & 63)) & 1u;
  }
  std::size_t column_index(const std::string& item_id) const;
  /// Number of columns covering each row.
  std::vector<std::size_t> row_counts() const;
};

/// Builds the incidence structure over `categories` plus one composite row
/// per observed (category,category) value combination. Categories must exist
/// in the catalog; an empty category list means all catalog categories.
IncidenceMatrix build_incidence(
    const Catalog& catalog, std::vector<std::string> categories = {},
    const std::vector<std::pair<std::string, std::string>>& pair_categories = {});

/// Restriction to a column subset; rows left without any covering column are
/// dropped into `uncoverable`. Column order follows `columns`.
IncidenceMatrix restrict_columns(const IncidenceMatrix& m,
                                 const std::vector<std::size_t>& columns);

inline std::string composite_category(const std::string& a, const std::string& b) {
  return a + "×" + b;
}
inline std::string composite_value(const std::string& va, const std::string& vb) {
  return va + "×" + vb;
}

}  // namespace isp
