#include "isp/catalog.hpp"

#include <algorithm>
#include <bit>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace isp {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_multi_value(const std::string& cell) {
  std::vector<std::string> out;
  std::string piece;
  std::stringstream ss(cell);
  while (std::getline(ss, piece, '|')) {
    piece = trim(piece);
    if (!piece.empty()) out.push_back(piece);
  }
  return out;
}

// Minimal RFC-4180 reader: quoted fields may contain commas, doubled quotes
// and newlines. Returns one record per call; tracks line numbers for errors.
class CsvReader {
 public:
  explicit CsvReader(std::istream& in) : in_(in) {}

  bool next(std::vector<std::string>& fields, std::size_t& line_out) {
    fields.clear();
    int c = in_.get();
    // skip blank lines
    while (c == '\n' || (c == '\r' && in_.peek() == '\n')) {
      if (c == '\r') in_.get();
      ++line_;
      c = in_.get();
    }
    if (c == EOF) return false;
    line_out = line_;
    std::string field;
    bool quoted = false;
    while (true) {
      if (c == EOF) {
        fields.push_back(field);
        if (quoted) fail("unterminated quoted field");
        return true;
      }
      if (quoted) {
        if (c == '"') {
          if (in_.peek() == '"') {
            field.push_back('"');
            in_.get();
          } else {
            quoted = false;
          }
        } else {
          if (c == '\n') ++line_;
          field.push_back(static_cast<char>(c));
        }
      } else if (c == '"' && field.empty()) {
        quoted = true;
      } else if (c == ',') {
        fields.push_back(field);
        field.clear();
      } else if (c == '\n' || c == '\r') {
        if (c == '\r' && in_.peek() == '\n') in_.get();
        ++line_;
        fields.push_back(field);
        return true;
      } else {
        field.push_back(static_cast<char>(c));
      }
      c = in_.get();
    }
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorKind::parse,
                "csv line " + std::to_string(line_) + ": " + what);
  }

 private:
  std::istream& in_;
  std::size_t line_ = 1;
};

void normalize_labels(Item& item) {
  std::sort(item.labels.begin(), item.labels.end());
  item.labels.erase(std::unique(item.labels.begin(), item.labels.end()),
                    item.labels.end());
}

Catalog load_csv(std::istream& in) {
  CsvReader reader(in);
  std::vector<std::string> header;
  std::size_t line = 0;
  if (!reader.next(header, line) || header.size() < 2 || trim(header[0]) != "id" ||
      trim(header[1]) != "text") {
    throw Error(ErrorKind::parse, "csv header must start with id,text");
  }
  std::vector<std::string> categories;
  for (std::size_t i = 2; i < header.size(); ++i) {
    std::string cat = trim(header[i]);
    if (cat.empty())
      throw Error(ErrorKind::parse, "csv header has an empty category name");
    if (std::find(categories.begin(), categories.end(), cat) != categories.end())
      throw Error(ErrorKind::parse, "csv header repeats category '" + cat + "'");
    categories.push_back(cat);
  }

  std::vector<Item> items;
  std::vector<std::string> fields;
  while (reader.next(fields, line)) {
    if (fields.size() != header.size()) {
      throw Error(ErrorKind::parse, "csv line " + std::to_string(line) +
                                        ": expected " + std::to_string(header.size()) +
                                        " fields, got " + std::to_string(fields.size()));
    }
    Item item;
    item.id = trim(fields[0]);
    if (item.id.empty())
      throw Error(ErrorKind::parse,
                  "csv line " + std::to_string(line) + ": empty item id");
    item.text = fields[1];
    for (std::size_t i = 0; i < categories.size(); ++i) {
      for (auto& value : split_multi_value(fields[i + 2])) {
        item.labels.push_back({categories[i], std::move(value)});
      }
    }
    normalize_labels(item);
    items.push_back(std::move(item));
  }
  return finalize_catalog(std::move(items), std::move(categories));
}

Catalog load_json(std::istream& in) {
  nlohmann::ordered_json doc;
  try {
    doc = nlohmann::ordered_json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::parse, std::string("json: ") + e.what());
  }
  if (!doc.is_array())
    throw Error(ErrorKind::parse, "json catalog must be an array of objects");

  std::vector<Item> items;
  std::vector<std::string> categories;
  for (std::size_t idx = 0; idx < doc.size(); ++idx) {
    const auto& rec = doc[idx];
    auto where = [&] { return "json record " + std::to_string(idx) + ": "; };
    if (!rec.is_object() || !rec.contains("id") || !rec["id"].is_string())
      throw Error(ErrorKind::parse, where() + "missing string id");
    Item item;
    item.id = rec["id"].get<std::string>();
    if (item.id.empty()) throw Error(ErrorKind::parse, where() + "empty item id");
    if (rec.contains("text")) {
      if (!rec["text"].is_string())
        throw Error(ErrorKind::parse, where() + "text must be a string");
      item.text = rec["text"].get<std::string>();
    }
    if (rec.contains("labels")) {
      if (!rec["labels"].is_object())
        throw Error(ErrorKind::parse, where() + "labels must be an object");
      for (const auto& [cat, values] : rec["labels"].items()) {
        if (cat.empty())
          throw Error(ErrorKind::parse, where() + "empty category name");
        if (!values.is_array())
          throw Error(ErrorKind::parse, where() + "labels." + cat + " must be an array");
        if (std::find(categories.begin(), categories.end(), cat) == categories.end())
          categories.push_back(cat);
        for (const auto& v : values) {
          if (!v.is_string() || v.get<std::string>().empty())
            throw Error(ErrorKind::parse,
                        where() + "labels." + cat + " holds a non-string or empty value");
          item.labels.push_back({cat, v.get<std::string>()});
        }
      }
    }
    normalize_labels(item);
    items.push_back(std::move(item));
  }
  return finalize_catalog(std::move(items), std::move(categories));
}

}  // namespace

Catalog finalize_catalog(std::vector<Item> items, std::vector<std::string> categories) {
  Catalog cat;
  cat.items = std::move(items);
  cat.categories = std::move(categories);
  for (std::size_t i = 0; i < cat.items.size(); ++i) {
    auto [it, inserted] = cat.id_index_.emplace(cat.items[i].id, i);
    if (!inserted)
      throw Error(ErrorKind::duplicate_id, "duplicate item id '" + cat.items[i].id + "'");
  }
  return cat;
}

std::size_t Catalog::index_of(const std::string& id) const {
  auto it = id_index_.find(id);
  if (it == id_index_.end())
    throw Error(ErrorKind::unknown_item, "unknown item id '" + id + "'");
  return it->second;
}

bool Catalog::has_category(const std::string& category) const {
  return std::find(categories.begin(), categories.end(), category) != categories.end();
}

Catalog load_catalog(const std::filesystem::path& path, CatalogFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "catalog not found: " + path.string());
  if (format == CatalogFormat::auto_detect) {
    if (path.extension() == ".json") {
      format = CatalogFormat::json;
    } else if (path.extension() == ".csv") {
      format = CatalogFormat::csv;
    } else {
      // Unknown extension: sniff the first non-whitespace character.
      int c;
      while ((c = in.peek()) != std::ifstream::traits_type::eof() &&
             std::isspace(c))
        in.get();
      format = (c == '{' || c == '[') ? CatalogFormat::json : CatalogFormat::csv;
    }
  }
  return format == CatalogFormat::json ? load_json(in) : load_csv(in);
}

std::size_t IncidenceMatrix::column_index(const std::string& item_id) const {
  for (std::size_t c = 0; c < item_ids.size(); ++c) {
    if (item_ids[c] == item_id) return c;
  }
  throw Error(ErrorKind::unknown_item, "item '" + item_id + "' is not a column");
}

std::vector<std::size_t> IncidenceMatrix::row_counts() const {
  std::vector<std::size_t> counts(labels.size(), 0);
  for (std::size_t r = 0; r < labels.size(); ++r) {
    for (std::uint64_t block : row_bits[r]) counts[r] += std::popcount(block);
  }
  return counts;
}

IncidenceMatrix build_incidence(
    const Catalog& catalog, std::vector<std::string> categories,
    const std::vector<std::pair<std::string, std::string>>& pair_categories) {
  if (categories.empty()) categories = catalog.categories;
  for (const auto& c : categories) {
    if (!catalog.has_category(c))
      throw Error(ErrorKind::unknown_category, "unknown category '" + c + "'");
  }
  for (const auto& [a, b] : pair_categories) {
    if (!catalog.has_category(a))
      throw Error(ErrorKind::unknown_category, "unknown category '" + a + "'");
    if (!catalog.has_category(b))
      throw Error(ErrorKind::unknown_category, "unknown category '" + b + "'");
  }

  std::set<std::string> wanted(categories.begin(), categories.end());

  // Row universe: single labels observed on any item, plus composite labels
  // for observed value combinations of each requested pair.
  std::set<Label> rows;
  for (const auto& item : catalog.items) {
    for (const auto& label : item.labels) {
      if (wanted.count(label.category)) rows.insert(label);
    }
    for (const auto& [a, b] : pair_categories) {
      for (const auto& la : item.labels) {
        if (la.category != a) continue;
        for (const auto& lb : item.labels) {
          if (lb.category != b) continue;
          rows.insert({composite_category(a, b), composite_value(la.value, lb.value)});
        }
      }
    }
  }

  IncidenceMatrix m;
  m.labels.assign(rows.begin(), rows.end());  // std::set iterates sorted
  m.item_ids.reserve(catalog.size());
  for (const auto& item : catalog.items) m.item_ids.push_back(item.id);

  const std::size_t blocks = (catalog.size() + 63) / 64;
  m.row_bits.assign(m.labels.size(), std::vector<std::uint64_t>(blocks, 0));

  std::unordered_map<std::string, std::size_t> row_index;
  row_index.reserve(m.labels.size());
  for (std::size_t r = 0; r < m.labels.size(); ++r) {
    row_index.emplace(m.labels[r].category + "\x1f" + m.labels[r].value, r);
  }
  auto set_bit = [&](const std::string& cat, const std::string& val, std::size_t col) {
    auto it = row_index.find(cat + "\x1f" + val);
    if (it != row_index.end())
      m.row_bits[it->second][col >> 6] |= std::uint64_t{1} << (col & 63);
  };

  for (std::size_t col = 0; col < catalog.size(); ++col) {
    const auto& item = catalog.items[col];
    for (const auto& label : item.labels) {
      if (wanted.count(label.category)) set_bit(label.category, label.value, col);
    }
    for (const auto& [a, b] : pair_categories) {
      for (const auto& la : item.labels) {
        if (la.category != a) continue;
        for (const auto& lb : item.labels) {
          if (lb.category != b) continue;
          set_bit(composite_category(a, b), composite_value(la.value, lb.value), col);
        }
      }
    }
  }
  // Rows materialize only from observed labels, so none can be empty here;
  // uncoverable rows appear through restrict_columns.
  return m;
}

IncidenceMatrix restrict_columns(const IncidenceMatrix& m,
                                 const std::vector<std::size_t>& columns) {
  IncidenceMatrix out;
  out.uncoverable = m.uncoverable;
  out.item_ids.reserve(columns.size());
  for (std::size_t c : columns) {
    if (c >= m.col_count())
      throw Error(ErrorKind::invalid_argument, "column index out of range");
    out.item_ids.push_back(m.item_ids[c]);
  }
  const std::size_t blocks = (columns.size() + 63) / 64;
  for (std::size_t r = 0; r < m.row_count(); ++r) {
    std::vector<std::uint64_t> bits(blocks, 0);
    bool any = false;
    for (std::size_t j = 0; j < columns.size(); ++j) {
      if (m.at(r, columns[j])) {
        bits[j >> 6] |= std::uint64_t{1} << (j & 63);
        any = true;
      }
    }
    if (any) {
      out.labels.push_back(m.labels[r]);
      out.row_bits.push_back(std::move(bits));
    } else {
      out.uncoverable.push_back(m.labels[r]);
    }
  }
  return out;
}

}  // namespace isp
