#include "isp/embedding.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>

namespace isp {

Metric metric_from_name(const std::string& name) {
  if (name == "euclidean") return Metric::euclidean;
  if (name == "cosine") return Metric::cosine;
  throw Error(ErrorKind::invalid_argument, "unknown metric '" + name + "'");
}

const char* metric_name(Metric m) {
  return m == Metric::euclidean ? "euclidean" : "cosine";
}

namespace {

void check_finite(const std::vector<double>& data) {
  for (double v : data) {
    if (!std::isfinite(v))
      throw Error(ErrorKind::parse, "embedding holds a non-finite entry");
  }
}

void check_no_zero_rows(const std::vector<double>& data, std::size_t n,
                        std::size_t dim, const std::vector<std::string>& ids) {
  for (std::size_t i = 0; i < n; ++i) {
    bool zero = true;
    for (std::size_t d = 0; d < dim; ++d) {
      if (data[i * dim + d] != 0.0) {
        zero = false;
        break;
      }
    }
    if (zero)
      throw Error(ErrorKind::invalid_argument,
                  "cosine metric rejects zero vector for item '" + ids[i] + "'");
  }
}

}  // namespace

EmbeddingMatrix::EmbeddingMatrix(std::vector<std::string> item_ids, std::size_t dim,
                                 std::vector<double> data, Metric metric)
    : item_ids_(std::move(item_ids)), dim_(dim), data_(std::move(data)), metric_(metric) {
  if (data_.size() != item_ids_.size() * dim_)
    throw Error(ErrorKind::dim_mismatch, "embedding data size does not match ids x dim");
  check_finite(data_);
  if (metric_ == Metric::cosine)
    check_no_zero_rows(data_, item_ids_.size(), dim_, item_ids_);
}

std::size_t EmbeddingMatrix::index_of(const std::string& id) const {
  for (std::size_t i = 0; i < item_ids_.size(); ++i) {
    if (item_ids_[i] == id) return i;
  }
  throw Error(ErrorKind::unknown_item, "unknown item id '" + id + "'");
}

void EmbeddingMatrix::set_metric(Metric m) {
  if (m == Metric::cosine) check_no_zero_rows(data_, item_ids_.size(), dim_, item_ids_);
  metric_ = m;
}

EmbeddingMatrix EmbeddingMatrix::subset(const std::vector<std::size_t>& rows) const {
  std::vector<std::string> ids;
  std::vector<double> data;
  ids.reserve(rows.size());
  data.reserve(rows.size() * dim_);
  for (std::size_t r : rows) {
    if (r >= size())
      throw Error(ErrorKind::invalid_argument, "embedding row index out of range");
    ids.push_back(item_ids_[r]);
    auto v = row(r);
    data.insert(data.end(), v.begin(), v.end());
  }
  return EmbeddingMatrix(std::move(ids), dim_, std::move(data), metric_);
}

double vector_distance(std::span<const double> a, std::span<const double> b,
                       Metric metric) {
  if (a.size() != b.size())
    throw Error(ErrorKind::dim_mismatch, "vector dimensions differ");
  if (metric == Metric::euclidean) {
    double s = 0.0;
    for (std::size_t d = 0; d < a.size(); ++d) {
      double diff = a[d] - b[d];
      s += diff * diff;
    }
    return std::sqrt(s);
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t d = 0; d < a.size(); ++d) {
    dot += a[d] * b[d];
    na += a[d] * a[d];
    nb += b[d] * b[d];
  }
  if (na == 0.0 || nb == 0.0)
    throw Error(ErrorKind::invalid_argument, "cosine distance undefined for zero vector");
  double c = dot / (std::sqrt(na) * std::sqrt(nb));
  c = std::clamp(c, -1.0, 1.0);
  return 1.0 - c;
}

double pairwise_distance(const EmbeddingMatrix& e, std::size_t i, std::size_t j) {
  if (i >= e.size() || j >= e.size())
    throw Error(ErrorKind::invalid_argument, "item index out of range");
  if (i == j) return 0.0;
  return vector_distance(e.row(i), e.row(j), e.metric());
}

namespace {

std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> tokens;
  std::string cur;
  for (unsigned char c : text) {
    if (std::isalnum(c)) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (!cur.empty()) {
      tokens.push_back(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.push_back(cur);
  return tokens;
}

}  // namespace

EmbeddingMatrix tfidf_embed(const Catalog& catalog, std::size_t vocab_size,
                            bool normalize, std::vector<std::string>* vocabulary_out) {
  if (vocab_size == 0)
    throw Error(ErrorKind::invalid_argument, "vocab_size must be positive");

  std::vector<std::vector<std::string>> docs(catalog.size());
  std::map<std::string, std::size_t> df;  // ordered: lexicographic tie-break for free
  bool any_text = false;
  for (std::size_t i = 0; i < catalog.size(); ++i) {
    docs[i] = tokenize(catalog.items[i].text);
    if (!catalog.items[i].text.empty()) any_text = true;
    std::vector<std::string> uniq = docs[i];
    std::sort(uniq.begin(), uniq.end());
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
    for (const auto& t : uniq) ++df[t];
  }
  if (!any_text) throw Error(ErrorKind::empty_corpus, "no item has text");

  // Top vocab_size terms by document frequency, ties lexicographic.
  std::vector<std::pair<std::string, std::size_t>> terms(df.begin(), df.end());
  std::stable_sort(terms.begin(), terms.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  if (terms.size() > vocab_size) terms.resize(vocab_size);

  const std::size_t dim = terms.size();
  std::unordered_map<std::string, std::size_t> column;
  std::vector<double> idf(dim);
  const double n_docs = static_cast<double>(catalog.size());
  for (std::size_t c = 0; c < dim; ++c) {
    column.emplace(terms[c].first, c);
    idf[c] = std::log(n_docs / (1.0 + static_cast<double>(terms[c].second))) + 1.0;
  }
  if (vocabulary_out) {
    vocabulary_out->clear();
    for (const auto& [term, _] : terms) vocabulary_out->push_back(term);
  }

  std::vector<double> data(catalog.size() * dim, 0.0);
  for (std::size_t i = 0; i < catalog.size(); ++i) {
    double* rowp = data.data() + i * dim;
    for (const auto& tok : docs[i]) {
      auto it = column.find(tok);
      if (it != column.end()) rowp[it->second] += 1.0;
    }
    for (std::size_t c = 0; c < dim; ++c) rowp[c] *= idf[c];
    if (normalize) {
      double norm = 0.0;
      for (std::size_t c = 0; c < dim; ++c) norm += rowp[c] * rowp[c];
      norm = std::sqrt(norm);
      if (norm > 0.0) {
        for (std::size_t c = 0; c < dim; ++c) rowp[c] /= norm;
      }
    }
  }

  std::vector<std::string> ids;
  ids.reserve(catalog.size());
  for (const auto& item : catalog.items) ids.push_back(item.id);
  return EmbeddingMatrix(std::move(ids), dim, std::move(data), Metric::euclidean);
}

EmbeddingMatrix load_embeddings(const std::filesystem::path& path,
                                const Catalog& catalog) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "embedding file not found: " + path.string());

  std::string header;
  if (!std::getline(in, header))
    throw Error(ErrorKind::parse, "embedding file is empty");
  std::size_t dim = 0;
  Metric metric = Metric::euclidean;
  {
    std::istringstream hs(header);
    std::string tok;
    bool saw_dim = false;
    while (hs >> tok) {
      if (tok.rfind("dim=", 0) == 0) {
        try {
          dim = std::stoul(tok.substr(4));
        } catch (const std::exception&) {
          throw Error(ErrorKind::parse, "bad dim in embedding header");
        }
        saw_dim = true;
      } else if (tok.rfind("metric=", 0) == 0) {
        metric = metric_from_name(tok.substr(7));
      } else {
        throw Error(ErrorKind::parse, "unexpected token in embedding header: " + tok);
      }
    }
    if (!saw_dim || dim == 0)
      throw Error(ErrorKind::parse, "embedding header must declare dim=<d>");
  }

  std::unordered_map<std::string, std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    std::string id;
    ls >> id;
    std::vector<double> vec;
    vec.reserve(dim);
    double v;
    while (ls >> v) vec.push_back(v);
    if (!ls.eof())
      throw Error(ErrorKind::parse,
                  "embedding line " + std::to_string(line_no) + ": bad number");
    if (vec.size() != dim)
      throw Error(ErrorKind::dim_mismatch,
                  "embedding line " + std::to_string(line_no) + ": expected " +
                      std::to_string(dim) + " values, got " + std::to_string(vec.size()));
    if (!rows.emplace(id, std::move(vec)).second)
      throw Error(ErrorKind::parse,
                  "embedding line " + std::to_string(line_no) + ": duplicate id '" + id + "'");
  }

  std::vector<double> data;
  data.reserve(catalog.size() * dim);
  std::vector<std::string> ids;
  ids.reserve(catalog.size());
  for (const auto& item : catalog.items) {
    auto it = rows.find(item.id);
    if (it == rows.end())
      throw Error(ErrorKind::missing_item, "embedding missing item '" + item.id + "'");
    data.insert(data.end(), it->second.begin(), it->second.end());
    ids.push_back(item.id);
  }
  return EmbeddingMatrix(std::move(ids), dim, std::move(data), metric);
}

}  // namespace isp
