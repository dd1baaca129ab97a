#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "isp/clustering.hpp"
#include "isp/embedding.hpp"
#include "isp/setcover.hpp"

namespace isp {

/// How the first-level solution shapes the diversity cover:
/// cardinality_bound caps the weighted cover at k items (exact backend);
/// warm_start only seeds the exact solver's incumbent with it.
enum class DiversityMode { cardinality_bound, warm_start };

DiversityMode diversity_mode_from_name(const std::string& name);
const char* diversity_mode_name(DiversityMode m);

struct BackendPolicy {
  Backend unicost = Backend::auto_select;
  Backend diverse = Backend::auto_select;
  Backend max_cover = Backend::auto_select;

  static BackendPolicy uniform(Backend b) { return {b, b, b}; }
};

struct IspConfig {
  std::optional<std::size_t> t;  // max final subset size; absent = unbounded
  std::uint64_t seed = 0;
  BackendPolicy backends;
  DiversityMode diversity_mode = DiversityMode::cardinality_bound;
  std::vector<std::string> categories;  // empty = all catalog categories
  std::vector<std::pair<std::string, std::string>> pair_categories;
  bool strict = false;  // fail instead of dropping uncoverable labels
  std::size_t kmeans_max_iters = 100;
  Duration time_budget = kDefaultTimeBudget;
  /// Optional side-constraint preferences: multipliers applied to the
  /// diversity costs (smaller = more preferred).
  std::unordered_map<std::string, double> cost_multipliers;
};

struct CategoryCoverage {
  std::size_t covered = 0;
  std::size_t total = 0;
  double fraction() const {
    return total == 0 ? 0.0 : static_cast<double>(covered) / static_cast<double>(total);
  }
};

/// Coverage over coverable rows only; uncoverable labels are listed apart.
struct CoverageReport {
  CategoryCoverage overall;
  std::vector<std::pair<std::string, CategoryCoverage>> per_category;  // sorted
  std::vector<Label> uncoverable;
};

struct IspResult {
  Selection unicost;
  Selection diverse;
  Selection final;
  std::size_t k = 0;                // |unicost|
  std::vector<double> costs;        // diversity cost per catalog item
  CoverageReport coverage;          // of the final selection
  IncidenceMatrix incidence;
  ClusterModel clusters;
};

/// The three-level flow: minimum cover size k, k-means diversity costs into
/// a weighted cover, then bounded max-coverage at t (identity when t is
/// absent or at least the diverse size).
IspResult solve_isp(const Catalog& catalog, const EmbeddingMatrix& embedding,
                    const IspConfig& config);

/// Fraction of rows covered by the union of the selected columns, per
/// category and overall.
CoverageReport coverage(const Selection& selection, const IncidenceMatrix& incidence);

/// Uniform sample of `size` items without replacement.
Selection baseline_random(const Catalog& catalog, std::size_t size, std::uint64_t seed);

/// `size` k-means centroids, each represented by its nearest distinct item.
Selection baseline_kmeans(const Catalog& catalog, const EmbeddingMatrix& embedding,
                          std::size_t size, std::uint64_t seed);

}  // namespace isp
