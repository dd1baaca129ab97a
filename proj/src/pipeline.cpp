#include "isp/pipeline.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <set>

#include "isp/random.hpp"

namespace isp {

DiversityMode diversity_mode_from_name(const std::string& name) {
  if (name == "cardinality_bound") return DiversityMode::cardinality_bound;
  if (name == "warm_start") return DiversityMode::warm_start;
  throw Error(ErrorKind::invalid_argument, "unknown diversity mode '" + name + "'");
}

const char* diversity_mode_name(DiversityMode m) {
  return m == DiversityMode::cardinality_bound ? "cardinality_bound" : "warm_start";
}

CoverageReport coverage(const Selection& selection, const IncidenceMatrix& incidence) {
  std::vector<std::size_t> columns;
  columns.reserve(selection.item_ids.size());
  for (const auto& id : selection.item_ids) {
    columns.push_back(incidence.column_index(id));  // throws unknown_item
  }

  CoverageReport report;
  report.uncoverable = incidence.uncoverable;
  std::map<std::string, CategoryCoverage> per_cat;
  for (std::size_t r = 0; r < incidence.row_count(); ++r) {
    bool hit = false;
    for (std::size_t c : columns) {
      if (incidence.at(r, c)) {
        hit = true;
        break;
      }
    }
    auto& cat = per_cat[incidence.labels[r].category];
    ++cat.total;
    ++report.overall.total;
    if (hit) {
      ++cat.covered;
      ++report.overall.covered;
    }
  }
  report.per_category.assign(per_cat.begin(), per_cat.end());
  return report;
}

IspResult solve_isp(const Catalog& catalog, const EmbeddingMatrix& embedding,
                    const IspConfig& config) {
  if (embedding.size() != catalog.size())
    throw Error(ErrorKind::dim_mismatch, "embedding rows must match catalog items");
  if (config.t && *config.t == 0)
    throw Error(ErrorKind::invalid_argument, "t must be >= 1");

  IspResult result;
  result.incidence = build_incidence(catalog, config.categories, config.pair_categories);
  if (config.strict && !result.incidence.uncoverable.empty())
    throw Error(ErrorKind::infeasible_catalog,
                "catalog has uncoverable labels and strict mode is on");

  auto base = CoverInstance::from_incidence(result.incidence);

  // Level 1: minimize the subset size.
  result.unicost = solve_unicost(base, config.backends.unicost, config.time_budget);
  result.k = result.unicost.item_ids.size();

  // Level 2: k-means diversity costs into a weighted cover.
  result.clusters = kmeans(embedding, result.k, config.seed, config.kmeans_max_iters);
  result.costs = diversity_costs(embedding, result.clusters);
  for (const auto& [id, multiplier] : config.cost_multipliers) {
    if (!(multiplier > 0.0))
      throw Error(ErrorKind::invalid_argument, "cost multipliers must be positive");
    result.costs[catalog.index_of(id)] *= multiplier;  // throws on unknown id
  }

  CoverInstance diverse_inst = base;
  diverse_inst.costs = result.costs;
  diverse_inst.incumbent_seed = result.unicost.item_indices;
  if (config.diversity_mode == DiversityMode::cardinality_bound) {
    diverse_inst.max_cardinality = result.k;
  }
  result.diverse = solve_weighted(diverse_inst, config.backends.diverse,
                                  config.time_budget);

  // Level 3: bounded max-coverage over the diverse selection.
  std::size_t t = config.t.value_or(result.diverse.item_ids.size());
  if (t >= result.diverse.item_ids.size()) {
    result.final = result.diverse;
  } else {
    CoverInstance final_inst = base;
    final_inst.candidates = result.diverse.item_indices;
    result.final = solve_max_cover(final_inst, t, config.backends.max_cover,
                                   config.time_budget);
  }

  result.coverage = coverage(result.final, result.incidence);
  return result;
}

Selection baseline_random(const Catalog& catalog, std::size_t size, std::uint64_t seed) {
  if (size == 0 || size > catalog.size())
    throw Error(ErrorKind::invalid_size,
                "size must be in [1, " + std::to_string(catalog.size()) + "]");
  auto eng = rng::make(rng::derive(seed, 0x72616e64ULL));  // "rand"
  auto picks = rng::sample_without_replacement(eng, catalog.size(), size);
  Selection s;
  s.item_indices = picks;
  for (std::size_t i : picks) s.item_ids.push_back(catalog.items[i].id);
  s.objective = static_cast<double>(size);
  return s;
}

Selection baseline_kmeans(const Catalog& catalog, const EmbeddingMatrix& embedding,
                          std::size_t size, std::uint64_t seed) {
  if (size == 0 || size > catalog.size())
    throw Error(ErrorKind::invalid_size,
                "size must be in [1, " + std::to_string(catalog.size()) + "]");
  if (embedding.size() != catalog.size())
    throw Error(ErrorKind::dim_mismatch, "embedding rows must match catalog items");

  auto model = kmeans(embedding, size, seed);
  std::vector<bool> used(catalog.size(), false);
  Selection s;
  for (std::size_t c = 0; c < model.k; ++c) {
    std::size_t best = catalog.size();
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < catalog.size(); ++i) {
      if (used[i]) continue;
      double d = vector_distance(embedding.row(i), model.centroid(c), embedding.metric());
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
    used[best] = true;
    s.item_indices.push_back(best);
    s.item_ids.push_back(catalog.items[best].id);
  }
  s.objective = static_cast<double>(s.item_ids.size());
  return s;
}

}  // namespace isp
