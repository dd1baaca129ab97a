#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "isp/catalog.hpp"

namespace isp {

enum class Backend { greedy, exact, auto_select };

Backend backend_from_name(const std::string& name);
const char* backend_name(Backend b);

using Duration = std::chrono::milliseconds;
inline constexpr Duration kDefaultTimeBudget{10'000};

/// A covering instance compiled to per-column row masks.
/// Rows/columns keep the incidence order; `costs` absent means unicost.
struct CoverInstance {
  std::size_t rows = 0;
  std::vector<std::string> column_ids;
  std::vector<std::vector<std::uint64_t>> col_masks;  // per column, blocks over rows
  std::optional<std::vector<double>> costs;
  std::optional<std::vector<std::size_t>> candidates;      // column subset restriction
  std::optional<std::size_t> max_cardinality;              // exact backends only
  std::optional<std::vector<std::size_t>> incumbent_seed;  // warm start for exact

  static CoverInstance from_incidence(const IncidenceMatrix& m);

  std::size_t cols() const { return col_masks.size(); }
  std::size_t cells() const;  // rows x effective columns, drives auto backend
  std::string dump_json() const;
  static CoverInstance load_json(const std::string& text);
};

struct Selection {
  std::vector<std::string> item_ids;          // chosen columns, in pick order
  std::vector<std::size_t> item_indices;      // same, as column indices
  double objective = 0.0;                     // count or total cost
  std::size_t covered_rows = 0;
  bool optimal = false;                       // proved by an exact backend
  std::optional<int> round;                   // set by the exploration planner
  std::optional<std::vector<double>> per_item_weight;
};

/// Minimum-cardinality cover. Greedy follows Chvatal's rule (most uncovered
/// rows, ties to the lower column index); exact is branch-and-bound with a
/// greedy upper bound and ceil(uncovered / best-column-degree) lower bound.
/// On timeout the incumbent is returned with optimal=false.
Selection solve_unicost(const CoverInstance& instance,
                        Backend backend = Backend::auto_select,
                        Duration time_budget = kDefaultTimeBudget);

/// Minimum-cost cover. Greedy picks the best cost per newly covered row
/// (ties: lower cost, then lower index).
Selection solve_weighted(const CoverInstance& instance,
                         Backend backend = Backend::auto_select,
                         Duration time_budget = kDefaultTimeBudget);

/// Bounded max-coverage over the candidate columns: at most t columns,
/// maximize covered rows. Greedy is the standard marginal-gain algorithm.
Selection solve_max_cover(const CoverInstance& instance, std::size_t t,
                          Backend backend = Backend::auto_select,
                          Duration time_budget = kDefaultTimeBudget);

}  // namespace isp
