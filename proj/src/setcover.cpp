#include "isp/setcover.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

#include "json.hpp"

namespace isp {

Backend backend_from_name(const std::string& name) {
  if (name == "greedy") return Backend::greedy;
  if (name == "exact") return Backend::exact;
  if (name == "auto") return Backend::auto_select;
  throw Error(ErrorKind::invalid_argument, "unknown backend '" + name + "'");
}

const char* backend_name(Backend b) {
  switch (b) {
    case Backend::greedy: return "greedy";
    case Backend::exact: return "exact";
    case Backend::auto_select: return "auto";
  }
  return "auto";
}

CoverInstance CoverInstance::from_incidence(const IncidenceMatrix& m) {
  CoverInstance inst;
  inst.rows = m.row_count();
  inst.column_ids = m.item_ids;
  const std::size_t blocks = (inst.rows + 63) / 64;
  inst.col_masks.assign(m.col_count(), std::vector<std::uint64_t>(blocks, 0));
  for (std::size_t r = 0; r < m.row_count(); ++r) {
    for (std::size_t c = 0; c < m.col_count(); ++c) {
      if (m.at(r, c)) inst.col_masks[c][r >> 6] |= std::uint64_t{1} << (r & 63);
    }
  }
  return inst;
}

std::size_t CoverInstance::cells() const {
  std::size_t effective = candidates ? candidates->size() : cols();
  return rows * effective;
}

std::string CoverInstance::dump_json() const {
  nlohmann::ordered_json doc;
  doc["rows"] = rows;
  doc["columns"] = cols();
  doc["column_ids"] = column_ids;
  auto covers = nlohmann::ordered_json::array();
  for (std::size_t c = 0; c < cols(); ++c) {
    auto rowlist = nlohmann::ordered_json::array();
    for (std::size_t r = 0; r < rows; ++r) {
      if ((col_masks[c][r >> 6] >> (r & 63)) & 1u) rowlist.push_back(r);
    }
    covers.push_back(std::move(rowlist));
  }
  doc["covers"] = std::move(covers);
  doc["costs"] = costs ? nlohmann::ordered_json(*costs) : nlohmann::ordered_json(nullptr);
  doc["candidates"] =
      candidates ? nlohmann::ordered_json(*candidates) : nlohmann::ordered_json(nullptr);
  doc["max_cardinality"] = max_cardinality ? nlohmann::ordered_json(*max_cardinality)
                                           : nlohmann::ordered_json(nullptr);
  return doc.dump(2) + "\n";
}

CoverInstance CoverInstance::load_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::parse, std::string("instance json: ") + e.what());
  }
  CoverInstance inst;
  try {
    inst.rows = doc.at("rows").get<std::size_t>();
    const auto& covers = doc.at("covers");
    const std::size_t n_cols = covers.size();
    if (doc.contains("column_ids") && !doc["column_ids"].is_null()) {
      inst.column_ids = doc["column_ids"].get<std::vector<std::string>>();
    } else {
      for (std::size_t c = 0; c < n_cols; ++c)
        inst.column_ids.push_back("c" + std::to_string(c));
    }
    if (inst.column_ids.size() != n_cols)
      throw Error(ErrorKind::parse, "instance json: column_ids/covers size mismatch");
    const std::size_t blocks = (inst.rows + 63) / 64;
    inst.col_masks.assign(n_cols, std::vector<std::uint64_t>(blocks, 0));
    for (std::size_t c = 0; c < n_cols; ++c) {
      for (const auto& rv : covers[c]) {
        std::size_t r = rv.get<std::size_t>();
        if (r >= inst.rows)
          throw Error(ErrorKind::parse, "instance json: row index out of range");
        inst.col_masks[c][r >> 6] |= std::uint64_t{1} << (r & 63);
      }
    }
    if (doc.contains("costs") && !doc["costs"].is_null())
      inst.costs = doc["costs"].get<std::vector<double>>();
    if (doc.contains("candidates") && !doc["candidates"].is_null())
      inst.candidates = doc["candidates"].get<std::vector<std::size_t>>();
    if (doc.contains("max_cardinality") && !doc["max_cardinality"].is_null())
      inst.max_cardinality = doc["max_cardinality"].get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::parse, std::string("instance json: ") + e.what());
  }
  return inst;
}

namespace {

using Mask = std::vector<std::uint64_t>;

Mask full_row_mask(std::size_t rows) {
  Mask m((rows + 63) / 64, ~std::uint64_t{0});
  if (rows % 64 != 0 && !m.empty()) m.back() = (std::uint64_t{1} << (rows % 64)) - 1;
  return m;
}

std::size_t count_bits(const Mask& m) {
  std::size_t n = 0;
  for (std::uint64_t b : m) n += std::popcount(b);
  return n;
}

bool is_empty(const Mask& m) {
  for (std::uint64_t b : m)
    if (b) return false;
  return true;
}

std::size_t count_and(const Mask& a, const Mask& b) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < a.size(); ++i) n += std::popcount(a[i] & b[i]);
  return n;
}

void subtract(Mask& from, const Mask& bits) {
  for (std::size_t i = 0; i < from.size(); ++i) from[i] &= ~bits[i];
}

std::vector<std::size_t> candidate_list(const CoverInstance& inst) {
  if (inst.candidates) {
    auto cands = *inst.candidates;
    std::sort(cands.begin(), cands.end());
    cands.erase(std::unique(cands.begin(), cands.end()), cands.end());
    for (std::size_t c : cands) {
      if (c >= inst.cols())
        throw Error(ErrorKind::invalid_argument, "candidate column out of range");
    }
    if (cands.empty())
      throw Error(ErrorKind::invalid_argument, "candidate set must be non-empty");
    return cands;
  }
  std::vector<std::size_t> all(inst.cols());
  for (std::size_t c = 0; c < all.size(); ++c) all[c] = c;
  return all;
}

Backend resolve_backend(Backend b, const CoverInstance& inst) {
  if (b != Backend::auto_select) return b;
  return inst.cells() <= 5000 ? Backend::exact : Backend::greedy;
}

Selection make_selection(const CoverInstance& inst, std::vector<std::size_t> indices,
                         double objective, std::size_t covered, bool optimal) {
  Selection s;
  s.item_indices = std::move(indices);
  s.item_ids.reserve(s.item_indices.size());
  for (std::size_t c : s.item_indices) s.item_ids.push_back(inst.column_ids[c]);
  s.objective = objective;
  s.covered_rows = covered;
  s.optimal = optimal;
  return s;
}

void check_feasible(const CoverInstance& inst, const std::vector<std::size_t>& cands) {
  Mask reachable((inst.rows + 63) / 64, 0);
  for (std::size_t c : cands) {
    for (std::size_t i = 0; i < reachable.size(); ++i) reachable[i] |= inst.col_masks[c][i];
  }
  if (count_bits(reachable) != inst.rows)
    throw Error(ErrorKind::infeasible, "instance has a row no candidate column covers");
}

double column_cost(const CoverInstance& inst, std::size_t c) {
  return inst.costs ? (*inst.costs)[c] : 1.0;
}

// Greedy cover, shared by the unicost and weighted fronts. Unicost picks the
// column covering the most uncovered rows; weighted minimizes cost per newly
// covered row. Ratio comparisons are done by cross-multiplication.
std::vector<std::size_t> greedy_cover(const CoverInstance& inst,
                                      const std::vector<std::size_t>& cands,
                                      bool weighted) {
  Mask uncovered = full_row_mask(inst.rows);
  std::vector<std::size_t> picks;
  std::vector<bool> used(inst.cols(), false);
  while (!is_empty(uncovered)) {
    std::size_t best = inst.cols();
    std::size_t best_new = 0;
    double best_cost = 0.0;
    for (std::size_t c : cands) {
      if (used[c]) continue;
      std::size_t nw = count_and(inst.col_masks[c], uncovered);
      if (nw == 0) continue;
      if (best == inst.cols()) {
        best = c;
        best_new = nw;
        best_cost = column_cost(inst, c);
        continue;
      }
      if (!weighted) {
        if (nw > best_new) {
          best = c;
          best_new = nw;
        }
      } else {
        double cost = column_cost(inst, c);
        double lhs = cost * static_cast<double>(best_new);
        double rhs = best_cost * static_cast<double>(nw);
        if (lhs < rhs || (lhs == rhs && cost < best_cost)) {
          best = c;
          best_new = nw;
          best_cost = cost;
        }
      }
    }
    if (best == inst.cols())
      throw Error(ErrorKind::infeasible, "greedy: uncovered row has no covering column");
    picks.push_back(best);
    used[best] = true;
    subtract(uncovered, inst.col_masks[best]);
  }
  return picks;
}

struct BnBState {
  const CoverInstance& inst;
  const std::vector<std::size_t>& cands;
  bool weighted;
  std::optional<std::size_t> max_cardinality;
  std::chrono::steady_clock::time_point deadline;
  bool timed_out = false;
  std::size_t nodes = 0;

  std::vector<std::size_t> best_solution;
  double best_cost = std::numeric_limits<double>::infinity();
  bool have_solution = false;

  std::vector<std::size_t> chosen;

  bool out_of_time() {
    if (timed_out) return true;
    if ((++nodes & 511) == 0 &&
        std::chrono::steady_clock::now() >= deadline) {
      timed_out = true;
    }
    return timed_out;
  }

  void offer(double cost) {
    if (cost < best_cost) {
      best_cost = cost;
      best_solution = chosen;
      std::sort(best_solution.begin(), best_solution.end());
      have_solution = true;
    }
  }

  // Lower bound on the cost still needed to cover `uncovered`.
  // Unicost: ceil(u / d) with d the best single-column gain. Weighted: per
  // uncovered row, the cheapest cost-per-row of a column covering it.
  double lower_bound(const Mask& uncovered, const std::vector<bool>& banned,
                     std::size_t u) {
    if (!weighted) {
      std::size_t d = 0;
      for (std::size_t c : cands) {
        if (banned[c]) continue;
        d = std::max(d, count_and(inst.col_masks[c], uncovered));
      }
      if (d == 0) return std::numeric_limits<double>::infinity();
      return std::ceil(static_cast<double>(u) / static_cast<double>(d));
    }
    std::vector<double> row_lb(inst.rows, std::numeric_limits<double>::infinity());
    for (std::size_t c : cands) {
      if (banned[c]) continue;
      std::size_t nw = count_and(inst.col_masks[c], uncovered);
      if (nw == 0) continue;
      double per_row = column_cost(inst, c) / static_cast<double>(nw);
      for (std::size_t r = 0; r < inst.rows; ++r) {
        if (((uncovered[r >> 6] >> (r & 63)) & 1u) &&
            ((inst.col_masks[c][r >> 6] >> (r & 63)) & 1u)) {
          row_lb[r] = std::min(row_lb[r], per_row);
        }
      }
    }
    double lb = 0.0;
    for (std::size_t r = 0; r < inst.rows; ++r) {
      if ((uncovered[r >> 6] >> (r & 63)) & 1u) {
        if (!std::isfinite(row_lb[r])) return std::numeric_limits<double>::infinity();
        lb += row_lb[r];
      }
    }
    return lb;
  }

  void search(Mask uncovered, std::vector<bool>& banned, double cost) {
    if (out_of_time()) return;
    std::size_t u = count_bits(uncovered);
    if (u == 0) {
      offer(cost);
      return;
    }
    if (max_cardinality && chosen.size() >= *max_cardinality) return;
    double lb = lower_bound(uncovered, banned, u);
    if (cost + lb >= best_cost) return;
    if (max_cardinality && !weighted) {
      // lb counts columns for unicost; reuse it to prune on cardinality too
      if (static_cast<double>(chosen.size()) + lb >
          static_cast<double>(*max_cardinality))
        return;
    }

    // Branch on the uncovered row with the fewest allowed covering columns.
    std::size_t branch_row = inst.rows;
    std::vector<std::size_t> branch_cols;
    for (std::size_t r = 0; r < inst.rows; ++r) {
      if (!((uncovered[r >> 6] >> (r & 63)) & 1u)) continue;
      std::vector<std::size_t> covering;
      for (std::size_t c : cands) {
        if (banned[c]) continue;
        if ((inst.col_masks[c][r >> 6] >> (r & 63)) & 1u) covering.push_back(c);
      }
      if (covering.empty()) return;  // this branch cannot complete the cover
      if (branch_row == inst.rows || covering.size() < branch_cols.size()) {
        branch_row = r;
        branch_cols = std::move(covering);
        if (branch_cols.size() == 1) break;
      }
    }

    // Branch i takes branch_cols[i] and bans branch_cols[0..i-1], which
    // partitions the space of covers of branch_row.
    for (std::size_t i = 0; i < branch_cols.size(); ++i) {
      std::size_t c = branch_cols[i];
      Mask next = uncovered;
      subtract(next, inst.col_masks[c]);
      chosen.push_back(c);
      search(std::move(next), banned, cost + column_cost(inst, c));
      chosen.pop_back();
      if (out_of_time()) {
        return;  // leave bans untouched; caller unwinds
      }
      banned[c] = true;
    }
    for (std::size_t c : branch_cols) banned[c] = false;
  }
};

Selection solve_min_cover(const CoverInstance& inst, Backend backend,
                          Duration time_budget, bool weighted) {
  if (weighted) {
    if (!inst.costs)
      throw Error(ErrorKind::invalid_argument, "weighted cover requires costs");
    if (inst.costs->size() != inst.cols())
      throw Error(ErrorKind::invalid_argument, "costs length must match column count");
    for (double c : *inst.costs) {
      if (!(c >= 0.0))
        throw Error(ErrorKind::invalid_argument, "costs must be non-negative");
    }
  } else if (inst.costs) {
    throw Error(ErrorKind::invalid_argument, "unicost cover takes no costs");
  }

  auto cands = candidate_list(inst);
  check_feasible(inst, cands);
  backend = resolve_backend(backend, inst);

  auto objective_of = [&](const std::vector<std::size_t>& picks) {
    if (!weighted) return static_cast<double>(picks.size());
    double total = 0.0;
    for (std::size_t c : picks) total += (*inst.costs)[c];
    return total;
  };

  if (backend == Backend::greedy) {
    auto picks = greedy_cover(inst, cands, weighted);
    return make_selection(inst, picks, objective_of(picks), inst.rows, false);
  }

  BnBState state{.inst = inst,
                 .cands = cands,
                 .weighted = weighted,
                 .max_cardinality = inst.max_cardinality,
                 .deadline = std::chrono::steady_clock::now() + time_budget};

  if (inst.incumbent_seed) {
    Mask uncovered = full_row_mask(inst.rows);
    double cost = 0.0;
    for (std::size_t c : *inst.incumbent_seed) {
      if (c >= inst.cols())
        throw Error(ErrorKind::invalid_argument, "incumbent column out of range");
      subtract(uncovered, inst.col_masks[c]);
      cost += column_cost(inst, c);
    }
    if (is_empty(uncovered) &&
        (!inst.max_cardinality || inst.incumbent_seed->size() <= *inst.max_cardinality)) {
      state.best_solution = *inst.incumbent_seed;
      std::sort(state.best_solution.begin(), state.best_solution.end());
      state.best_cost = cost;
      state.have_solution = true;
    }
  } else {
    auto greedy = greedy_cover(inst, cands, weighted);
    if (!inst.max_cardinality || greedy.size() <= *inst.max_cardinality) {
      state.best_solution = greedy;
      std::sort(state.best_solution.begin(), state.best_solution.end());
      state.best_cost = objective_of(greedy);
      state.have_solution = true;
    }
  }

  std::vector<bool> banned(inst.cols(), false);
  state.search(full_row_mask(inst.rows), banned, 0.0);

  if (!state.have_solution) {
    if (state.timed_out) {
      // No incumbent within budget: fall back to greedy, flagged non-optimal.
      auto picks = greedy_cover(inst, cands, weighted);
      return make_selection(inst, picks, objective_of(picks), inst.rows, false);
    }
    throw Error(ErrorKind::infeasible, "no cover satisfies the cardinality bound");
  }
  return make_selection(inst, state.best_solution, state.best_cost, inst.rows,
                        !state.timed_out);
}

struct MaxCoverState {
  const CoverInstance& inst;
  const std::vector<std::size_t>& cands;
  std::size_t t;
  std::chrono::steady_clock::time_point deadline;
  bool timed_out = false;
  std::size_t nodes = 0;

  std::vector<std::size_t> best_solution;
  std::size_t best_covered = 0;
  bool have_solution = false;

  std::vector<std::size_t> chosen;

  bool out_of_time() {
    if (timed_out) return true;
    if ((++nodes & 511) == 0 && std::chrono::steady_clock::now() >= deadline) {
      timed_out = true;
    }
    return timed_out;
  }

  void offer(std::size_t covered) {
    if (!have_solution || covered > best_covered) {
      best_covered = covered;
      best_solution = chosen;
      have_solution = true;
    }
  }

  void search(std::size_t pos, const Mask& covered, std::size_t covered_count) {
    if (out_of_time()) return;
    offer(covered_count);
    if (pos == cands.size() || chosen.size() == t) return;

    // Optimistic bound: add the top remaining individual gains.
    std::size_t slots = t - chosen.size();
    std::vector<std::size_t> gains;
    gains.reserve(cands.size() - pos);
    for (std::size_t i = pos; i < cands.size(); ++i) {
      std::size_t g = 0;
      const auto& mask = inst.col_masks[cands[i]];
      for (std::size_t b = 0; b < mask.size(); ++b) g += std::popcount(mask[b] & ~covered[b]);
      gains.push_back(g);
    }
    std::sort(gains.begin(), gains.end(), std::greater<>());
    std::size_t bound = covered_count;
    for (std::size_t i = 0; i < std::min(slots, gains.size()); ++i) bound += gains[i];
    if (bound <= best_covered) return;

    // include cands[pos]
    Mask next = covered;
    const auto& mask = inst.col_masks[cands[pos]];
    for (std::size_t b = 0; b < next.size(); ++b) next[b] |= mask[b];
    chosen.push_back(cands[pos]);
    search(pos + 1, next, count_bits(next));
    chosen.pop_back();
    // exclude cands[pos]
    search(pos + 1, covered, covered_count);
  }
};

}  // namespace

Selection solve_unicost(const CoverInstance& instance, Backend backend,
                        Duration time_budget) {
  return solve_min_cover(instance, backend, time_budget, /*weighted=*/false);
}

Selection solve_weighted(const CoverInstance& instance, Backend backend,
                         Duration time_budget) {
  return solve_min_cover(instance, backend, time_budget, /*weighted=*/true);
}

Selection solve_max_cover(const CoverInstance& instance, std::size_t t,
                          Backend backend, Duration time_budget) {
  if (t == 0) throw Error(ErrorKind::invalid_argument, "t must be >= 1");
  auto cands = candidate_list(instance);

  if (t >= cands.size()) {
    Mask covered((instance.rows + 63) / 64, 0);
    for (std::size_t c : cands) {
      for (std::size_t b = 0; b < covered.size(); ++b)
        covered[b] |= instance.col_masks[c][b];
    }
    return make_selection(instance, cands, static_cast<double>(count_bits(covered)),
                          count_bits(covered), true);
  }

  backend = resolve_backend(backend, instance);
  if (backend == Backend::greedy) {
    Mask covered((instance.rows + 63) / 64, 0);
    std::vector<std::size_t> picks;
    std::vector<bool> used(instance.cols(), false);
    while (picks.size() < t) {
      std::size_t best = instance.cols();
      std::size_t best_gain = 0;
      for (std::size_t c : cands) {
        if (used[c]) continue;
        std::size_t gain = 0;
        const auto& mask = instance.col_masks[c];
        for (std::size_t b = 0; b < covered.size(); ++b)
          gain += std::popcount(mask[b] & ~covered[b]);
        if (gain > best_gain) {
          best = c;
          best_gain = gain;
        }
      }
      if (best == instance.cols()) break;  // no marginal gain left
      picks.push_back(best);
      used[best] = true;
      for (std::size_t b = 0; b < covered.size(); ++b)
        covered[b] |= instance.col_masks[best][b];
    }
    std::size_t covered_count = count_bits(covered);
    return make_selection(instance, picks, static_cast<double>(covered_count),
                          covered_count, false);
  }

  MaxCoverState state{.inst = instance,
                      .cands = cands,
                      .t = t,
                      .deadline = std::chrono::steady_clock::now() + time_budget};
  state.search(0, Mask((instance.rows + 63) / 64, 0), 0);
  std::sort(state.best_solution.begin(), state.best_solution.end());
  return make_selection(instance, state.best_solution,
                        static_cast<double>(state.best_covered), state.best_covered,
                        !state.timed_out);
}

}  // namespace isp
