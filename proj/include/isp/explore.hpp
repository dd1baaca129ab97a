#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "isp/pipeline.hpp"
#include "isp/warmstart.hpp"

namespace isp {

/// Ordered exploration rounds. Rounds partition the catalog's items; every
/// item appears in exactly one round.
struct ExplorationPlan {
  std::vector<Selection> rounds;  // round index is 1-based, stored on each Selection
  std::unordered_map<std::string, double> weights;  // filled by order_weights
};

enum class WeightScheme { inverse_round, linear_decay };
WeightScheme weight_scheme_from_name(const std::string& name);
const char* weight_scheme_name(WeightScheme s);

/// Solves the multi-level flow over the not-yet-selected items, at most
/// `batch` per round, until every item is selected. A round whose restricted
/// instance has no coverable label falls back to the lowest-index remaining
/// items.
ExplorationPlan recursive_isp(const Catalog& catalog, const EmbeddingMatrix& embedding,
                              std::size_t batch, const IspConfig& config);

/// Weights decreasing in round: 1/round, or (R - round + 1)/R.
/// Fills plan.weights and each round's per_item_weight; returns the map.
const std::unordered_map<std::string, double>& order_weights(ExplorationPlan& plan,
                                                             WeightScheme scheme);

/// Picks `batch` cold items, each maximizing the number of still-unmatched
/// cold items it would warm-start under the quantile threshold (ties to the
/// lower item index).
Selection greedy_warmstart_policy(const std::vector<std::string>& warm_ids,
                                  const std::vector<std::string>& cold_ids,
                                  const EmbeddingMatrix& embedding, double q,
                                  std::size_t batch);

enum class Policy {
  random,
  isp_oneshot,
  isp_recursive,
  isp_order_weighted,
  greedy_warmstart,
};
Policy policy_from_name(const std::string& name);
const char* policy_name(Policy p);

/// How a policy's ranking turns into the explored batch: deterministic
/// top-batch, or weighted random sampling without replacement.
enum class SelectionMode { top_batch, weighted_random };
SelectionMode selection_mode_from_name(const std::string& name);
const char* selection_mode_name(SelectionMode m);

struct SimulationConfig {
  std::size_t K = 0;      // universe size per repetition
  std::size_t k = 0;      // initially warm items
  std::size_t n = 1;      // repetitions
  std::size_t batch = 1;  // items explored in the period
  double q = 0.1;
  std::uint64_t seed = 0;
  std::vector<Policy> policies{Policy::random};
  WeightScheme weight_scheme = WeightScheme::inverse_round;
  SelectionMode selection_mode = SelectionMode::top_batch;
  std::vector<std::string> categories;
  std::vector<std::pair<std::string, std::string>> pair_categories;
  /// Optional per-item uncertainty scalars multiplied into sampling weights
  /// (weighted_random mode); external inputs, never computed here.
  std::unordered_map<std::string, double> uncertainty;
  std::size_t threads = 1;
};

struct RepetitionRecord {
  std::size_t warm_after = 0;    // |warm ∪ explored ∪ warm-started|
  std::size_t warmstarted = 0;   // cold items matched after exploration
  std::size_t cold_subject = 0;  // cold items subject to warm-start
  double success_ratio = 0.0;    // warmstarted / cold_subject (1.0 when none)
};

struct PolicyAggregate {
  double mean_warm_after = 0.0;
  double stddev_warm_after = 0.0;
  double mean_success_ratio = 0.0;
  double stddev_success_ratio = 0.0;
};

struct SimulationResult {
  std::vector<Policy> policies;
  std::vector<std::vector<RepetitionRecord>> per_policy;  // [policy][repetition]
  std::vector<PolicyAggregate> aggregates;                // [policy]
};

/// Offline protocol: per repetition, draw a K-item universe and k warm
/// items, explore one batch of cold items under each policy, then warm-start
/// the remaining cold set and record the outcome.
SimulationResult simulate(const Catalog& catalog, const EmbeddingMatrix& embedding,
                          const SimulationConfig& config);

}  // namespace isp
