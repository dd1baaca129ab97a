#include "isp/explore.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include "isp/error.hpp"
#include "isp/random.hpp"

namespace isp {
namespace {

Catalog make_sub_catalog(const Catalog& catalog, const std::vector<std::size_t>& indices) {
  std::vector<Item> items;
  items.reserve(indices.size());
  for (std::size_t idx : indices) items.push_back(catalog.items[idx]);
  return finalize_catalog(std::move(items), catalog.categories);
}

std::vector<std::string> ids_at(const Catalog& catalog, const std::vector<std::size_t>& indices) {
  std::vector<std::string> ids;
  ids.reserve(indices.size());
  for (std::size_t idx : indices) ids.push_back(catalog.items[idx].id);
  return ids;
}

double mean_of(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return xs.empty() ? 0.0 : s / static_cast<double>(xs.size());
}

// Population standard deviation.
double stddev_of(const std::vector<double>& xs, double mean) {
  if (xs.size() < 2) return 0.0;
  double s = 0.0;
  for (double x : xs) s += (x - mean) * (x - mean);
  return std::sqrt(s / static_cast<double>(xs.size()));
}

}  // namespace

WeightScheme weight_scheme_from_name(const std::string& name) {
  if (name == "inverse_round") return WeightScheme::inverse_round;
  if (name == "linear_decay") return WeightScheme::linear_decay;
  throw Error(ErrorKind::invalid_argument, "unknown weight scheme: " + name);
}

const char* weight_scheme_name(WeightScheme s) {
  switch (s) {
    case WeightScheme::inverse_round: return "inverse_round";
    case WeightScheme::linear_decay: return "linear_decay";
  }
  return "?";
}

Policy policy_from_name(const std::string& name) {
  if (name == "random") return Policy::random;
  if (name == "isp_oneshot") return Policy::isp_oneshot;
  if (name == "isp_recursive") return Policy::isp_recursive;
  if (name == "isp_order_weighted") return Policy::isp_order_weighted;
  if (name == "greedy_warmstart") return Policy::greedy_warmstart;
  throw Error(ErrorKind::invalid_argument, "unknown policy: " + name);
}

const char* policy_name(Policy p) {
  switch (p) {
    case Policy::random: return "random";
    case Policy::isp_oneshot: return "isp_oneshot";
    case Policy::isp_recursive: return "isp_recursive";
    case Policy::isp_order_weighted: return "isp_order_weighted";
    case Policy::greedy_warmstart: return "greedy_warmstart";
  }
  return "?";
}

SelectionMode selection_mode_from_name(const std::string& name) {
  if (name == "top_batch") return SelectionMode::top_batch;
  if (name == "weighted_random") return SelectionMode::weighted_random;
  throw Error(ErrorKind::invalid_argument, "unknown selection mode: " + name);
}

const char* selection_mode_name(SelectionMode m) {
  switch (m) {
    case SelectionMode::top_batch: return "top_batch";
    case SelectionMode::weighted_random: return "weighted_random";
  }
  return "?";
}

ExplorationPlan recursive_isp(const Catalog& catalog, const EmbeddingMatrix& embedding,
                              std::size_t batch, const IspConfig& config) {
  if (batch == 0) throw Error(ErrorKind::invalid_size, "batch must be >= 1");
  if (embedding.size() != catalog.items.size())
    throw Error(ErrorKind::dim_mismatch, "embedding rows do not match catalog items");

  ExplorationPlan plan;
  std::vector<std::size_t> remaining(catalog.items.size());
  for (std::size_t i = 0; i < remaining.size(); ++i) remaining[i] = i;

  std::size_t round = 1;
  while (!remaining.empty()) {
    Catalog sub = make_sub_catalog(catalog, remaining);
    EmbeddingMatrix sub_e = embedding.subset(remaining);
    IncidenceMatrix inc = build_incidence(sub, config.categories, config.pair_categories);

    Selection picked;
    if (inc.labels.empty()) {
      // Nothing left to cover: flush the lowest-index remaining items.
      std::size_t take = std::min(batch, remaining.size());
      picked.item_indices.assign(remaining.begin(), remaining.begin() + take);
      picked.item_ids = ids_at(catalog, picked.item_indices);
      picked.objective = 0.0;
      picked.covered_rows = 0;
      picked.optimal = true;
    } else {
      IspConfig round_config = config;
      round_config.t = batch;
      round_config.seed = rng::derive(config.seed, 0xB000 + round);
      IspResult res = solve_isp(sub, sub_e, round_config);
      picked = res.final;
      // Map sub-catalog indices back to the caller's catalog.
      for (std::size_t& idx : picked.item_indices) idx = remaining[idx];
    }
    picked.round = round;
    plan.rounds.push_back(std::move(picked));

    const Selection& last = plan.rounds.back();
    std::unordered_set<std::size_t> taken(last.item_indices.begin(), last.item_indices.end());
    std::erase_if(remaining, [&](std::size_t idx) { return taken.contains(idx); });
    ++round;
  }
  return plan;
}

const std::unordered_map<std::string, double>& order_weights(ExplorationPlan& plan,
                                                             WeightScheme scheme) {
  plan.weights.clear();
  const double total = static_cast<double>(plan.rounds.size());
  for (Selection& round : plan.rounds) {
    const double r = static_cast<double>(round.round.value_or(1));
    const double w = scheme == WeightScheme::inverse_round ? 1.0 / r : (total - r + 1.0) / total;
    round.per_item_weight = std::vector<double>(round.item_ids.size(), w);
    for (const std::string& id : round.item_ids) plan.weights[id] = w;
  }
  return plan.weights;
}

Selection greedy_warmstart_policy(const std::vector<std::string>& warm_ids,
                                  const std::vector<std::string>& cold_ids,
                                  const EmbeddingMatrix& embedding, double q,
                                  std::size_t batch) {
  if (batch == 0) throw Error(ErrorKind::invalid_size, "batch must be >= 1");
  if (warm_ids.empty()) throw Error(ErrorKind::empty_warm_set, "warm set must be non-empty");
  std::unordered_map<std::string, std::size_t> row_of;
  for (std::size_t i = 0; i < embedding.size(); ++i) row_of.emplace(embedding.item_ids()[i], i);
  auto resolve = [&](const std::string& id) {
    auto it = row_of.find(id);
    if (it == row_of.end()) throw Error(ErrorKind::unknown_item, "no embedding row for " + id);
    return it->second;
  };

  std::vector<std::size_t> warm, cold;
  warm.reserve(warm_ids.size());
  cold.reserve(cold_ids.size());
  for (const auto& id : warm_ids) warm.push_back(resolve(id));
  for (const auto& id : cold_ids) cold.push_back(resolve(id));
  {
    std::unordered_set<std::size_t> warm_rows(warm.begin(), warm.end());
    for (std::size_t c : cold)
      if (warm_rows.contains(c))
        throw Error(ErrorKind::invalid_argument, "warm and cold sets intersect");
  }

  const double w = resolve_threshold(embedding, q, kDefaultPairSampleCap, 0);

  // A cold item is matched once some warm (or explored) item sits within w.
  std::vector<char> matched(cold.size(), 0), picked(cold.size(), 0);
  for (std::size_t c = 0; c < cold.size(); ++c)
    for (std::size_t s : warm)
      if (pairwise_distance(embedding, cold[c], s) <= w) {
        matched[c] = 1;
        break;
      }
  const std::size_t matched_before =
      static_cast<std::size_t>(std::count(matched.begin(), matched.end(), 1));

  Selection out;
  const std::size_t picks = std::min(batch, cold.size());
  for (std::size_t step = 0; step < picks; ++step) {
    std::size_t best = cold.size();
    std::size_t best_gain = 0;
    for (std::size_t x = 0; x < cold.size(); ++x) {
      if (picked[x]) continue;
      std::size_t gain = 0;
      for (std::size_t c = 0; c < cold.size(); ++c) {
        if (c == x || picked[c] || matched[c]) continue;
        if (pairwise_distance(embedding, cold[c], cold[x]) <= w) ++gain;
      }
      if (best == cold.size() || gain > best_gain) {
        best = x;
        best_gain = gain;
      }
    }
    picked[best] = 1;
    for (std::size_t c = 0; c < cold.size(); ++c) {
      if (!picked[c] && !matched[c] && pairwise_distance(embedding, cold[c], cold[best]) <= w)
        matched[c] = 1;
    }
    out.item_ids.push_back(cold_ids[best]);
    out.item_indices.push_back(cold[best]);
  }

  std::size_t matched_after = 0;
  for (std::size_t c = 0; c < cold.size(); ++c)
    if (matched[c] && !picked[c]) ++matched_after;
  out.objective = static_cast<double>(
      matched_after - std::min(matched_after, matched_before));
  out.covered_rows = 0;
  out.optimal = false;
  return out;
}

namespace {

struct RepetitionInputs {
  std::vector<std::size_t> universe;   // catalog indices, ascending
  std::vector<std::size_t> warm_pos;   // positions within universe, ascending
  Catalog sub;                         // universe items, catalog order
  EmbeddingMatrix sub_e;
  std::vector<std::size_t> cold_pos;   // positions within universe, ascending
};

RepetitionInputs draw_repetition(const Catalog& catalog, const EmbeddingMatrix& embedding,
                                 const SimulationConfig& config, std::uint64_t rep_seed) {
  RepetitionInputs in;
  rng::Engine eng(rep_seed);
  if (config.K == catalog.items.size()) {
    in.universe.resize(config.K);
    for (std::size_t i = 0; i < config.K; ++i) in.universe[i] = i;
  } else {
    in.universe = rng::sample_without_replacement(eng, catalog.items.size(), config.K);
    std::sort(in.universe.begin(), in.universe.end());
  }
  in.warm_pos = rng::sample_without_replacement(eng, config.K, config.k);
  std::sort(in.warm_pos.begin(), in.warm_pos.end());
  in.sub = make_sub_catalog(catalog, in.universe);
  in.sub_e = embedding.subset(in.universe);

  std::vector<char> is_warm(config.K, 0);
  for (std::size_t p : in.warm_pos) is_warm[p] = 1;
  for (std::size_t p = 0; p < config.K; ++p)
    if (!is_warm[p]) in.cold_pos.push_back(p);
  return in;
}

// Exploration picks as positions within the universe, exactly `batch` of
// them; short policy output is padded with the lowest-index cold leftovers.
std::vector<std::size_t> pad_to_batch(std::vector<std::size_t> picks,
                                      const std::vector<std::size_t>& cold_pos,
                                      std::size_t batch) {
  std::unordered_set<std::size_t> seen(picks.begin(), picks.end());
  for (std::size_t p : cold_pos) {
    if (picks.size() >= batch) break;
    if (seen.insert(p).second) picks.push_back(p);
  }
  picks.resize(std::min(picks.size(), batch));
  return picks;
}

std::vector<std::size_t> weighted_sample(const std::vector<std::size_t>& candidates,
                                         std::vector<double> weights, std::size_t count,
                                         rng::Engine& eng) {
  std::vector<std::size_t> pool = candidates;
  std::vector<std::size_t> out;
  out.reserve(count);
  while (out.size() < count && !pool.empty()) {
    std::size_t at = rng::weighted_pick(eng, weights);
    out.push_back(pool[at]);
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(at));
    weights.erase(weights.begin() + static_cast<std::ptrdiff_t>(at));
  }
  return out;
}

std::vector<std::size_t> flatten_rounds(const ExplorationPlan& plan,
                                        const std::unordered_map<std::string, std::size_t>& pos_of) {
  std::vector<std::size_t> order;
  for (const Selection& round : plan.rounds)
    for (const std::string& id : round.item_ids) order.push_back(pos_of.at(id));
  return order;
}

}  // namespace

SimulationResult simulate(const Catalog& catalog, const EmbeddingMatrix& embedding,
                          const SimulationConfig& config) {
  if (config.K < 1 || config.K > catalog.items.size())
    throw Error(ErrorKind::config, "universe size K must be in [1, catalog size]");
  if (config.k >= config.K)
    throw Error(ErrorKind::config, "warm count k must be smaller than K");
  if (config.batch < 1 || config.batch > config.K - config.k)
    throw Error(ErrorKind::config, "batch must be in [1, K - k]");
  if (config.n < 1) throw Error(ErrorKind::config, "need at least one repetition");
  if (!(config.q > 0.0 && config.q <= 1.0))
    throw Error(ErrorKind::invalid_quantile, "q must lie in (0, 1]");
  if (config.policies.empty()) throw Error(ErrorKind::config, "need at least one policy");
  if (embedding.size() != catalog.items.size())
    throw Error(ErrorKind::dim_mismatch, "embedding rows do not match catalog items");
  for (const auto& [id, u] : config.uncertainty)
    if (!(u > 0.0) || !std::isfinite(u))
      throw Error(ErrorKind::config, "uncertainty for " + id + " must be positive and finite");

  const std::size_t n_policies = config.policies.size();
  SimulationResult result;
  result.policies = config.policies;
  result.per_policy.assign(n_policies, std::vector<RepetitionRecord>(config.n));

  auto run_repetition = [&](std::size_t rep) {
    const std::uint64_t rep_seed = rng::derive(config.seed, 0x52455000ULL + rep);
    RepetitionInputs in = draw_repetition(catalog, embedding, config, rep_seed);

    std::unordered_map<std::string, std::size_t> pos_of;  // universe id -> position
    for (std::size_t p = 0; p < config.K; ++p) pos_of.emplace(in.sub.items[p].id, p);

    std::vector<std::string> warm_ids, cold_ids;
    for (std::size_t p : in.warm_pos) warm_ids.push_back(in.sub.items[p].id);
    for (std::size_t p : in.cold_pos) cold_ids.push_back(in.sub.items[p].id);

    // One ISP seed per repetition so ISP-family policies differ only in how
    // they read the plan, not in clustering noise.
    const std::uint64_t isp_seed = rng::derive(rep_seed, 0x69737000ULL);

    Catalog cold_catalog = make_sub_catalog(in.sub, in.cold_pos);
    EmbeddingMatrix cold_e = in.sub_e.subset(in.cold_pos);

    for (std::size_t pi = 0; pi < n_policies; ++pi) {
      const Policy policy = config.policies[pi];
      rng::Engine peng(rng::derive(rep_seed, 0x504F4C00ULL + pi));

      std::vector<std::size_t> picks;  // positions within the universe
      switch (policy) {
        case Policy::random: {
          if (config.selection_mode == SelectionMode::weighted_random &&
              !config.uncertainty.empty()) {
            std::vector<double> weights;
            for (const std::string& id : cold_ids) {
              auto it = config.uncertainty.find(id);
              weights.push_back(it == config.uncertainty.end() ? 1.0 : it->second);
            }
            picks = weighted_sample(in.cold_pos, std::move(weights), config.batch, peng);
          } else {
            auto at = rng::sample_without_replacement(peng, in.cold_pos.size(), config.batch);
            for (std::size_t a : at) picks.push_back(in.cold_pos[a]);
          }
          break;
        }
        case Policy::isp_oneshot: {
          IncidenceMatrix inc =
              build_incidence(cold_catalog, config.categories, config.pair_categories);
          if (!inc.labels.empty()) {
            IspConfig cfg;
            cfg.t = config.batch;
            cfg.seed = isp_seed;
            cfg.categories = config.categories;
            cfg.pair_categories = config.pair_categories;
            IspResult res = solve_isp(cold_catalog, cold_e, cfg);
            for (const std::string& id : res.final.item_ids) picks.push_back(pos_of.at(id));
          }
          break;
        }
        case Policy::isp_recursive:
        case Policy::isp_order_weighted: {
          IspConfig cfg;
          cfg.seed = isp_seed;
          cfg.categories = config.categories;
          cfg.pair_categories = config.pair_categories;
          ExplorationPlan plan = recursive_isp(cold_catalog, cold_e, config.batch, cfg);
          if (policy == Policy::isp_recursive) {
            picks = flatten_rounds(plan, pos_of);
            picks.resize(std::min<std::size_t>(picks.size(), config.batch));
          } else {
            order_weights(plan, config.weight_scheme);
            std::vector<double> weights;
            for (const std::string& id : cold_ids) {
              double w = plan.weights.at(id);
              auto it = config.uncertainty.find(id);
              if (it != config.uncertainty.end()) w *= it->second;
              weights.push_back(w);
            }
            if (config.selection_mode == SelectionMode::weighted_random) {
              picks = weighted_sample(in.cold_pos, std::move(weights), config.batch, peng);
            } else {
              std::vector<std::size_t> order(in.cold_pos.size());
              for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
              std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                return weights[a] > weights[b];
              });
              for (std::size_t i = 0; i < config.batch; ++i) picks.push_back(in.cold_pos[order[i]]);
            }
          }
          break;
        }
        case Policy::greedy_warmstart: {
          Selection sel =
              greedy_warmstart_policy(warm_ids, cold_ids, in.sub_e, config.q, config.batch);
          for (const std::string& id : sel.item_ids) picks.push_back(pos_of.at(id));
          break;
        }
      }
      picks = pad_to_batch(std::move(picks), in.cold_pos, config.batch);

      std::unordered_set<std::size_t> explored(picks.begin(), picks.end());
      std::vector<std::string> after_ids = warm_ids, leftover_ids;
      for (std::size_t p : picks) after_ids.push_back(in.sub.items[p].id);
      for (std::size_t p : in.cold_pos)
        if (!explored.contains(p)) leftover_ids.push_back(in.sub.items[p].id);

      RepetitionRecord rec;
      rec.cold_subject = leftover_ids.size();
      if (leftover_ids.empty()) {
        rec.warmstarted = 0;
        rec.success_ratio = 1.0;
      } else {
        WarmStartMap ws = warm_start(after_ids, leftover_ids, in.sub_e, config.q,
                                     kDefaultPairSampleCap, rep_seed);
        rec.warmstarted = ws.assignments.size();
        rec.success_ratio =
            static_cast<double>(rec.warmstarted) / static_cast<double>(rec.cold_subject);
      }
      rec.warm_after = config.k + config.batch + rec.warmstarted;
      result.per_policy[pi][rep] = rec;
    }
  };

  const std::size_t threads = std::max<std::size_t>(1, config.threads);
  if (threads == 1 || config.n == 1) {
    for (std::size_t rep = 0; rep < config.n; ++rep) run_repetition(rep);
  } else {
    std::vector<std::thread> pool;
    std::mutex err_mutex;
    std::exception_ptr first_error;
    std::size_t workers = std::min(threads, config.n);
    for (std::size_t t = 0; t < workers; ++t) {
      pool.emplace_back([&, t] {
        for (std::size_t rep = t; rep < config.n; rep += workers) {
          try {
            run_repetition(rep);
          } catch (...) {
            std::lock_guard<std::mutex> lock(err_mutex);
            if (!first_error) first_error = std::current_exception();
            return;
          }
        }
      });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
  }

  result.aggregates.resize(n_policies);
  for (std::size_t pi = 0; pi < n_policies; ++pi) {
    std::vector<double> warm_after, ratio;
    for (const RepetitionRecord& rec : result.per_policy[pi]) {
      warm_after.push_back(static_cast<double>(rec.warm_after));
      ratio.push_back(rec.success_ratio);
    }
    PolicyAggregate& agg = result.aggregates[pi];
    agg.mean_warm_after = mean_of(warm_after);
    agg.stddev_warm_after = stddev_of(warm_after, agg.mean_warm_after);
    agg.mean_success_ratio = mean_of(ratio);
    agg.stddev_success_ratio = stddev_of(ratio, agg.mean_success_ratio);
  }
  return result;
}

}  // namespace isp
