#include "isp/warmstart.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "isp/random.hpp"

namespace isp {

namespace {

double interpolated_quantile(std::vector<double>& values, double q) {
  std::sort(values.begin(), values.end());
  const std::size_t m = values.size();
  if (m == 1) return values[0];
  double h = q * static_cast<double>(m - 1);
  std::size_t lo = static_cast<std::size_t>(h);
  if (lo >= m - 1) return values[m - 1];
  double frac = h - static_cast<double>(lo);
  return values[lo] + frac * (values[lo + 1] - values[lo]);
}

}  // namespace

double resolve_threshold(const EmbeddingMatrix& embedding, double q,
                         std::size_t sample_cap, std::uint64_t seed) {
  if (!(q > 0.0) || q > 1.0)
    throw Error(ErrorKind::invalid_quantile,
                "quantile must be in (0, 1], got " + std::to_string(q));
  const std::size_t n = embedding.size();
  if (n < 2)
    throw Error(ErrorKind::invalid_argument,
                "need at least two items for a distance distribution");

  const std::size_t n_pairs = n * (n - 1) / 2;
  std::vector<double> dists;
  if (n_pairs <= sample_cap) {
    dists.reserve(n_pairs);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        dists.push_back(pairwise_distance(embedding, i, j));
      }
    }
  } else {
    auto eng = rng::make(rng::derive(seed, 0x7061697273ULL));  // "pairs"
    dists.reserve(sample_cap);
    for (std::size_t s = 0; s < sample_cap; ++s) {
      std::size_t i = rng::uniform_index(eng, n);
      std::size_t j = rng::uniform_index(eng, n - 1);
      if (j >= i) ++j;
      dists.push_back(pairwise_distance(embedding, i, j));
    }
  }
  return interpolated_quantile(dists, q);
}

WarmStartMap warm_start(const std::vector<std::string>& warm_ids,
                        const std::vector<std::string>& cold_ids,
                        const EmbeddingMatrix& embedding, double q,
                        std::size_t sample_cap, std::uint64_t seed) {
  if (warm_ids.empty())
    throw Error(ErrorKind::empty_warm_set, "warm set must be non-empty");

  std::vector<std::size_t> warm, cold;
  warm.reserve(warm_ids.size());
  for (const auto& id : warm_ids) warm.push_back(embedding.index_of(id));
  cold.reserve(cold_ids.size());
  for (const auto& id : cold_ids) cold.push_back(embedding.index_of(id));
  std::sort(warm.begin(), warm.end());
  std::sort(cold.begin(), cold.end());
  {
    std::vector<std::size_t> overlap;
    std::set_intersection(warm.begin(), warm.end(), cold.begin(), cold.end(),
                          std::back_inserter(overlap));
    if (!overlap.empty())
      throw Error(ErrorKind::invalid_argument, "warm and cold sets intersect");
  }

  WarmStartMap map;
  map.q = q;
  map.w = resolve_threshold(embedding, q, sample_cap, seed);
  map.warm_ids.reserve(warm.size());
  for (std::size_t i : warm) map.warm_ids.push_back(embedding.item_ids()[i]);

  for (std::size_t c : cold) {
    std::size_t donor = embedding.size();
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t s : warm) {  // ascending: ties keep the lower index
      double d = pairwise_distance(embedding, c, s);
      if (d < best) {
        best = d;
        donor = s;
      }
    }
    if (donor != embedding.size() && best <= map.w) {
      map.assignments.push_back(
          {embedding.item_ids()[c], embedding.item_ids()[donor], best});
    } else {
      map.unmatched.push_back(embedding.item_ids()[c]);
    }
  }
  return map;
}

double unit_coverage(std::size_t selection_size, const WarmStartMap& map,
                     const IncidenceMatrix& incidence) {
  if (selection_size == 0)
    throw Error(ErrorKind::invalid_argument, "selection_size must be >= 1");

  std::set<std::size_t> columns;
  for (const auto& id : map.warm_ids) columns.insert(incidence.column_index(id));
  for (const auto& a : map.assignments) columns.insert(incidence.column_index(a.cold_id));

  std::size_t covered = 0;
  for (std::size_t r = 0; r < incidence.row_count(); ++r) {
    for (std::size_t c : columns) {
      if (incidence.at(r, c)) {
        ++covered;
        break;
      }
    }
  }
  return static_cast<double>(covered) / static_cast<double>(selection_size);
}

}  // namespace isp
