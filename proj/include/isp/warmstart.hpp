#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "isp/catalog.hpp"
#include "isp/embedding.hpp"

namespace isp {

inline constexpr std::size_t kDefaultPairSampleCap = 1'000'000;

/// Cold-to-donor assignments under the resolved distance threshold w.
struct WarmStartMap {
  double q = 0.0;
  double w = 0.0;
  std::vector<std::string> warm_ids;  // the full warm set, embedding order

  struct Assignment {
    std::string cold_id;
    std::string donor_id;
    double distance;
  };
  std::vector<Assignment> assignments;  // ordered by cold item index
  std::vector<std::string> unmatched;   // cold ids beyond w, embedding order
};

/// Empirical q-quantile (linear interpolation) of the pairwise distance
/// distribution over all unordered item pairs. When the pair count exceeds
/// sample_cap, a seeded uniform sample of pairs is used instead.
double resolve_threshold(const EmbeddingMatrix& embedding, double q,
                         std::size_t sample_cap = kDefaultPairSampleCap,
                         std::uint64_t seed = 0);

/// Nearest warm donor for each cold item, kept only when the distance is at
/// most w = resolve_threshold(embedding, q). Equidistant donors resolve to
/// the lower item index. Sets must be disjoint; warm must be non-empty.
WarmStartMap warm_start(const std::vector<std::string>& warm_ids,
                        const std::vector<std::string>& cold_ids,
                        const EmbeddingMatrix& embedding, double q,
                        std::size_t sample_cap = kDefaultPairSampleCap,
                        std::uint64_t seed = 0);

/// Labels covered per explored item: rows covered by the union of the warm
/// set and the matched cold items, divided by selection_size.
double unit_coverage(std::size_t selection_size, const WarmStartMap& map,
                     const IncidenceMatrix& incidence);

}  // namespace isp
