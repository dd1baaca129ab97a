#pragma once

#include <cstdint>
#include <vector>

#include "isp/embedding.hpp"

namespace isp {

/// Result of seeded k-means. Inertia is the sum of squared distances to the
/// assigned centroid under the euclidean metric, and the sum of cosine
/// distances under cosine (whose centroid update is the mean direction of
/// the normalized members, keeping Lloyd monotone).
struct ClusterModel {
  std::size_t k = 0;
  std::size_t dim = 0;
  Metric metric = Metric::euclidean;
  std::vector<double> centroids;           // k x dim, row-major
  std::vector<std::size_t> assignments;    // item index -> cluster index
  double inertia = 0.0;
  std::vector<double> inertia_history;     // one entry per Lloyd iteration

  std::span<const double> centroid(std::size_t c) const {
    return {centroids.data() + c * dim, dim};
  }
};

/// k-means++ initialization driven by `seed`, Lloyd iteration until the
/// assignment fixpoint or max_iters. Empty clusters are repaired by
/// reseeding to the point farthest from its current centroid.
ClusterModel kmeans(const EmbeddingMatrix& embedding, std::size_t k,
                    std::uint64_t seed, std::size_t max_iters = 100);

/// Per-item distance to the nearest centroid under the embedding's metric.
std::vector<double> diversity_costs(const EmbeddingMatrix& embedding,
                                    const ClusterModel& model);

}  // namespace isp
