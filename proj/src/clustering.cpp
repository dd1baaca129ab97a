#include "isp/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "isp/random.hpp"

namespace isp {

namespace {

// Per-point contribution to inertia: squared distance under euclidean, plain
// distance under cosine (see ClusterModel docs).
double point_loss(std::span<const double> v, std::span<const double> c, Metric metric) {
  double d = vector_distance(v, c, metric);
  return metric == Metric::euclidean ? d * d : d;
}

std::size_t nearest_centroid(const EmbeddingMatrix& e, std::size_t i,
                             const std::vector<double>& centroids, std::size_t k) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < k; ++c) {
    double d = vector_distance(e.row(i), {centroids.data() + c * e.dim(), e.dim()},
                               e.metric());
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

std::vector<double> init_kmeanspp(const EmbeddingMatrix& e, std::size_t k,
                                  rng::Engine& eng) {
  const std::size_t n = e.size();
  const std::size_t dim = e.dim();
  std::vector<double> centroids(k * dim);
  std::vector<bool> taken(n, false);
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());

  std::size_t first = rng::uniform_index(eng, n);
  std::copy_n(e.row(first).data(), dim, centroids.begin());
  taken[first] = true;

  for (std::size_t c = 1; c < k; ++c) {
    std::span<const double> last{centroids.data() + (c - 1) * dim, dim};
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (taken[i]) {
        d2[i] = 0.0;
      } else {
        double d = vector_distance(e.row(i), last, e.metric());
        d2[i] = std::min(d2[i], d * d);
      }
      total += d2[i];
    }
    std::size_t pick = n;
    if (total > 0.0) {
      double r = rng::uniform01(eng) * total;
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        acc += d2[i];
        if (r < acc) {
          pick = i;
          break;
        }
      }
    }
    if (pick == n) {
      // all remaining mass is zero (duplicate points): lowest untaken index
      for (std::size_t i = 0; i < n; ++i) {
        if (!taken[i]) {
          pick = i;
          break;
        }
      }
    }
    std::copy_n(e.row(pick).data(), dim, centroids.begin() + c * dim);
    taken[pick] = true;
  }
  return centroids;
}

}  // namespace

ClusterModel kmeans(const EmbeddingMatrix& embedding, std::size_t k,
                    std::uint64_t seed, std::size_t max_iters) {
  const std::size_t n = embedding.size();
  const std::size_t dim = embedding.dim();
  if (k == 0 || k > n)
    throw Error(ErrorKind::invalid_k,
                "k must be in [1, " + std::to_string(n) + "], got " + std::to_string(k));
  if (n == 0) throw Error(ErrorKind::invalid_k, "embedding is empty");

  auto eng = rng::make(seed);
  ClusterModel model;
  model.k = k;
  model.dim = dim;
  model.metric = embedding.metric();
  model.centroids = init_kmeanspp(embedding, k, eng);
  model.assignments.assign(n, k);

  std::vector<std::size_t> prev(n, k + 1);
  for (std::size_t iter = 0; iter < max_iters; ++iter) {
    // assignment step
    for (std::size_t i = 0; i < n; ++i) {
      model.assignments[i] = nearest_centroid(embedding, i, model.centroids, k);
    }

    // empty-cluster repair: reseed to the point farthest from its centroid
    std::vector<std::size_t> sizes(k, 0);
    for (std::size_t a : model.assignments) ++sizes[a];
    for (std::size_t c = 0; c < k; ++c) {
      if (sizes[c] != 0) continue;
      std::size_t farthest = n;
      double far_d = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (sizes[model.assignments[i]] <= 1) continue;  // keep donors non-empty
        double d = vector_distance(embedding.row(i), model.centroid(model.assignments[i]),
                                   embedding.metric());
        if (d > far_d) {
          far_d = d;
          farthest = i;
        }
      }
      if (farthest == n) break;  // nothing to donate (k == n with duplicates)
      --sizes[model.assignments[farthest]];
      model.assignments[farthest] = c;
      ++sizes[c];
      std::copy_n(embedding.row(farthest).data(), dim, model.centroids.begin() + c * dim);
    }

    double inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      inertia += point_loss(embedding.row(i), model.centroid(model.assignments[i]),
                            embedding.metric());
    }
    model.inertia = inertia;
    model.inertia_history.push_back(inertia);

    if (model.assignments == prev) break;
    prev = model.assignments;

    // update step: mean of members (euclidean), mean of normalized members
    // (cosine; the direction minimizes the summed cosine distance)
    std::vector<double> sums(k * dim, 0.0);
    std::vector<double> weight(k, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t a = model.assignments[i];
      auto v = embedding.row(i);
      if (embedding.metric() == Metric::cosine) {
        double norm = 0.0;
        for (double x : v) norm += x * x;
        norm = std::sqrt(norm);
        for (std::size_t d = 0; d < dim; ++d) sums[a * dim + d] += v[d] / norm;
      } else {
        for (std::size_t d = 0; d < dim; ++d) sums[a * dim + d] += v[d];
      }
      weight[a] += 1.0;
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (weight[c] == 0.0) continue;  // repaired above; keep seed point
      for (std::size_t d = 0; d < dim; ++d)
        model.centroids[c * dim + d] = sums[c * dim + d] / weight[c];
    }
  }
  return model;
}

std::vector<double> diversity_costs(const EmbeddingMatrix& embedding,
                                    const ClusterModel& model) {
  if (model.dim != embedding.dim())
    throw Error(ErrorKind::dim_mismatch, "cluster model dim does not match embedding");
  std::vector<double> costs(embedding.size());
  for (std::size_t i = 0; i < embedding.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < model.k; ++c) {
      best = std::min(best,
                      vector_distance(embedding.row(i), model.centroid(c),
                                      embedding.metric()));
    }
    costs[i] = best;
  }
  return costs;
}

}  // namespace isp
