#include "mvsc/kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "mvsc/parallel.hpp"
#include "mvsc/rng.hpp"

namespace mvsc {

namespace {

struct RestartOutcome {
  std::vector<int> labels;
  Matrix centroids;
  double inertia = std::numeric_limits<double>::infinity();
  int iterations = 0;
};

// Weighted pick proportional to weights (hand-rolled cumulative walk so the
// draw only depends on the generator stream).
Index weighted_pick(const Vector& weights, double total, std::mt19937_64& gen) {
  const double target = uniform_unit(gen) * total;
  double acc = 0.0;
  for (Index i = 0; i < weights.size(); ++i) {
    acc += weights[i];
    if (acc >= target && weights[i] > 0.0) return i;
  }
  for (Index i = weights.size() - 1; i >= 0; --i)
    if (weights[i] > 0.0) return i;
  return 0;
}

Matrix seed_centroids(const Matrix& rows, int k, std::mt19937_64& gen) {
  const Index n = rows.rows();
  Matrix centroids(k, rows.cols());
  Index first = static_cast<Index>(uniform_index(gen, static_cast<std::uint64_t>(n)));
  centroids.row(0) = rows.row(first);
  Vector d2(n);
  for (Index i = 0; i < n; ++i)
    d2[i] = (rows.row(i) - centroids.row(0)).squaredNorm();
  for (int c = 1; c < k; ++c) {
    const double total = d2.sum();
    Index pick;
    if (total > 0.0 && std::isfinite(total)) {
      pick = weighted_pick(d2, total, gen);
    } else {
      // Everything coincides with a chosen centroid; fall back to the first
      // index with the (tied) largest distance, i.e. index order.
      pick = static_cast<Index>(c % n);
    }
    centroids.row(c) = rows.row(pick);
    for (Index i = 0; i < n; ++i) {
      const double nd = (rows.row(i) - centroids.row(c)).squaredNorm();
      if (nd < d2[i]) d2[i] = nd;
    }
  }
  return centroids;
}

void assign_rows(const Matrix& rows, const Matrix& centroids,
                 std::vector<int>& labels, Vector& dist2) {
  const int k = static_cast<int>(centroids.rows());
  par::parallel_for(0, rows.rows(), [&](std::ptrdiff_t b, std::ptrdiff_t e) {
    for (Index i = b; i < e; ++i) {
      int arg = 0;
      double best = (rows.row(i) - centroids.row(0)).squaredNorm();
      for (int c = 1; c < k; ++c) {
        const double d = (rows.row(i) - centroids.row(c)).squaredNorm();
        if (d < best) {
          best = d;
          arg = c;
        }
      }
      labels[static_cast<std::size_t>(i)] = arg;
      dist2[i] = best;
    }
  });
}

RestartOutcome run_restart(const Matrix& rows, int k, std::uint64_t seed,
                           const KMeansOptions& options) {
  const Index n = rows.rows();
  auto gen = std::mt19937_64(seed);
  RestartOutcome out;
  out.centroids = seed_centroids(rows, k, gen);
  out.labels.assign(static_cast<std::size_t>(n), 0);
  Vector dist2(n);

  double prev_inertia = std::numeric_limits<double>::infinity();
  for (int iter = 1; iter <= options.max_iters; ++iter) {
    assign_rows(rows, out.centroids, out.labels, dist2);

    // Empty-cluster repair: hand the cluster the point farthest from its
    // centroid, then re-assign.
    std::vector<Index> counts(static_cast<std::size_t>(k), 0);
    for (int lbl : out.labels) ++counts[static_cast<std::size_t>(lbl)];
    bool repaired = false;
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) continue;
      Index far = 0;
      double far_d = -1.0;
      for (Index i = 0; i < n; ++i) {
        if (counts[static_cast<std::size_t>(out.labels[static_cast<std::size_t>(i)])] <= 1)
          continue;  // do not empty a singleton
        if (dist2[i] > far_d) {
          far_d = dist2[i];
          far = i;
        }
      }
      --counts[static_cast<std::size_t>(out.labels[static_cast<std::size_t>(far)])];
      ++counts[static_cast<std::size_t>(c)];
      out.centroids.row(c) = rows.row(far);
      out.labels[static_cast<std::size_t>(far)] = c;
      dist2[far] = 0.0;
      repaired = true;
    }
    if (repaired) assign_rows(rows, out.centroids, out.labels, dist2);

    const double inertia = dist2.sum();
    if (!repaired && std::isfinite(prev_inertia) &&
        inertia > prev_inertia * (1.0 + 1e-9) + 1e-12)
      throw std::logic_error("k-means inertia increased");
    out.inertia = inertia;
    out.iterations = iter;

    // Centroid update (sequential accumulation: reproducible).
    Matrix sums = Matrix::Zero(k, rows.cols());
    std::fill(counts.begin(), counts.end(), 0);
    for (Index i = 0; i < n; ++i) {
      sums.row(out.labels[static_cast<std::size_t>(i)]) += rows.row(i);
      ++counts[static_cast<std::size_t>(out.labels[static_cast<std::size_t>(i)])];
    }
    bool moved = false;
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] == 0) continue;
      const Vector next = sums.row(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
      if ((next.transpose() - out.centroids.row(c)).squaredNorm() > 0.0) moved = true;
      out.centroids.row(c) = next;
    }
    if (!moved) break;
    if (std::isfinite(prev_inertia) &&
        prev_inertia - inertia <= options.rel_tol * prev_inertia)
      break;
    prev_inertia = inertia;
  }
  // Final assignment against the converged centroids. If it empties a
  // cluster (possible when stopping on max_iters), give that cluster the
  // farthest point so k non-empty clusters survive.
  assign_rows(rows, out.centroids, out.labels, dist2);
  std::vector<Index> counts(static_cast<std::size_t>(k), 0);
  for (int lbl : out.labels) ++counts[static_cast<std::size_t>(lbl)];
  for (int c = 0; c < k; ++c) {
    if (counts[static_cast<std::size_t>(c)] > 0) continue;
    Index far = 0;
    double far_d = -1.0;
    for (Index i = 0; i < n; ++i) {
      if (counts[static_cast<std::size_t>(out.labels[static_cast<std::size_t>(i)])] <= 1) continue;
      if (dist2[i] > far_d) {
        far_d = dist2[i];
        far = i;
      }
    }
    --counts[static_cast<std::size_t>(out.labels[static_cast<std::size_t>(far)])];
    ++counts[static_cast<std::size_t>(c)];
    out.centroids.row(c) = rows.row(far);
    out.labels[static_cast<std::size_t>(far)] = c;
    dist2[far] = 0.0;
  }
  out.inertia = dist2.sum();
  return out;
}

}  // namespace

Matrix row_normalize(const Matrix& rows) {
  Matrix out = rows;
  for (Index i = 0; i < out.rows(); ++i) {
    const double norm = out.row(i).norm();
    if (norm > 0.0) out.row(i) /= norm;
  }
  return out;
}

ClusteringResult kmeans(const Matrix& rows, int k, std::uint64_t seed,
                        const KMeansOptions& options) {
  if (k < 1) throw std::invalid_argument("k must be positive");
  if (rows.rows() < k)
    throw std::invalid_argument("k-means requires n >= k");
  if (!rows.allFinite())
    throw std::invalid_argument("k-means input contains non-finite values");
  if (options.restarts < 1 || options.max_iters < 1)
    throw std::invalid_argument("restarts and max_iters must be positive");

  std::vector<RestartOutcome> outcomes(static_cast<std::size_t>(options.restarts));
  // Restarts are independent; each gets its own derived stream.
  std::vector<std::uint64_t> seeds(static_cast<std::size_t>(options.restarts));
  for (int r = 0; r < options.restarts; ++r)
    seeds[static_cast<std::size_t>(r)] = derive_seed(seed, "kmeans-restart-" + std::to_string(r));
  for (int r = 0; r < options.restarts; ++r)
    outcomes[static_cast<std::size_t>(r)] = run_restart(rows, k, seeds[static_cast<std::size_t>(r)], options);

  std::size_t best = 0;
  for (std::size_t r = 1; r < outcomes.size(); ++r)
    if (outcomes[r].inertia < outcomes[best].inertia) best = r;

  ClusteringResult result;
  result.labels = std::move(outcomes[best].labels);
  result.centroids = std::move(outcomes[best].centroids);
  result.inertia = outcomes[best].inertia;
  result.iterations = outcomes[best].iterations;
  return result;
}

}  // namespace mvsc
