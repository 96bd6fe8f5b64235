#include "mvsc/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "mvsc/parallel.hpp"
#include "mvsc/rng.hpp"

namespace mvsc {

namespace {

constexpr Index kDistanceBlock = 2048;

// Squared Euclidean distances from rows [row_begin, row_end) of X to the
// given medoid rows, via the Gram expansion. Writes into out (block x p).
void distance_block(const Matrix& X, const Vector& sq_norms,
                    const Matrix& medoid_points, const Vector& medoid_sq,
                    Index row_begin, Index row_end, Matrix& out) {
  const Index b = row_end - row_begin;
  out.topRows(b).noalias() =
      -2.0 * X.middleRows(row_begin, b) * medoid_points.transpose();
  out.topRows(b).colwise() += sq_norms.segment(row_begin, b);
  out.topRows(b).rowwise() += medoid_sq.transpose();
  out.topRows(b) = out.topRows(b).cwiseMax(0.0);
}

Matrix gather_rows(const Matrix& X, const std::vector<Index>& rows) {
  Matrix out(static_cast<Index>(rows.size()), X.cols());
  for (Index i = 0; i < out.rows(); ++i) out.row(i) = X.row(rows[static_cast<std::size_t>(i)]);
  return out;
}

// Nearest medoid per sample plus distance; deterministic tie rule.
void assign_all(const Matrix& X, const Vector& sq_norms, const Matrix& medoid_points,
                std::vector<Index>& assignment, Vector& best_dist) {
  const Index n = X.rows();
  const Index p = medoid_points.rows();
  Vector medoid_sq = medoid_points.rowwise().squaredNorm();
  par::parallel_for(0, n, [&](std::ptrdiff_t b, std::ptrdiff_t e) {
    Matrix block(kDistanceBlock, p);
    for (Index row = b; row < e; row += kDistanceBlock) {
      const Index stop = std::min<Index>(e, row + kDistanceBlock);
      distance_block(X, sq_norms, medoid_points, medoid_sq, row, stop, block);
      for (Index i = row; i < stop; ++i) {
        Index arg = 0;
        double best = block(i - row, 0);
        for (Index j = 1; j < p; ++j) {
          const double d = block(i - row, j);
          if (d < best) {
            best = d;
            arg = j;
          }
        }
        assignment[static_cast<std::size_t>(i)] = arg;
        best_dist[i] = std::sqrt(best);
      }
    }
  });
}

}  // namespace

std::vector<Index> assign_nearest(const Matrix& X, const LandmarkSet& medoids) {
  if (medoids.p() < 1) throw std::invalid_argument("empty landmark set");
  for (Index idx : medoids.indices)
    if (idx < 0 || idx >= X.rows())
      throw std::invalid_argument("landmark index out of range");
  std::vector<Index> assignment(static_cast<std::size_t>(X.rows()));
  Vector best(X.rows());
  Vector sq = X.rowwise().squaredNorm();
  assign_all(X, sq, gather_rows(X, medoids.indices), assignment, best);
  return assignment;
}

LandmarkSet random_landmarks(Index n, Index p, std::uint64_t seed) {
  if (p < 1 || p > n) throw std::invalid_argument("need 1 <= p <= n");
  std::vector<Index> pool(static_cast<std::size_t>(n));
  std::iota(pool.begin(), pool.end(), Index{0});
  auto gen = substream(seed, "random-landmarks");
  // Partial Fisher-Yates: only the first p slots are needed.
  for (Index i = 0; i < p; ++i) {
    const Index j = i + static_cast<Index>(uniform_index(gen, static_cast<std::uint64_t>(n - i)));
    std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
  }
  LandmarkSet out;
  out.indices.assign(pool.begin(), pool.begin() + p);
  return out;
}

LandmarkSet kmedoids_landmarks(const Matrix& X, Index p, int max_iters,
                               std::uint64_t seed) {
  const Index n = X.rows();
  if (p < 1) throw std::invalid_argument("p must be positive");
  if (p > n) throw std::invalid_argument("p exceeds sample count");
  if (max_iters < 1) throw std::invalid_argument("max_iters must be >= 1");

  LandmarkSet result;
  if (p == n) {
    result.indices.resize(static_cast<std::size_t>(n));
    std::iota(result.indices.begin(), result.indices.end(), Index{0});
    return result;
  }

  const Vector sq = X.rowwise().squaredNorm();
  auto gen = substream(seed, "landmarks");

  // k-means++-style seeding: next medoid drawn proportional to squared
  // distance from the chosen set.
  std::vector<Index> medoids;
  std::vector<char> is_medoid(static_cast<std::size_t>(n), 0);
  medoids.push_back(static_cast<Index>(uniform_index(gen, static_cast<std::uint64_t>(n))));
  is_medoid[static_cast<std::size_t>(medoids[0])] = 1;
  Vector d2(n);
  par::parallel_for(0, n, [&](std::ptrdiff_t b, std::ptrdiff_t e) {
    for (Index i = b; i < e; ++i)
      d2[i] = std::max(0.0, sq[i] + sq[medoids[0]] - 2.0 * X.row(i).dot(X.row(medoids[0])));
  });
  while (static_cast<Index>(medoids.size()) < p) {
    const double total = d2.sum();
    Index next = -1;
    if (total > 0.0 && std::isfinite(total)) {
      const double target = uniform_unit(gen) * total;
      double acc = 0.0;
      for (Index i = 0; i < n; ++i) {
        acc += d2[i];
        if (acc >= target && !is_medoid[static_cast<std::size_t>(i)]) {
          next = i;
          break;
        }
      }
    }
    if (next < 0) {
      // All remaining mass on duplicates of chosen points; take the first
      // unchosen index.
      for (Index i = 0; i < n; ++i)
        if (!is_medoid[static_cast<std::size_t>(i)]) {
          next = i;
          break;
        }
    }
    medoids.push_back(next);
    is_medoid[static_cast<std::size_t>(next)] = 1;
    par::parallel_for(0, n, [&](std::ptrdiff_t b, std::ptrdiff_t e) {
      for (Index i = b; i < e; ++i) {
        const double nd = std::max(0.0, sq[i] + sq[next] - 2.0 * X.row(i).dot(X.row(next)));
        if (nd < d2[i]) d2[i] = nd;
      }
    });
  }

  std::vector<Index> assignment(static_cast<std::size_t>(n));
  Vector dist(n);
  double prev_cost = std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < max_iters; ++iter) {
    assign_all(X, sq, gather_rows(X, medoids), assignment, dist);
    const double cost = dist.sum();
    if (cost > prev_cost * (1.0 + 1e-9) + 1e-12)
      throw std::logic_error("k-medoids objective increased");
    prev_cost = cost;

    // Member lists so every per-cluster scan stays linear overall.
    std::vector<std::vector<Index>> members(static_cast<std::size_t>(p));
    for (Index i = 0; i < n; ++i)
      members[static_cast<std::size_t>(assignment[static_cast<std::size_t>(i)])].push_back(i);

    std::vector<Index> updated = medoids;
    std::fill(is_medoid.begin(), is_medoid.end(), 0);
    par::parallel_for(0, p, [&](std::ptrdiff_t cb, std::ptrdiff_t ce) {
      Vector mean(X.cols());
      for (Index c = cb; c < ce; ++c) {
        const auto& club = members[static_cast<std::size_t>(c)];
        if (club.empty()) continue;
        mean.setZero();
        for (Index i : club) mean += X.row(i).transpose();
        mean /= static_cast<double>(club.size());
        Index cand = -1;
        double cand_d = std::numeric_limits<double>::infinity();
        for (Index i : club) {
          const double d = (X.row(i).transpose() - mean).squaredNorm();
          if (d < cand_d) {
            cand_d = d;
            cand = i;
          }
        }
        if (cand >= 0 && cand != medoids[static_cast<std::size_t>(c)]) {
          // Guarded acceptance keeps the objective monotone.
          double old_sum = 0.0, new_sum = 0.0;
          for (Index i : club) {
            old_sum += (X.row(i) - X.row(medoids[static_cast<std::size_t>(c)])).norm();
            new_sum += (X.row(i) - X.row(cand)).norm();
          }
          if (new_sum < old_sum) updated[static_cast<std::size_t>(c)] = cand;
        }
      }
    });
    // Empty-cluster repair: hand the medoid to the farthest non-medoid point.
    for (Index c = 0; c < p; ++c)
      is_medoid[static_cast<std::size_t>(updated[static_cast<std::size_t>(c)])] = 1;
    for (Index c = 0; c < p; ++c) {
      if (!members[static_cast<std::size_t>(c)].empty()) continue;
      Index far = -1;
      double far_d = -1.0;
      for (Index i = 0; i < n; ++i) {
        if (is_medoid[static_cast<std::size_t>(i)]) continue;
        if (dist[i] > far_d) {
          far_d = dist[i];
          far = i;
        }
      }
      if (far >= 0) {
        updated[static_cast<std::size_t>(c)] = far;
        is_medoid[static_cast<std::size_t>(far)] = 1;
        prev_cost = std::numeric_limits<double>::infinity();  // repair may move cost
      }
    }

    if (updated == medoids) break;
    medoids = std::move(updated);
  }

  result.indices = std::move(medoids);
  return result;
}

}  // namespace mvsc
