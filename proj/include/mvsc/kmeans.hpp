#pragma once

#include <cstdint>
#include <vector>

#include "mvsc/types.hpp"

namespace mvsc {

struct ClusteringResult {
  std::vector<int> labels;  // in [0, k)
  Matrix centroids;         // k x dim
  double inertia = 0.0;     // sum of squared distances to assigned centroid
  int iterations = 0;       // Lloyd iterations of the winning restart
};

struct KMeansOptions {
  int max_iters = 300;
  int restarts = 10;
  double rel_tol = 1e-6;
};

// Seeded k-means++ with Lloyd iterations, best of `restarts` by inertia.
// Restart r draws from sub-stream "kmeans-restart-r" of the seed, so results
// are reproducible and independent of scheduling. Ties in assignment go to
// the lowest centroid index; an emptied cluster is repaired with the point
// farthest from its assigned centroid.
ClusteringResult kmeans(const Matrix& rows, int k, std::uint64_t seed,
                        const KMeansOptions& options = {});

// Unit-norm rows; zero rows stay zero.
Matrix row_normalize(const Matrix& rows);

}  // namespace mvsc
