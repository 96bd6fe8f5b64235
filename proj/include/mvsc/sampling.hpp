#pragma once

#include <cstdint>
#include <vector>

#include "mvsc/types.hpp"

namespace mvsc {

// p distinct sample indices shared by all views. Landmarks are always actual
// data points, never synthetic centroids.
struct LandmarkSet {
  std::vector<Index> indices;

  Index p() const { return static_cast<Index>(indices.size()); }
};

// Index (into 0..p) of the Euclidean-nearest medoid per sample; ties go to
// the lowest medoid position.
std::vector<Index> assign_nearest(const Matrix& X, const LandmarkSet& medoids);

// Alternating Voronoi k-medoids on concatenated features: assign every point
// to its nearest medoid, then move each medoid to the cluster member nearest
// the cluster mean (kept only when it does not increase that cluster's
// distance sum, so the objective is non-increasing). k-means++-style seeding.
LandmarkSet kmedoids_landmarks(const Matrix& X, Index p, int max_iters,
                               std::uint64_t seed);

// p distinct indices uniform without replacement.
LandmarkSet random_landmarks(Index n, Index p, std::uint64_t seed);

}  // namespace mvsc
