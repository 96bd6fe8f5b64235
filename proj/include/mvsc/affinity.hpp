#pragma once

#include <cstdint>
#include <vector>

#include "mvsc/sampling.hpp"
#include "mvsc/types.hpp"

namespace mvsc {

// Row-sparse n x p similarity between samples and landmarks: every row keeps
// exactly q slots (column index, nonnegative weight); entries may decay to 0
// during co-training but the support never grows. Non-empty rows sum to 1.
struct SparseRepresentation {
  Index n = 0;
  Index p = 0;
  int q = 0;
  double sigma = 0.0;
  IndexMatrix cols;  // n x q landmark positions, ordered nearest first
  Matrix weights;    // n x q

  Matrix to_dense() const;
};

// Column-scaled copy: Zhat = Z * D^{-1/2}, D = diag of column sums of Z.
// Zero columns are left untouched (pseudo-inverse convention).
struct NormalizedRepresentation {
  Index n = 0;
  Index p = 0;
  int q = 0;
  IndexMatrix cols;
  Matrix weights;
  Vector column_sums;  // of the un-normalized Z

  Matrix to_dense() const;
  // y = Zhat^T * x and y = Zhat * x without densifying.
  Vector multiply_transpose(const Vector& x) const;
  Vector multiply(const Vector& x) const;
};

// Median Euclidean distance over sample pairs: exact all-pairs when
// n <= 2000, otherwise `sample_pairs` seeded random pairs. Always positive;
// throws when every sampled distance is zero.
double median_bandwidth(const Matrix& X, std::size_t sample_pairs,
                        std::uint64_t seed);

inline constexpr std::size_t kDefaultBandwidthPairs = 1000000;

// Gaussian similarities exp(-|x_i - x_mj|^2 / (2 sigma^2)) over each sample's
// q nearest landmarks (ties at the q-th neighbor: lower landmark position),
// then row-normalized to sum 1.
SparseRepresentation build_sparse_representation(const Matrix& X,
                                                 const LandmarkSet& landmarks,
                                                 int q, double sigma);

NormalizedRepresentation normalize_columns(const SparseRepresentation& Z);

}  // namespace mvsc
