#include "mvsc/affinity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "mvsc/parallel.hpp"
#include "mvsc/rng.hpp"

namespace mvsc {

namespace {
constexpr Index kRowBlock = 2048;
}

Matrix SparseRepresentation::to_dense() const {
  Matrix out = Matrix::Zero(n, p);
  for (Index i = 0; i < n; ++i)
    for (int a = 0; a < q; ++a) out(i, cols(i, a)) += weights(i, a);
  return out;
}

Matrix NormalizedRepresentation::to_dense() const {
  Matrix out = Matrix::Zero(n, p);
  for (Index i = 0; i < n; ++i)
    for (int a = 0; a < q; ++a) out(i, cols(i, a)) += weights(i, a);
  return out;
}

Vector NormalizedRepresentation::multiply_transpose(const Vector& x) const {
  Vector y = Vector::Zero(p);
  for (Index i = 0; i < n; ++i)
    for (int a = 0; a < q; ++a) y[cols(i, a)] += weights(i, a) * x[i];
  return y;
}

Vector NormalizedRepresentation::multiply(const Vector& x) const {
  Vector y = Vector::Zero(n);
  for (Index i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int a = 0; a < q; ++a) acc += weights(i, a) * x[cols(i, a)];
    y[i] = acc;
  }
  return y;
}

double median_bandwidth(const Matrix& X, std::size_t sample_pairs,
                        std::uint64_t seed) {
  const Index n = X.rows();
  if (n < 2) throw std::invalid_argument("median bandwidth needs >= 2 samples");
  if (sample_pairs == 0) throw std::invalid_argument("sample_pairs must be positive");

  std::vector<double> dists;
  if (n <= 2000) {
    dists.resize(static_cast<std::size_t>(n) * (static_cast<std::size_t>(n) - 1) / 2);
    std::size_t pos = 0;
    for (Index i = 0; i < n; ++i)
      for (Index j = i + 1; j < n; ++j)
        dists[pos++] = (X.row(i) - X.row(j)).norm();
  } else {
    auto gen = substream(seed, "bandwidth-pairs");
    dists.reserve(sample_pairs);
    for (std::size_t s = 0; s < sample_pairs; ++s) {
      const Index i = static_cast<Index>(uniform_index(gen, static_cast<std::uint64_t>(n)));
      Index j = static_cast<Index>(uniform_index(gen, static_cast<std::uint64_t>(n - 1)));
      if (j >= i) ++j;
      dists.push_back((X.row(i) - X.row(j)).norm());
    }
  }

  const std::size_t m = dists.size();
  auto mid = dists.begin() + static_cast<std::ptrdiff_t>(m / 2);
  std::nth_element(dists.begin(), mid, dists.end());
  double median = *mid;
  if (m % 2 == 0) {
    auto lo = std::max_element(dists.begin(), mid);
    median = 0.5 * (*lo + median);
  }
  if (median > 0.0) return median;

  // Median collapsed to zero: fall back to the smallest positive distance so
  // the bandwidth stays usable.
  double smallest = std::numeric_limits<double>::infinity();
  for (double d : dists)
    if (d > 0.0) smallest = std::min(smallest, d);
  if (!std::isfinite(smallest))
    throw std::invalid_argument("degenerate view: all points identical");
  return smallest;
}

SparseRepresentation build_sparse_representation(const Matrix& X,
                                                 const LandmarkSet& landmarks,
                                                 int q, double sigma) {
  const Index n = X.rows();
  const Index p = landmarks.p();
  if (q <= 0) throw std::invalid_argument("q must be positive");
  if (q >= p) throw std::invalid_argument("q must be smaller than p");
  if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
  for (Index idx : landmarks.indices)
    if (idx < 0 || idx >= n) throw std::invalid_argument("landmark index out of range");

  SparseRepresentation Z;
  Z.n = n;
  Z.p = p;
  Z.q = q;
  Z.sigma = sigma;
  Z.cols.resize(n, q);
  Z.weights.resize(n, q);

  Matrix landmark_points(p, X.cols());
  for (Index j = 0; j < p; ++j)
    landmark_points.row(j) = X.row(landmarks.indices[static_cast<std::size_t>(j)]);
  const Vector landmark_sq = landmark_points.rowwise().squaredNorm();
  const Vector sq = X.rowwise().squaredNorm();
  const double inv_two_sigma_sq = 1.0 / (2.0 * sigma * sigma);

  par::parallel_for(0, n, [&](std::ptrdiff_t rb, std::ptrdiff_t re) {
    Matrix block(kRowBlock, p);
    std::vector<std::pair<double, Index>> order(static_cast<std::size_t>(p));
    for (Index row = rb; row < re; row += kRowBlock) {
      const Index stop = std::min<Index>(re, row + kRowBlock);
      const Index b = stop - row;
      block.topRows(b).noalias() =
          -2.0 * X.middleRows(row, b) * landmark_points.transpose();
      block.topRows(b).colwise() += sq.segment(row, b);
      block.topRows(b).rowwise() += landmark_sq.transpose();
      for (Index i = row; i < stop; ++i) {
        for (Index j = 0; j < p; ++j)
          order[static_cast<std::size_t>(j)] = {std::max(0.0, block(i - row, j)), j};
        // (distance, position) ordering makes the q-th-neighbor tie rule exact.
        std::partial_sort(order.begin(), order.begin() + q, order.end());
        double row_sum = 0.0;
        for (int a = 0; a < q; ++a) {
          Z.cols(i, a) = order[static_cast<std::size_t>(a)].second;
          const double w = std::exp(-order[static_cast<std::size_t>(a)].first * inv_two_sigma_sq);
          Z.weights(i, a) = w;
          row_sum += w;
        }
        if (row_sum > 0.0) {
          for (int a = 0; a < q; ++a) Z.weights(i, a) /= row_sum;
        } else {
          // Every kernel value underflowed; keep the row connected.
          for (int a = 0; a < q; ++a) Z.weights(i, a) = 1.0 / q;
        }
      }
    }
  });
  return Z;
}

NormalizedRepresentation normalize_columns(const SparseRepresentation& Z) {
  NormalizedRepresentation out;
  out.n = Z.n;
  out.p = Z.p;
  out.q = Z.q;
  out.cols = Z.cols;
  out.weights = Z.weights;
  out.column_sums = Vector::Zero(Z.p);
  // Sequential accumulation in row order keeps the sums reproducible.
  for (Index i = 0; i < Z.n; ++i)
    for (int a = 0; a < Z.q; ++a) out.column_sums[Z.cols(i, a)] += Z.weights(i, a);
  Vector scale(Z.p);
  for (Index j = 0; j < Z.p; ++j)
    scale[j] = out.column_sums[j] > 0.0 ? 1.0 / std::sqrt(out.column_sums[j]) : 0.0;
  par::parallel_for(0, Z.n, [&](std::ptrdiff_t b, std::ptrdiff_t e) {
    for (Index i = b; i < e; ++i)
      for (int a = 0; a < Z.q; ++a) out.weights(i, a) *= scale[out.cols(i, a)];
  });
  return out;
}

}  // namespace mvsc
