#include "mvsc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace mvsc {

namespace {

std::map<int, Index> compact_ids(const std::vector<int>& labels) {
  std::map<int, Index> ids;
  for (int v : labels) ids.emplace(v, 0);
  Index next = 0;
  for (auto& [value, id] : ids) id = next++;
  return ids;
}

void check_lengths(const std::vector<int>& pred, const std::vector<int>& truth) {
  if (pred.size() != truth.size())
    throw std::invalid_argument("label vectors differ in length");
  if (pred.empty()) throw std::invalid_argument("label vectors are empty");
}

}  // namespace

ContingencyTable ContingencyTable::from_labels(const std::vector<int>& pred,
                                               const std::vector<int>& truth) {
  check_lengths(pred, truth);
  const auto pid = compact_ids(pred);
  const auto tid = compact_ids(truth);
  ContingencyTable table;
  table.counts.setZero(static_cast<Index>(pid.size()), static_cast<Index>(tid.size()));
  for (std::size_t i = 0; i < pred.size(); ++i)
    ++table.counts(pid.at(pred[i]), tid.at(truth[i]));
  table.total = static_cast<std::int64_t>(pred.size());
  table.row_marginals.resize(pid.size());
  table.col_marginals.resize(tid.size());
  for (Index r = 0; r < table.counts.rows(); ++r)
    table.row_marginals[static_cast<std::size_t>(r)] = table.counts.row(r).sum();
  for (Index c = 0; c < table.counts.cols(); ++c)
    table.col_marginals[static_cast<std::size_t>(c)] = table.counts.col(c).sum();
  return table;
}

// Jonker-Volgenant style shortest augmenting paths with potentials, O(m^3)
// on the padded square matrix.
std::vector<int> hungarian(const Matrix& cost) {
  const Index r = cost.rows();
  const Index c = cost.cols();
  if (r < 1 || c < 1) throw std::invalid_argument("empty cost matrix");
  if (!cost.allFinite()) throw std::invalid_argument("cost matrix must be finite");
  const Index m = std::max(r, c);

  auto padded = [&](Index i, Index j) -> double {
    return (i < r && j < c) ? cost(i, j) : 0.0;
  };

  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(static_cast<std::size_t>(m) + 1, 0.0);
  std::vector<double> v(static_cast<std::size_t>(m) + 1, 0.0);
  std::vector<Index> match(static_cast<std::size_t>(m) + 1, 0);  // column -> row, 1-based
  std::vector<Index> way(static_cast<std::size_t>(m) + 1, 0);

  for (Index i = 1; i <= m; ++i) {
    match[0] = i;
    Index j0 = 0;
    std::vector<double> minv(static_cast<std::size_t>(m) + 1, inf);
    std::vector<char> used(static_cast<std::size_t>(m) + 1, 0);
    do {
      used[static_cast<std::size_t>(j0)] = 1;
      const Index i0 = match[static_cast<std::size_t>(j0)];
      double delta = inf;
      Index j1 = 0;
      for (Index j = 1; j <= m; ++j) {
        if (used[static_cast<std::size_t>(j)]) continue;
        const double cur = padded(i0 - 1, j - 1) - u[static_cast<std::size_t>(i0)] -
                           v[static_cast<std::size_t>(j)];
        if (cur < minv[static_cast<std::size_t>(j)]) {
          minv[static_cast<std::size_t>(j)] = cur;
          way[static_cast<std::size_t>(j)] = j0;
        }
        if (minv[static_cast<std::size_t>(j)] < delta) {
          delta = minv[static_cast<std::size_t>(j)];
          j1 = j;
        }
      }
      for (Index j = 0; j <= m; ++j) {
        if (used[static_cast<std::size_t>(j)]) {
          u[static_cast<std::size_t>(match[static_cast<std::size_t>(j)])] += delta;
          v[static_cast<std::size_t>(j)] -= delta;
        } else {
          minv[static_cast<std::size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (match[static_cast<std::size_t>(j0)] != 0);
    do {
      const Index j1 = way[static_cast<std::size_t>(j0)];
      match[static_cast<std::size_t>(j0)] = match[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<int> assignment(static_cast<std::size_t>(r), -1);
  for (Index j = 1; j <= m; ++j) {
    const Index i = match[static_cast<std::size_t>(j)];
    if (i >= 1 && i <= r && j <= c)
      assignment[static_cast<std::size_t>(i - 1)] = static_cast<int>(j - 1);
  }
  return assignment;
}

double accuracy(const std::vector<int>& pred, const std::vector<int>& truth) {
  const auto table = ContingencyTable::from_labels(pred, truth);
  Matrix cost = -table.counts.cast<double>();
  const auto assignment = hungarian(cost);
  std::int64_t matched = 0;
  for (Index rr = 0; rr < table.counts.rows(); ++rr) {
    const int cc = assignment[static_cast<std::size_t>(rr)];
    if (cc >= 0) matched += table.counts(rr, cc);
  }
  return static_cast<double>(matched) / static_cast<double>(table.total);
}

double nmi(const std::vector<int>& pred, const std::vector<int>& truth) {
  const auto table = ContingencyTable::from_labels(pred, truth);
  const double n = static_cast<double>(table.total);
  double h_pred = 0.0, h_truth = 0.0, mutual = 0.0;
  for (std::int64_t a : table.row_marginals) {
    if (a > 0) h_pred -= (a / n) * std::log(a / n);
  }
  for (std::int64_t b : table.col_marginals) {
    if (b > 0) h_truth -= (b / n) * std::log(b / n);
  }
  if (h_pred <= 0.0 && h_truth <= 0.0) return 1.0;  // both single-cluster
  if (h_pred <= 0.0 || h_truth <= 0.0) return 0.0;
  for (Index r = 0; r < table.counts.rows(); ++r) {
    for (Index c = 0; c < table.counts.cols(); ++c) {
      const std::int64_t nij = table.counts(r, c);
      if (nij <= 0) continue;
      const double pij = nij / n;
      const double pi = table.row_marginals[static_cast<std::size_t>(r)] / n;
      const double pj = table.col_marginals[static_cast<std::size_t>(c)] / n;
      mutual += pij * std::log(pij / (pi * pj));
    }
  }
  const double value = mutual / std::sqrt(h_pred * h_truth);
  return std::clamp(value, 0.0, 1.0);
}

}  // namespace mvsc
