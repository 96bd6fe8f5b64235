#pragma once

#include <vector>

#include "mvsc/types.hpp"

namespace mvsc {

// Co-occurrence counts between two labelings; the shared substrate of ACC
// and NMI. Label values are mapped to contiguous ids in sorted order.
struct ContingencyTable {
  Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> counts;  // r x c
  std::vector<std::int64_t> row_marginals;
  std::vector<std::int64_t> col_marginals;
  std::int64_t total = 0;

  static ContingencyTable from_labels(const std::vector<int>& pred,
                                      const std::vector<int>& truth);
};

// Minimum-cost one-to-one assignment on an r x c matrix (padded square
// internally). Returns, for each row, the assigned column (or -1 for rows
// matched to padding).
std::vector<int> hungarian(const Matrix& cost);

// Fraction correct under the best one-to-one mapping of predicted clusters
// to true classes.
double accuracy(const std::vector<int>& pred, const std::vector<int>& truth);

// I(pred; truth) / sqrt(H(pred) H(truth)), natural logs. Both partitions
// single-cluster: 1.0; one of them single-cluster (zero entropy) with the
// other split: 0.0.
double nmi(const std::vector<int>& pred, const std::vector<int>& truth);

}  // namespace mvsc
