#pragma once

#include <string_view>

#include "mvsc/affinity.hpp"
#include "mvsc/types.hpp"

namespace mvsc {

// n x k column-orthonormal spectral embedding; rows embed the samples. The
// implied affinity U U^T is never materialized.
struct ReducedRepresentation {
  Matrix U;                // n x k
  Vector singular_values;  // k, non-increasing
};

// Exact Zhat^T Zhat (p x p, symmetric PSD) from the row-sparse structure.
Matrix gram_matrix(const NormalizedRepresentation& zhat);

// Top-k left singular vectors of Zhat via eigendecomposition of the p x p
// Gram matrix: u_j = Zhat v_j / sigma_j. Columns are sign-fixed so the
// largest-magnitude entry is positive. Throws when fewer than k singular
// values exceed the rank tolerance (1e-10 relative); `label` names the
// offending view in the message.
ReducedRepresentation reduced_representation(const NormalizedRepresentation& zhat,
                                             Index k, std::string_view label = {});

// Helpers shared with the augmented-view construction.
namespace detail {
// Deterministic sign convention: flip each column so its largest-|.| entry
// (earliest on ties) is positive.
void fix_column_signs(Matrix& U);
}  // namespace detail

}  // namespace mvsc
