#include "mvsc/spectral.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>

#include "mvsc/parallel.hpp"

namespace mvsc {

namespace detail {

void fix_column_signs(Matrix& U) {
  for (Index j = 0; j < U.cols(); ++j) {
    Index arg = 0;
    double best = std::abs(U(0, j));
    for (Index i = 1; i < U.rows(); ++i) {
      const double a = std::abs(U(i, j));
      if (a > best) {
        best = a;
        arg = i;
      }
    }
    if (U(arg, j) < 0.0) U.col(j) = -U.col(j);
  }
}

}  // namespace detail

Matrix gram_matrix(const NormalizedRepresentation& zhat) {
  Matrix G = Matrix::Zero(zhat.p, zhat.p);
  // Upper triangle accumulated in row order, then mirrored: exact symmetry
  // and reproducible sums.
  for (Index i = 0; i < zhat.n; ++i) {
    for (int a = 0; a < zhat.q; ++a) {
      const Index ca = zhat.cols(i, a);
      const double wa = zhat.weights(i, a);
      if (wa == 0.0) continue;
      for (int b = a; b < zhat.q; ++b) {
        const Index cb = zhat.cols(i, b);
        const double v = wa * zhat.weights(i, b);
        if (ca <= cb)
          G(ca, cb) += v;
        else
          G(cb, ca) += v;
      }
    }
  }
  for (Index r = 0; r < zhat.p; ++r)
    for (Index c = r + 1; c < zhat.p; ++c) G(c, r) = G(r, c);
  return G;
}

ReducedRepresentation reduced_representation(const NormalizedRepresentation& zhat,
                                             Index k, std::string_view label) {
  if (k < 1) throw std::invalid_argument("k must be positive");
  if (k > zhat.p || k > zhat.n)
    throw std::invalid_argument("k exceeds the available rank (k <= min(n, p))");

  const Matrix G = gram_matrix(zhat);
  Eigen::SelfAdjointEigenSolver<Matrix> solver(G);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("eigendecomposition of the Gram matrix failed");
  const Vector& evals = solver.eigenvalues();  // ascending
  const Matrix& evecs = solver.eigenvectors();

  const double sigma_max = std::sqrt(std::max(0.0, evals[zhat.p - 1]));
  const double tol = 1e-10 * sigma_max;

  ReducedRepresentation out;
  out.U.resize(zhat.n, k);
  out.singular_values.resize(k);
  for (Index j = 0; j < k; ++j) {
    const Index src = zhat.p - 1 - j;
    const double sigma = std::sqrt(std::max(0.0, evals[src]));
    if (!(sigma > tol) || sigma == 0.0) {
      const std::string name = label.empty() ? "input" : std::string(label);
      throw std::runtime_error("view '" + name + "' has rank " + std::to_string(j) +
                               " below the requested k=" + std::to_string(k));
    }
    out.singular_values[j] = sigma;
  }

  // Back-projection u_j = Zhat v_j / sigma_j, parallel over sample rows.
  par::parallel_for(0, zhat.n, [&](std::ptrdiff_t b, std::ptrdiff_t e) {
    for (Index i = b; i < e; ++i) {
      for (Index j = 0; j < k; ++j) {
        const Index src = zhat.p - 1 - j;
        double acc = 0.0;
        for (int a = 0; a < zhat.q; ++a)
          acc += zhat.weights(i, a) * evecs(zhat.cols(i, a), src);
        out.U(i, j) = acc / out.singular_values[j];
      }
    }
  });
  detail::fix_column_signs(out.U);
  return out;
}

}  // namespace mvsc
