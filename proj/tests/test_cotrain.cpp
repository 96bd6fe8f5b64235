#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <random>

#include "mvsc/cotrain.hpp"
#include "mvsc/kmeans.hpp"
#include "mvsc/metrics.hpp"
#include "test_util.hpp"

using mvsc::Index;
using mvsc::Matrix;

namespace {

mvsc::ReducedRepresentation make_rep(const Matrix& U) {
  mvsc::ReducedRepresentation rep;
  rep.U = U;
  rep.singular_values = mvsc::Vector::Ones(U.cols());
  return rep;
}

double projector_distance(const Matrix& A, const Matrix& B) {
  return (A * A.transpose() - B * B.transpose()).norm();
}

// Eq-6 style objective: summed squared projector disagreement.
double disagreement(const Matrix& U, const std::vector<Matrix>& views) {
  double total = 0.0;
  for (const auto& v : views)
    total += (U * U.transpose() - v * v.transpose()).squaredNorm();
  return total;
}

mvsc::SparseRepresentation random_sparse(Index n, Index p, int q,
                                         std::mt19937_64& gen) {
  mvsc::SparseRepresentation Z;
  Z.n = n;
  Z.p = p;
  Z.q = q;
  Z.cols.resize(n, q);
  Z.weights.resize(n, q);
  std::uniform_real_distribution<double> unif(0.1, 1.0);
  for (Index i = 0; i < n; ++i) {
    std::vector<Index> chosen;
    while (static_cast<int>(chosen.size()) < q) {
      const Index c = static_cast<Index>(gen() % static_cast<std::uint64_t>(p));
      if (std::find(chosen.begin(), chosen.end(), c) == chosen.end())
        chosen.push_back(c);
    }
    double sum = 0.0;
    for (int a = 0; a < q; ++a) {
      Z.cols(i, a) = chosen[static_cast<std::size_t>(a)];
      Z.weights(i, a) = unif(gen);
      sum += Z.weights(i, a);
    }
    Z.weights.row(i) /= sum;
  }
  return Z;
}

}  // namespace

TEST_CASE("single view: augmented representation spans the same subspace") {
  std::mt19937_64 gen(61);
  const Matrix U1 = test_util::random_orthonormal(40, 4, gen);
  const auto aug = mvsc::augmented_representation({make_rep(U1)}, 4);
  CHECK(projector_distance(aug.rep.U, U1) < 1e-8);
}

TEST_CASE("duplicated views add no information") {
  std::mt19937_64 gen(67);
  const Matrix U1 = test_util::random_orthonormal(50, 3, gen);
  const auto aug = mvsc::augmented_representation({make_rep(U1), make_rep(U1)}, 3);
  CHECK(projector_distance(aug.rep.U, U1) < 1e-8);
}

TEST_CASE("augmented view matches the dense eigenprojector oracle and beats "
          "random candidates") {
  std::mt19937_64 gen(71);
  const Index n = 50, k = 4;
  std::vector<Matrix> views;
  std::vector<mvsc::ReducedRepresentation> reps;
  for (int v = 0; v < 3; ++v) {
    views.push_back(test_util::random_orthonormal(n, k, gen));
    reps.push_back(make_rep(views.back()));
  }
  const auto aug = mvsc::augmented_representation(reps, k);

  // Dense oracle: top-k eigenvectors of sum of projectors.
  Matrix S = Matrix::Zero(n, n);
  for (const auto& v : views) S += v * v.transpose();
  Eigen::SelfAdjointEigenSolver<Matrix> solver(S);
  Matrix W(n, k);
  for (Index j = 0; j < k; ++j) W.col(j) = solver.eigenvectors().col(n - 1 - j);
  CHECK(projector_distance(aug.rep.U, W) < 1e-6);

  const double ours = disagreement(aug.rep.U, views);
  for (int t = 0; t < 1000; ++t) {
    const Matrix cand = test_util::random_orthonormal(n, k, gen);
    CHECK(ours <= disagreement(cand, views) + 1e-9);
  }

  // Orthonormality of the consensus.
  CHECK((aug.rep.U.transpose() * aug.rep.U - Matrix::Identity(k, k))
            .cwiseAbs()
            .maxCoeff() < 1e-8);
}

TEST_CASE("augmented_representation validates shapes") {
  std::mt19937_64 gen(3);
  const Matrix U1 = test_util::random_orthonormal(20, 3, gen);
  const Matrix U2 = test_util::random_orthonormal(21, 3, gen);
  CHECK_THROWS_AS(mvsc::augmented_representation({}, 3), std::invalid_argument);
  CHECK_THROWS_AS(mvsc::augmented_representation({make_rep(U1), make_rep(U2)}, 3),
                  std::invalid_argument);
}

TEST_CASE("landmark affinity extraction: self, orthogonal, dense oracle") {
  std::mt19937_64 gen(73);
  const Index n = 30, k = 4;
  mvsc::AugmentedView aug;
  aug.rep = make_rep(test_util::random_orthonormal(n, k, gen));
  mvsc::LandmarkSet lm;
  lm.indices = {2, 7, 11, 19, 28};
  const auto atil = mvsc::extract_landmark_affinity(aug, lm);

  // Self inner product at a landmark row.
  CHECK(atil.atil(2, 0) == doctest::Approx(aug.rep.U.row(2).squaredNorm()));

  // Dense oracle: slice of the full affinity.
  const Matrix A = aug.rep.U * aug.rep.U.transpose();
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < lm.p(); ++j)
      CHECK(std::abs(atil.atil(i, j) - A(i, lm.indices[static_cast<std::size_t>(j)])) < 1e-12);

  // Orthogonal rows produce a zero entry.
  mvsc::AugmentedView ortho;
  Matrix U = Matrix::Zero(4, 2);
  U(0, 0) = 1.0;
  U(1, 1) = 1.0;
  ortho.rep = make_rep(U);
  mvsc::LandmarkSet one;
  one.indices = {1};
  const auto a2 = mvsc::extract_landmark_affinity(ortho, one);
  CHECK(a2.atil(0, 0) == doctest::Approx(0.0));
}

TEST_CASE("constant positive guidance leaves a renormalized Z unchanged") {
  std::mt19937_64 gen(79);
  auto Z = random_sparse(20, 6, 3, gen);
  mvsc::LandmarkAffinity atil;
  atil.atil = Matrix::Constant(20, 6, 0.37);
  const auto updated = mvsc::update_view(Z, atil, true, mvsc::ClampMode::Zero);
  CHECK((updated.weights - Z.weights).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(updated.cols == Z.cols);
}

TEST_CASE("clamping one entry of a two-entry row leaves the survivor at one") {
  mvsc::SparseRepresentation Z;
  Z.n = 1;
  Z.p = 3;
  Z.q = 2;
  Z.cols.resize(1, 2);
  Z.cols << 0, 2;
  Z.weights.resize(1, 2);
  Z.weights << 0.6, 0.4;
  mvsc::LandmarkAffinity atil;
  atil.atil.resize(1, 3);
  atil.atil << -0.5, 1.0, 0.8;
  mvsc::UpdateStats stats;
  const auto updated = mvsc::update_view(Z, atil, true, mvsc::ClampMode::Zero, &stats);
  CHECK(updated.weights(0, 0) == doctest::Approx(0.0));
  CHECK(updated.weights(0, 1) == doctest::Approx(1.0));
  CHECK(stats.clamped_fraction == doctest::Approx(0.5));
}

TEST_CASE("update without renormalization equals the dense clamped Hadamard") {
  std::mt19937_64 gen(83);
  auto Z = random_sparse(25, 7, 3, gen);
  std::normal_distribution<double> normal;
  mvsc::LandmarkAffinity atil;
  atil.atil.resize(25, 7);
  for (Index i = 0; i < 25; ++i)
    for (Index j = 0; j < 7; ++j) atil.atil(i, j) = normal(gen);

  const auto updated = mvsc::update_view(Z, atil, false, mvsc::ClampMode::Zero);
  const Matrix oracle = atil.atil.cwiseMax(0.0).cwiseProduct(Z.to_dense());
  CHECK((updated.to_dense() - oracle).cwiseAbs().maxCoeff() < 1e-10);

  const auto updated_abs = mvsc::update_view(Z, atil, false, mvsc::ClampMode::Abs);
  const Matrix oracle_abs = atil.atil.cwiseAbs().cwiseProduct(Z.to_dense());
  CHECK((updated_abs.to_dense() - oracle_abs).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("fully clamped rows revert to their previous state and are counted") {
  std::mt19937_64 gen(89);
  auto Z = random_sparse(10, 5, 2, gen);
  mvsc::LandmarkAffinity atil;
  atil.atil = Matrix::Constant(10, 5, -1.0);
  mvsc::UpdateStats stats;
  const auto updated = mvsc::update_view(Z, atil, true, mvsc::ClampMode::Zero, &stats);
  CHECK(stats.collapsed_rows == 10);
  CHECK((updated.weights - Z.weights).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("convergence delta: zero for identical and rotated embeddings") {
  std::mt19937_64 gen(97);
  const Matrix U = test_util::random_orthonormal(40, 3, gen);
  CHECK(mvsc::convergence_delta(make_rep(U), make_rep(U)) == doctest::Approx(0.0));

  // Random 3x3 rotation via QR.
  const Matrix R = test_util::random_orthonormal(3, 3, gen);
  const Matrix rotated = U * R;
  CHECK(mvsc::convergence_delta(make_rep(U), make_rep(rotated)) < 1e-10);
}

TEST_CASE("convergence delta matches the dense projector difference") {
  std::mt19937_64 gen(101);
  const Matrix A = test_util::random_orthonormal(40, 3, gen);
  const Matrix B = test_util::random_orthonormal(40, 3, gen);
  const double dense = projector_distance(A, B);
  const double fast = mvsc::convergence_delta(make_rep(A), make_rep(B));
  CHECK(fast == doctest::Approx(dense).epsilon(1e-10));
  CHECK(fast == doctest::Approx(mvsc::convergence_delta(make_rep(B), make_rep(A))));
  CHECK(fast >= 0.0);
}

TEST_CASE("duplicated views reproduce the single-view pipeline") {
  mvsc::SyntheticSpec spec;
  spec.n = 150;
  spec.k = 3;
  spec.view_count = 1;
  spec.dims = {6};
  spec.noise = {0.6};
  spec.seed = 12;
  const auto single = mvsc::generate_synthetic(spec);

  mvsc::MultiViewDataset tripled = single;
  tripled.views.push_back({"copy1", single.views[0].data});
  tripled.views.push_back({"copy2", single.views[0].data});

  mvsc::CoTrainConfig config;
  config.k = 3;
  config.p = 20;
  config.q = 4;
  config.max_iters = 4;
  config.seed = 5;
  const auto res1 = mvsc::run_guided_cotraining(single, config);
  const auto res3 = mvsc::run_guided_cotraining(tripled, config);
  CHECK(projector_distance(res1.augmented.rep.U, res3.augmented.rep.U) < 1e-6);
}

TEST_CASE("separable three-view blobs cluster perfectly") {
  mvsc::SyntheticSpec spec;
  spec.n = 240;
  spec.k = 3;
  spec.view_count = 3;
  spec.dims = {5, 5, 5};
  spec.noise = {0.4, 0.4, 0.4};
  spec.seed = 33;
  const auto ds = mvsc::generate_synthetic(spec);

  mvsc::CoTrainConfig config;
  config.k = 3;
  config.p = 30;
  config.q = 5;
  config.max_iters = 5;
  config.seed = 1;
  const auto result = mvsc::run_guided_cotraining(ds, config);
  const auto clustering = mvsc::kmeans(result.augmented.rep.U, 3, 17);
  CHECK(mvsc::accuracy(clustering.labels, *ds.labels) == doctest::Approx(1.0));

  // Consensus orthonormality after iterating.
  CHECK((result.augmented.rep.U.transpose() * result.augmented.rep.U -
         Matrix::Identity(3, 3))
            .cwiseAbs()
            .maxCoeff() < 1e-8);
  for (const auto& rec : result.trace.records) CHECK(rec.delta >= 0.0);
}

TEST_CASE("infinite tolerance executes exactly one iteration") {
  mvsc::SyntheticSpec spec;
  spec.n = 60;
  spec.k = 2;
  spec.view_count = 2;
  spec.dims = {4, 4};
  spec.noise = {0.5, 0.5};
  spec.seed = 3;
  const auto ds = mvsc::generate_synthetic(spec);
  mvsc::CoTrainConfig config;
  config.k = 2;
  config.p = 10;
  config.q = 3;
  config.max_iters = 50;
  config.tol = std::numeric_limits<double>::infinity();
  config.seed = 2;
  const auto result = mvsc::run_guided_cotraining(ds, config);
  CHECK(result.trace.records.size() == 1);
  CHECK(result.trace.records[0].delta ==
        doctest::Approx(std::sqrt(2.0 * 2.0)));  // sqrt(2k), no previous iterate
}

TEST_CASE("max_iters zero runs the iteration-free pipeline") {
  mvsc::SyntheticSpec spec;
  spec.n = 60;
  spec.k = 2;
  spec.view_count = 1;
  spec.dims = {4};
  spec.noise = {0.5};
  spec.seed = 4;
  const auto ds = mvsc::generate_synthetic(spec);
  mvsc::CoTrainConfig config;
  config.k = 2;
  config.p = 10;
  config.q = 3;
  config.max_iters = 0;
  config.seed = 2;
  const auto result = mvsc::run_guided_cotraining(ds, config);
  CHECK(result.trace.records.empty());
  CHECK(result.augmented.rep.U.rows() == 60);
}

TEST_CASE("config validation") {
  mvsc::CoTrainConfig config;
  config.k = 5;
  config.p = 4;  // k > p
  CHECK_THROWS_AS(config.validate(), std::invalid_argument);
  config.p = 10;
  config.q = 10;  // q >= p
  CHECK_THROWS_AS(config.validate(), std::invalid_argument);
  config.q = 3;
  config.tol = 0.0;
  CHECK_THROWS_AS(config.validate(), std::invalid_argument);
}
