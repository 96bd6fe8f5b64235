#include "mvsc/cotrain.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>

#include "mvsc/parallel.hpp"
#include "mvsc/rng.hpp"

namespace mvsc {

namespace {
double elapsed_seconds(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}
}  // namespace

double CoTrainConfig::resolved_tol() const {
  return tol < 0.0 ? 1e-3 * std::sqrt(2.0 * static_cast<double>(k)) : tol;
}

void CoTrainConfig::validate() const {
  if (k < 1) throw std::invalid_argument("k must be positive");
  if (k > p) throw std::invalid_argument("config requires k <= p");
  if (q <= 0 || q >= p) throw std::invalid_argument("config requires 0 < q < p");
  if (!(resolved_tol() > 0.0)) throw std::invalid_argument("tol must be positive");
  if (max_iters < 0) throw std::invalid_argument("max_iters must be >= 0");
  if (sigma_mode == SigmaMode::Fixed && !(sigma_value > 0.0))
    throw std::invalid_argument("fixed sigma must be positive");
}

AugmentedView augmented_representation(const std::vector<ReducedRepresentation>& views,
                                       Index k) {
  if (views.empty()) throw std::invalid_argument("no views given");
  const Index n = views[0].U.rows();
  for (const auto& v : views) {
    if (v.U.rows() != n) throw std::invalid_argument("views disagree on n");
    if (v.U.cols() != k) throw std::invalid_argument("views must be n x k");
  }
  const Index v_count = static_cast<Index>(views.size());
  const Index stacked = v_count * k;

  // Gram of the stacked embedding [U^1 ... U^V]; (Vk)^2 entries, n-linear.
  Matrix G(stacked, stacked);
  for (Index a = 0; a < v_count; ++a)
    for (Index b = a; b < v_count; ++b) {
      const Matrix block = views[static_cast<std::size_t>(a)].U.transpose() *
                           views[static_cast<std::size_t>(b)].U;
      G.block(a * k, b * k, k, k) = block;
      if (a != b) G.block(b * k, a * k, k, k) = block.transpose();
    }

  Eigen::SelfAdjointEigenSolver<Matrix> solver(G);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("eigendecomposition of the stacked Gram failed");
  const Vector& evals = solver.eigenvalues();
  const Matrix& evecs = solver.eigenvectors();

  AugmentedView out;
  out.rep.U.resize(n, k);
  out.rep.singular_values.resize(k);
  // With orthonormal inputs the k-th eigenvalue is >= 1 (the stacked Gram
  // dominates any single view's projector), so the division is safe.
  for (Index j = 0; j < k; ++j) {
    const double lam = std::max(0.0, evals[stacked - 1 - j]);
    out.rep.singular_values[j] = std::sqrt(lam);
  }
  out.eigen_gap = k < stacked
                      ? std::max(0.0, evals[stacked - k] - evals[stacked - 1 - k])
                      : std::max(0.0, evals[0]);

  Matrix top(stacked, k);
  for (Index j = 0; j < k; ++j) top.col(j) = evecs.col(stacked - 1 - j);
  par::parallel_for(0, n, [&](std::ptrdiff_t b, std::ptrdiff_t e) {
    for (Index i = b; i < e; ++i) {
      for (Index j = 0; j < k; ++j) {
        double acc = 0.0;
        for (Index a = 0; a < v_count; ++a)
          acc += views[static_cast<std::size_t>(a)].U.row(i).dot(
              top.col(j).segment(a * k, k));
        out.rep.U(i, j) = acc / out.rep.singular_values[j];
      }
    }
  });
  detail::fix_column_signs(out.rep.U);
  return out;
}

LandmarkAffinity extract_landmark_affinity(const AugmentedView& aug,
                                           const LandmarkSet& landmarks) {
  const Matrix& U = aug.rep.U;
  for (Index idx : landmarks.indices)
    if (idx < 0 || idx >= U.rows())
      throw std::invalid_argument("landmark index out of range");
  Matrix um(landmarks.p(), U.cols());
  for (Index j = 0; j < landmarks.p(); ++j)
    um.row(j) = U.row(landmarks.indices[static_cast<std::size_t>(j)]);
  LandmarkAffinity out;
  out.atil.resize(U.rows(), landmarks.p());
  par::parallel_for(0, U.rows(), [&](std::ptrdiff_t b, std::ptrdiff_t e) {
    out.atil.middleRows(b, e - b).noalias() = U.middleRows(b, e - b) * um.transpose();
  });
  return out;
}

SparseRepresentation update_view(const SparseRepresentation& Z,
                                 const LandmarkAffinity& atil,
                                 bool row_renormalize, ClampMode clamp,
                                 UpdateStats* stats) {
  if (atil.atil.rows() != Z.n || atil.atil.cols() != Z.p)
    throw std::invalid_argument("affinity shape does not match Z");

  SparseRepresentation out = Z;
  std::vector<Index> clamped(static_cast<std::size_t>(Z.n), 0);
  std::vector<char> collapsed(static_cast<std::size_t>(Z.n), 0);
  par::parallel_for(0, Z.n, [&](std::ptrdiff_t b, std::ptrdiff_t e) {
    for (Index i = b; i < e; ++i) {
      double row_sum = 0.0;
      Index row_clamped = 0;
      for (int a = 0; a < Z.q; ++a) {
        const double g = atil.atil(i, Z.cols(i, a));
        if (g < 0.0) ++row_clamped;
        const double factor = clamp == ClampMode::Zero ? std::max(g, 0.0) : std::abs(g);
        out.weights(i, a) = factor * Z.weights(i, a);
        row_sum += out.weights(i, a);
      }
      clamped[static_cast<std::size_t>(i)] = row_clamped;
      if (row_renormalize) {
        if (row_sum < 1e-300) {
          // All guidance wiped out; keep the previous (normalized) row.
          out.weights.row(i) = Z.weights.row(i);
          collapsed[static_cast<std::size_t>(i)] = 1;
        } else {
          out.weights.row(i) /= row_sum;
        }
      }
    }
  });
  if (stats) {
    Index total_clamped = 0, total_collapsed = 0;
    for (Index i = 0; i < Z.n; ++i) {
      total_clamped += clamped[static_cast<std::size_t>(i)];
      total_collapsed += collapsed[static_cast<std::size_t>(i)];
    }
    stats->clamped_fraction = static_cast<double>(total_clamped) /
                              (static_cast<double>(Z.n) * static_cast<double>(Z.q));
    stats->collapsed_rows = total_collapsed;
  }
  return out;
}

double convergence_delta(const ReducedRepresentation& prev,
                         const ReducedRepresentation& curr) {
  if (prev.U.rows() != curr.U.rows() || prev.U.cols() != curr.U.cols())
    throw std::invalid_argument("embeddings disagree on shape");
  const Index k = curr.U.cols();
  const Matrix cross = prev.U.transpose() * curr.U;
  const double value = 2.0 * static_cast<double>(k) - 2.0 * cross.squaredNorm();
  return std::sqrt(std::max(0.0, value));
}

CoTrainResult run_guided_cotraining(const MultiViewDataset& ds,
                                    const CoTrainConfig& config) {
  ds.validate();
  config.validate();
  if (config.p > ds.n)
    throw std::invalid_argument("p exceeds the dataset sample count");

  CoTrainResult result;

  // Step 1: landmarks shared by all views, from concatenated features.
  const ViewMatrix concat = concatenate_views(ds);
  result.landmarks =
      config.landmark_method == LandmarkMethod::KMedoids
          ? kmedoids_landmarks(concat.data, config.p, config.kmedoids_iters,
                               config.seed)
          : random_landmarks(ds.n, config.p, config.seed);

  // Step 2: per-view sparse representations, fixed q-NN support.
  std::vector<SparseRepresentation> zs;
  zs.reserve(ds.views.size());
  result.sigmas.reserve(ds.views.size());
  for (std::size_t v = 0; v < ds.views.size(); ++v) {
    double sigma = config.sigma_value;
    if (config.sigma_mode == SigmaMode::Median) {
      try {
        sigma = median_bandwidth(ds.views[v].data, config.bandwidth_pairs,
                                 derive_seed(config.seed, "sigma-" + std::to_string(v)));
      } catch (const std::invalid_argument& e) {
        throw std::invalid_argument("view '" + ds.views[v].name + "': " + e.what());
      }
    }
    result.sigmas.push_back(sigma);
    zs.push_back(build_sparse_representation(ds.views[v].data, result.landmarks,
                                             config.q, sigma));
  }

  const double tol = config.resolved_tol();
  const auto embed_all = [&]() {
    std::vector<ReducedRepresentation> us;
    us.reserve(zs.size());
    for (std::size_t v = 0; v < zs.size(); ++v)
      us.push_back(reduced_representation(normalize_columns(zs[v]), config.k,
                                          ds.views[v].name));
    return us;
  };

  if (config.max_iters == 0) {
    result.augmented = augmented_representation(embed_all(), config.k);
    result.augmented.iteration = 0;
    return result;
  }

  AugmentedView previous;
  for (int iter = 1; iter <= config.max_iters; ++iter) {
    const auto start = std::chrono::steady_clock::now();
    AugmentedView aug = augmented_representation(embed_all(), config.k);
    aug.iteration = iter;

    const double delta = iter == 1
                             ? std::sqrt(2.0 * static_cast<double>(config.k))
                             : convergence_delta(previous.rep, aug.rep);

    const LandmarkAffinity atil = extract_landmark_affinity(aug, result.landmarks);
    IterationRecord record;
    record.iteration = iter;
    record.delta = delta;
    record.eigen_gap = aug.eigen_gap;
    for (auto& z : zs) {
      UpdateStats stats;
      z = update_view(z, atil, config.row_renormalize, config.clamp, &stats);
      record.clamped_fraction.push_back(stats.clamped_fraction);
      record.collapsed_rows.push_back(stats.collapsed_rows);
    }
    record.seconds = elapsed_seconds(start);
    result.trace.records.push_back(std::move(record));

    previous = std::move(aug);
    if (delta < tol) break;
  }
  result.augmented = std::move(previous);
  return result;
}

}  // namespace mvsc
