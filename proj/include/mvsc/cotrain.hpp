#pragma once

#include <cstdint>
#include <vector>

#include "mvsc/affinity.hpp"
#include "mvsc/dataset.hpp"
#include "mvsc/sampling.hpp"
#include "mvsc/spectral.hpp"
#include "mvsc/types.hpp"

namespace mvsc {

// Consensus embedding U*: the orthonormal n x k matrix whose projector
// minimizes the summed Frobenius disagreement with all per-view projectors.
struct AugmentedView {
  ReducedRepresentation rep;
  int iteration = 0;
  double eigen_gap = 0.0;  // between positions k and k+1 of the stacked spectrum
};

// Landmark columns of the implied consensus affinity: Atil(i, j) =
// <U* row i, U* row m_j>. The full n x n affinity is never formed.
struct LandmarkAffinity {
  Matrix atil;  // n x p
};

enum class ClampMode { Zero, Abs };
enum class SigmaMode { Median, Fixed };
enum class LandmarkMethod { KMedoids, Random };

struct CoTrainConfig {
  Index k = 2;
  Index p = 600;
  int q = 8;
  int max_iters = 10;
  double tol = -1.0;  // < 0: default 1e-3 * sqrt(2k)
  std::uint64_t seed = 0;
  SigmaMode sigma_mode = SigmaMode::Median;
  double sigma_value = 0.0;  // used with SigmaMode::Fixed
  std::size_t bandwidth_pairs = kDefaultBandwidthPairs;
  bool row_renormalize = true;
  ClampMode clamp = ClampMode::Zero;
  LandmarkMethod landmark_method = LandmarkMethod::KMedoids;
  int kmedoids_iters = 10;

  double resolved_tol() const;
  void validate() const;
};

struct IterationRecord {
  int iteration = 0;
  double delta = 0.0;
  double eigen_gap = 0.0;
  double seconds = 0.0;
  std::vector<double> clamped_fraction;  // per view
  std::vector<Index> collapsed_rows;     // per view
};

struct CoTrainingTrace {
  std::vector<IterationRecord> records;
};

struct UpdateStats {
  double clamped_fraction = 0.0;
  Index collapsed_rows = 0;
};

// Top-k left singular vectors of [U^1 ... U^V], via the (Vk) x (Vk) Gram
// matrix. Equals the top-k eigenvectors of sum_v U^v (U^v)^T.
AugmentedView augmented_representation(const std::vector<ReducedRepresentation>& views,
                                       Index k);

LandmarkAffinity extract_landmark_affinity(const AugmentedView& aug,
                                           const LandmarkSet& landmarks);

// Hadamard guidance: z_ij <- clamp(Atil_ij) * z_ij on the stored entries,
// optionally re-normalizing rows to sum 1. A row whose sum collapses below
// 1e-300 is reset to its pre-update state and counted.
SparseRepresentation update_view(const SparseRepresentation& Z,
                                 const LandmarkAffinity& atil,
                                 bool row_renormalize, ClampMode clamp,
                                 UpdateStats* stats = nullptr);

// Projector distance ||U_c U_c^T - U_p U_p^T||_F evaluated as
// sqrt(max(0, 2k - 2 ||U_p^T U_c||_F^2)); exact under orthonormality.
double convergence_delta(const ReducedRepresentation& prev,
                         const ReducedRepresentation& curr);

struct CoTrainResult {
  AugmentedView augmented;
  CoTrainingTrace trace;
  LandmarkSet landmarks;
  std::vector<double> sigmas;  // per view
};

// Full loop: landmarks -> per-view Z -> repeat {column-normalize ->
// per-view embeddings -> consensus -> landmark affinity -> Hadamard update}
// until the consensus projector moves less than tol or max_iters is reached.
// max_iters = 0 computes the iteration-free pipeline (no updates; empty
// trace), which is the LSC / ConcatLSC baseline path.
CoTrainResult run_guided_cotraining(const MultiViewDataset& ds,
                                    const CoTrainConfig& config);

}  // namespace mvsc
