#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mvsc/types.hpp"

namespace mvsc {

// One feature representation of the samples. data is n x dim, row = sample.
struct ViewMatrix {
  std::string name;
  Matrix data;

  Index rows() const { return data.rows(); }
  Index dim() const { return data.cols(); }
};

struct MultiViewDataset {
  std::vector<ViewMatrix> views;
  Index n = 0;
  std::optional<std::vector<int>> labels;

  Index view_count() const { return static_cast<Index>(views.size()); }

  // Throws std::invalid_argument on any invariant violation: empty views,
  // row-count mismatches, non-finite values (reported as view/row/column).
  void validate() const;
};

enum class MatrixFormat { Csv, F32le };

// Matrix file IO. CSV: UTF-8, '.' decimal, comma separated, one sample per
// line. f32le: two little-endian uint32 (n, d) then n*d float32, sample-major.
Matrix read_matrix_csv(const std::filesystem::path& path);
Matrix read_matrix_f32le(const std::filesystem::path& path);
void write_matrix_csv(const std::filesystem::path& path, const Matrix& m);
void write_matrix_f32le(const std::filesystem::path& path, const Matrix& m);

// Labels are 0-based integers, one per line.
std::vector<int> read_labels_csv(const std::filesystem::path& path);
void write_labels_csv(const std::filesystem::path& path,
                      const std::vector<int>& labels);

// Manifest JSON:
//   {"n": int, "views": [{"name": str, "path": str,
//    "format": "csv"|"f32le", "dim": int}], "labels": str|null}
// View paths are resolved relative to the manifest's directory.
MultiViewDataset load_manifest(const std::filesystem::path& manifest_path);

// Writes per-view matrix files plus manifest.json into dir.
void save_dataset(const MultiViewDataset& ds, const std::filesystem::path& dir,
                  MatrixFormat format);

// n x (sum of dims); feature blocks in view order.
ViewMatrix concatenate_views(const MultiViewDataset& ds);

// In-place per-view z-scoring (column mean 0, stddev 1; constant columns are
// only centered).
void zscore_views(MultiViewDataset& ds);

// Makes the named clusters indistinguishable inside one view by giving them
// the same blob center there.
struct ViewMerge {
  int view = 0;
  std::vector<int> clusters;
};

struct SyntheticSpec {
  Index n = 0;
  int k = 1;
  int view_count = 1;
  std::vector<Index> dims;     // size view_count
  std::vector<double> noise;   // size view_count, per-view stddev
  std::vector<ViewMerge> merges;
  double separation = 10.0;    // minimum pairwise center distance per view
  std::uint64_t seed = 0;
};

// k Gaussian blobs per view over shared sample/cluster assignments;
// deterministic for a fixed seed; dataset labels are populated.
MultiViewDataset generate_synthetic(const SyntheticSpec& spec);

}  // namespace mvsc
