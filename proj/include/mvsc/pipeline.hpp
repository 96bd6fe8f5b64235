#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mvsc/cotrain.hpp"
#include "mvsc/dataset.hpp"
#include "mvsc/kmeans.hpp"
#include "mvsc/types.hpp"

namespace mvsc {

struct PipelineOptions {
  CoTrainConfig cotrain;
  std::vector<std::string> view_selection;  // names or 1-based indices; empty = all
  bool concat_views = false;                // ConcatLSC: single stacked view
  bool zscore = false;
  bool normalize_embedding_rows = false;    // spectral row-normalize before k-means
  KMeansOptions kmeans;
  int metric_tests = 10;     // k-means seeds averaged when labels exist
  bool dump_embedding = false;
};

struct MetricsSummary {
  double mean_acc = 0.0;
  double mean_nmi = 0.0;
  double std_acc = 0.0;
  double std_nmi = 0.0;
  std::vector<double> acc_per_test;
  std::vector<double> nmi_per_test;
};

struct RunReport {
  Index n = 0;
  std::vector<std::string> view_names;
  std::vector<double> sigmas;
  int iterations = 0;
  double final_delta = 0.0;
  std::map<std::string, double> stage_seconds;
  std::optional<MetricsSummary> metrics;
  std::vector<int> labels;  // from the primary k-means run
  CoTrainingTrace trace;
  std::optional<Matrix> embedding;  // filled when options.dump_embedding
};

// Applies selection/concat/z-scoring, runs guided co-training, clusters the
// consensus embedding, and (when ground truth exists) averages ACC/NMI over
// `metric_tests` k-means seeds derived from the master seed.
RunReport run_pipeline(const MultiViewDataset& dataset, const PipelineOptions& options);

// Serialization of the run artifacts.
void write_trace_csv(const std::filesystem::path& path, const CoTrainingTrace& trace,
                     const std::vector<std::string>& view_names);
std::string report_to_json(const RunReport& report, const PipelineOptions& options);

// Selection helper shared with the CLI: picks views by name or 1-based index.
MultiViewDataset select_views(const MultiViewDataset& ds,
                              const std::vector<std::string>& selection);

}  // namespace mvsc
