#include "mvsc/pipeline.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "mvsc/metrics.hpp"
#include "mvsc/rng.hpp"

namespace mvsc {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::pair<double, double> mean_std(const std::vector<double>& xs) {
  if (xs.empty()) return {0.0, 0.0};
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  var /= static_cast<double>(xs.size());
  return {mean, std::sqrt(var)};
}

}  // namespace

MultiViewDataset select_views(const MultiViewDataset& ds,
                              const std::vector<std::string>& selection) {
  if (selection.empty()) return ds;
  MultiViewDataset out;
  out.n = ds.n;
  out.labels = ds.labels;
  for (const auto& want : selection) {
    const ViewMatrix* found = nullptr;
    for (const auto& v : ds.views)
      if (v.name == want) {
        found = &v;
        break;
      }
    if (!found) {
      int index = 0;
      auto [ptr, ec] = std::from_chars(want.data(), want.data() + want.size(), index);
      if (ec == std::errc() && ptr == want.data() + want.size() && index >= 1 &&
          index <= static_cast<int>(ds.views.size()))
        found = &ds.views[static_cast<std::size_t>(index - 1)];
    }
    if (!found)
      throw std::invalid_argument("unknown view '" + want + "'");
    out.views.push_back(*found);
  }
  return out;
}

RunReport run_pipeline(const MultiViewDataset& dataset, const PipelineOptions& options) {
  RunReport report;
  auto t0 = Clock::now();

  MultiViewDataset working = select_views(dataset, options.view_selection);
  if (options.concat_views) {
    MultiViewDataset merged;
    merged.n = working.n;
    merged.labels = working.labels;
    merged.views.push_back(concatenate_views(working));
    working = std::move(merged);
  }
  if (options.zscore) zscore_views(working);
  report.stage_seconds["prepare"] = seconds_since(t0);
  report.n = working.n;
  for (const auto& v : working.views) report.view_names.push_back(v.name);

  t0 = Clock::now();
  CoTrainResult cotrain = run_guided_cotraining(working, options.cotrain);
  report.stage_seconds["cotrain"] = seconds_since(t0);
  report.sigmas = cotrain.sigmas;
  report.iterations = static_cast<int>(cotrain.trace.records.size());
  report.final_delta =
      cotrain.trace.records.empty() ? 0.0 : cotrain.trace.records.back().delta;
  report.trace = std::move(cotrain.trace);

  t0 = Clock::now();
  Matrix embedding = options.normalize_embedding_rows
                         ? row_normalize(cotrain.augmented.rep.U)
                         : cotrain.augmented.rep.U;
  const int k = static_cast<int>(options.cotrain.k);
  const auto primary = kmeans(embedding, k,
                              derive_seed(options.cotrain.seed, "kmeans"),
                              options.kmeans);
  report.labels = primary.labels;
  report.stage_seconds["kmeans"] = seconds_since(t0);

  if (working.labels && options.metric_tests > 0) {
    t0 = Clock::now();
    MetricsSummary summary;
    for (int t = 0; t < options.metric_tests; ++t) {
      const auto run = kmeans(embedding, k,
                              derive_seed(options.cotrain.seed, "kmeans-test-" + std::to_string(t)),
                              options.kmeans);
      summary.acc_per_test.push_back(accuracy(run.labels, *working.labels));
      summary.nmi_per_test.push_back(nmi(run.labels, *working.labels));
    }
    std::tie(summary.mean_acc, summary.std_acc) = mean_std(summary.acc_per_test);
    std::tie(summary.mean_nmi, summary.std_nmi) = mean_std(summary.nmi_per_test);
    report.metrics = std::move(summary);
    report.stage_seconds["evaluate"] = seconds_since(t0);
  }

  if (options.dump_embedding) report.embedding = std::move(embedding);
  return report;
}

void write_trace_csv(const std::filesystem::path& path, const CoTrainingTrace& trace,
                     const std::vector<std::string>& view_names) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot write " + path.string());
  out << "iteration,delta,eigen_gap,seconds";
  for (const auto& name : view_names) out << ",clamped_fraction_" << name;
  for (const auto& name : view_names) out << ",collapsed_rows_" << name;
  out << '\n';
  for (const auto& rec : trace.records) {
    out << rec.iteration << ',' << rec.delta << ',' << rec.eigen_gap << ','
        << rec.seconds;
    for (double f : rec.clamped_fraction) out << ',' << f;
    for (Index c : rec.collapsed_rows) out << ',' << c;
    out << '\n';
  }
}

std::string report_to_json(const RunReport& report, const PipelineOptions& options) {
  nlohmann::json config{
      {"k", options.cotrain.k},
      {"p", options.cotrain.p},
      {"q", options.cotrain.q},
      {"max_iters", options.cotrain.max_iters},
      {"tol", options.cotrain.resolved_tol()},
      {"seed", options.cotrain.seed},
      {"sigma_mode", options.cotrain.sigma_mode == SigmaMode::Median ? "median" : "fixed"},
      {"row_renormalize", options.cotrain.row_renormalize},
      {"clamp", options.cotrain.clamp == ClampMode::Zero ? "zero" : "abs"},
      {"landmarks", options.cotrain.landmark_method == LandmarkMethod::KMedoids
                        ? "kmedoids"
                        : "random"},
      {"zscore", options.zscore},
      {"concat", options.concat_views},
      {"normalize_embedding_rows", options.normalize_embedding_rows},
      {"kmeans_restarts", options.kmeans.restarts},
      {"metric_tests", options.metric_tests},
  };
  nlohmann::json doc{
      {"config", config},
      {"n", report.n},
      {"views", report.view_names},
      {"sigmas", report.sigmas},
      {"iterations", report.iterations},
      {"final_delta", report.final_delta},
      {"stage_seconds", report.stage_seconds},
  };
  if (report.metrics) {
    doc["metrics"] = {
        {"acc", report.metrics->mean_acc},
        {"nmi", report.metrics->mean_nmi},
        {"acc_std", report.metrics->std_acc},
        {"nmi_std", report.metrics->std_nmi},
        {"acc_per_test", report.metrics->acc_per_test},
        {"nmi_per_test", report.metrics->nmi_per_test},
    };
  }
  return doc.dump(2);
}

}  // namespace mvsc
