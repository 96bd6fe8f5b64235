#include <chrono>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <new>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "mvsc/cotrain.hpp"
#include "mvsc/dataset.hpp"
#include "mvsc/metrics.hpp"
#include "mvsc/parallel.hpp"
#include "mvsc/pipeline.hpp"
#include "mvsc/rng.hpp"
#include "mvsc/sampling.hpp"

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const std::size_t comma = s.find(',', start);
    const std::string tok = s.substr(start, comma - start);
    if (!tok.empty()) out.push_back(tok);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

struct ClusterArgs {
  std::string manifest;
  std::string out_dir = ".";
  int k = 2;
  mvsc::Index p = 600;
  int q = 8;
  int max_iters = 10;
  double tol = -1.0;
  std::uint64_t seed = 0;
  std::string sigma = "median";
  double sigma_value = 0.0;
  std::string views;
  bool concat = false;
  bool zscore = false;
  bool no_row_renormalize = false;
  std::string clamp = "zero";
  std::string landmark_method = "kmedoids";
  int kmedoids_iters = 10;
  bool normalize_rows = false;
  int restarts = 10;
  int metric_tests = 10;
  bool dump_embedding = false;
  std::string sweep_p;
};

mvsc::PipelineOptions to_options(const ClusterArgs& a) {
  mvsc::PipelineOptions opt;
  opt.cotrain.k = a.k;
  opt.cotrain.p = a.p;
  opt.cotrain.q = a.q;
  opt.cotrain.max_iters = a.max_iters;
  opt.cotrain.tol = a.tol;
  opt.cotrain.seed = a.seed;
  if (a.sigma == "median") {
    opt.cotrain.sigma_mode = mvsc::SigmaMode::Median;
  } else if (a.sigma == "fixed") {
    opt.cotrain.sigma_mode = mvsc::SigmaMode::Fixed;
    opt.cotrain.sigma_value = a.sigma_value;
  } else {
    throw std::invalid_argument("--sigma must be 'median' or 'fixed'");
  }
  opt.cotrain.row_renormalize = !a.no_row_renormalize;
  if (a.clamp == "zero") {
    opt.cotrain.clamp = mvsc::ClampMode::Zero;
  } else if (a.clamp == "abs") {
    opt.cotrain.clamp = mvsc::ClampMode::Abs;
  } else {
    throw std::invalid_argument("--clamp must be 'zero' or 'abs'");
  }
  if (a.landmark_method == "kmedoids") {
    opt.cotrain.landmark_method = mvsc::LandmarkMethod::KMedoids;
  } else if (a.landmark_method == "random") {
    opt.cotrain.landmark_method = mvsc::LandmarkMethod::Random;
  } else {
    throw std::invalid_argument("--landmarks must be 'kmedoids' or 'random'");
  }
  opt.cotrain.kmedoids_iters = a.kmedoids_iters;
  opt.view_selection = split_csv(a.views);
  opt.concat_views = a.concat;
  opt.zscore = a.zscore;
  opt.normalize_embedding_rows = a.normalize_rows;
  opt.kmeans.restarts = a.restarts;
  opt.metric_tests = a.metric_tests;
  opt.dump_embedding = a.dump_embedding;
  return opt;
}

int cmd_cluster(const ClusterArgs& args) {
  const auto dataset = mvsc::load_manifest(args.manifest);
  fs::create_directories(args.out_dir);

  const auto sweep = split_csv(args.sweep_p);
  nlohmann::json sweep_results = nlohmann::json::array();
  mvsc::PipelineOptions options = to_options(args);
  mvsc::RunReport report;
  if (sweep.empty()) {
    report = mvsc::run_pipeline(dataset, options);
  } else {
    for (const auto& ps : sweep) {
      options.cotrain.p = std::stoll(ps);
      report = mvsc::run_pipeline(dataset, options);
      nlohmann::json entry{{"p", options.cotrain.p}};
      if (report.metrics) {
        entry["acc"] = report.metrics->mean_acc;
        entry["nmi"] = report.metrics->mean_nmi;
      }
      sweep_results.push_back(entry);
    }
  }

  const fs::path out(args.out_dir);
  mvsc::write_labels_csv(out / "labels.csv", report.labels);
  mvsc::write_trace_csv(out / "trace.csv", report.trace, report.view_names);
  if (report.embedding)
    mvsc::write_matrix_csv(out / "embedding.csv", *report.embedding);

  nlohmann::json doc = nlohmann::json::parse(report_to_json(report, options));
  doc["outputs"] = {{"labels", (out / "labels.csv").string()},
                    {"trace", (out / "trace.csv").string()}};
  if (report.embedding)
    doc["outputs"]["embedding"] = (out / "embedding.csv").string();
  if (!sweep_results.empty()) doc["sweep"] = sweep_results;
  std::ofstream rep(out / "report.json");
  rep << doc.dump(2) << '\n';
  std::cout << doc.dump(2) << std::endl;
  return 0;
}

int cmd_eval(const std::string& pred_path, const std::string& truth_path) {
  const auto pred = mvsc::read_labels_csv(pred_path);
  const auto truth = mvsc::read_labels_csv(truth_path);
  nlohmann::json doc{{"acc", mvsc::accuracy(pred, truth)},
                     {"nmi", mvsc::nmi(pred, truth)}};
  std::cout << doc.dump() << std::endl;
  return 0;
}

int cmd_landmarks(const std::string& manifest, mvsc::Index p, int iters,
                  std::uint64_t seed, const std::string& method,
                  const std::string& out_path) {
  const auto dataset = mvsc::load_manifest(manifest);
  mvsc::LandmarkSet set;
  if (method == "kmedoids") {
    set = mvsc::kmedoids_landmarks(mvsc::concatenate_views(dataset).data, p, iters, seed);
  } else if (method == "random") {
    set = mvsc::random_landmarks(dataset.n, p, seed);
  } else {
    throw std::invalid_argument("--method must be 'kmedoids' or 'random'");
  }
  std::ofstream out(out_path);
  if (!out) throw std::invalid_argument("cannot write " + out_path);
  for (mvsc::Index idx : set.indices) out << idx << '\n';
  return 0;
}

int cmd_synth(mvsc::Index n, int k, int v, const std::string& dims,
              const std::string& noise, const std::string& merges,
              double separation, std::uint64_t seed, const std::string& format,
              const std::string& out_dir) {
  mvsc::SyntheticSpec spec;
  spec.n = n;
  spec.k = k;
  spec.view_count = v;
  spec.seed = seed;
  spec.separation = separation;
  for (const auto& tok : split_csv(dims)) spec.dims.push_back(std::stoll(tok));
  for (const auto& tok : split_csv(noise)) spec.noise.push_back(std::stod(tok));
  if (spec.dims.size() == 1 && v > 1) spec.dims.assign(static_cast<std::size_t>(v), spec.dims[0]);
  if (spec.noise.size() == 1 && v > 1) spec.noise.assign(static_cast<std::size_t>(v), spec.noise[0]);
  // merge spec: "view:c1+c2[,view:c1+c2...]", e.g. "0:1+2,1:2+3"
  for (const auto& tok : split_csv(merges)) {
    const auto colon = tok.find(':');
    if (colon == std::string::npos)
      throw std::invalid_argument("bad merge spec '" + tok + "'");
    mvsc::ViewMerge m;
    m.view = std::stoi(tok.substr(0, colon));
    std::string rest = tok.substr(colon + 1);
    std::size_t start = 0;
    while (start <= rest.size()) {
      const auto plus = rest.find('+', start);
      m.clusters.push_back(std::stoi(rest.substr(start, plus - start)));
      if (plus == std::string::npos) break;
      start = plus + 1;
    }
    spec.merges.push_back(std::move(m));
  }
  const auto ds = mvsc::generate_synthetic(spec);
  mvsc::save_dataset(ds, out_dir,
                     format == "csv" ? mvsc::MatrixFormat::Csv : mvsc::MatrixFormat::F32le);
  std::cout << nlohmann::json{{"manifest", (fs::path(out_dir) / "manifest.json").string()},
                              {"n", ds.n},
                              {"views", ds.view_count()}}
                   .dump()
            << std::endl;
  return 0;
}

int cmd_bench(const std::string& sizes_csv, int k, mvsc::Index p, int q, int v,
              mvsc::Index dim, double noise, std::uint64_t seed,
              const std::string& out_path) {
  const auto size_tokens = split_csv(sizes_csv);
  if (size_tokens.empty()) throw std::invalid_argument("empty size list");
  std::vector<mvsc::Index> sizes;
  for (const auto& tok : size_tokens) sizes.push_back(std::stoll(tok));
  for (std::size_t i = 1; i < sizes.size(); ++i)
    if (sizes[i] < sizes[i - 1])
      throw std::invalid_argument("sizes must be ascending");

  std::ofstream out(out_path);
  if (!out) throw std::invalid_argument("cannot write " + out_path);
  out << "n,landmarks_s,affinity_s,loop_s,kmeans_s,total_s,error\n";

  for (mvsc::Index n : sizes) {
    try {
      mvsc::SyntheticSpec spec;
      spec.n = n;
      spec.k = k;
      spec.view_count = v;
      spec.dims.assign(static_cast<std::size_t>(v), dim);
      spec.noise.assign(static_cast<std::size_t>(v), noise);
      spec.seed = seed;
      const auto ds = mvsc::generate_synthetic(spec);

      mvsc::CoTrainConfig config;
      config.k = k;
      config.p = p;
      config.q = q;
      config.seed = seed;
      auto t0 = Clock::now();
      const auto landmarks =
          mvsc::kmedoids_landmarks(mvsc::concatenate_views(ds).data, p,
                                   config.kmedoids_iters, seed);
      const double t_land = seconds_since(t0);

      t0 = Clock::now();
      std::vector<mvsc::SparseRepresentation> zs;
      for (std::size_t view = 0; view < ds.views.size(); ++view) {
        const double sigma = mvsc::median_bandwidth(
            ds.views[view].data, mvsc::kDefaultBandwidthPairs,
            mvsc::derive_seed(seed, "sigma-" + std::to_string(view)));
        zs.push_back(mvsc::build_sparse_representation(ds.views[view].data,
                                                       landmarks, q, sigma));
      }
      const double t_aff = seconds_since(t0);

      t0 = Clock::now();
      mvsc::AugmentedView aug;
      for (int iter = 0; iter < config.max_iters; ++iter) {
        std::vector<mvsc::ReducedRepresentation> us;
        for (auto& z : zs)
          us.push_back(mvsc::reduced_representation(mvsc::normalize_columns(z), k));
        aug = mvsc::augmented_representation(us, k);
        const auto atil = mvsc::extract_landmark_affinity(aug, landmarks);
        for (auto& z : zs)
          z = mvsc::update_view(z, atil, config.row_renormalize, config.clamp);
      }
      const double t_loop = seconds_since(t0);

      t0 = Clock::now();
      const auto clustering =
          mvsc::kmeans(aug.rep.U, k, mvsc::derive_seed(seed, "kmeans"));
      const double t_kmeans = seconds_since(t0);
      (void)clustering;

      out << n << ',' << t_land << ',' << t_aff << ',' << t_loop << ','
          << t_kmeans << ',' << (t_land + t_aff + t_loop + t_kmeans) << ",\n";
      out.flush();
    } catch (const std::bad_alloc&) {
      out << n << ",,,,,,out_of_memory\n";
      out.flush();
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Landmark-based multi-view spectral clustering with guided co-training"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "Cap worker threads (0 = hardware)");

  ClusterArgs cluster_args;
  auto* cluster = app.add_subcommand("cluster", "Run the full pipeline on a manifest");
  cluster->add_option("--manifest", cluster_args.manifest, "Dataset manifest JSON")->required();
  cluster->add_option("--out", cluster_args.out_dir, "Output directory");
  cluster->add_option("--k", cluster_args.k, "Number of clusters")->required();
  cluster->add_option("--p", cluster_args.p, "Number of landmarks");
  cluster->add_option("--q", cluster_args.q, "Nearest landmarks per sample");
  cluster->add_option("--max-iters", cluster_args.max_iters, "Co-training iterations");
  cluster->add_option("--tol", cluster_args.tol, "Convergence tolerance (<0: default)");
  cluster->add_option("--seed", cluster_args.seed, "Master seed");
  cluster->add_option("--sigma", cluster_args.sigma, "Bandwidth mode: median|fixed");
  cluster->add_option("--sigma-value", cluster_args.sigma_value, "Bandwidth for --sigma fixed");
  cluster->add_option("--views", cluster_args.views, "Comma list of view names or 1-based indices");
  cluster->add_flag("--concat", cluster_args.concat, "Concatenate selected views into one");
  cluster->add_flag("--zscore", cluster_args.zscore, "Per-view feature standardization");
  cluster->add_flag("--no-row-renormalize", cluster_args.no_row_renormalize,
                    "Skip row re-normalization after the Hadamard update");
  cluster->add_option("--clamp", cluster_args.clamp, "Negative guidance handling: zero|abs");
  cluster->add_option("--landmarks", cluster_args.landmark_method,
                      "Landmark sampling: kmedoids|random");
  cluster->add_option("--kmedoids-iters", cluster_args.kmedoids_iters, "k-medoids sweeps");
  cluster->add_flag("--normalize-rows", cluster_args.normalize_rows,
                    "Row-normalize the embedding before k-means");
  cluster->add_option("--restarts", cluster_args.restarts, "k-means restarts");
  cluster->add_option("--metric-tests", cluster_args.metric_tests,
                      "k-means seeds averaged in the metrics");
  cluster->add_flag("--dump-embedding", cluster_args.dump_embedding, "Write embedding.csv");
  cluster->add_option("--sweep-p", cluster_args.sweep_p,
                      "Comma list of landmark counts to sweep");

  std::string eval_pred, eval_truth;
  auto* eval = app.add_subcommand("eval", "ACC/NMI between two label CSVs");
  eval->add_option("--pred", eval_pred, "Predicted labels CSV")->required();
  eval->add_option("--truth", eval_truth, "Ground-truth labels CSV")->required();

  std::string lm_manifest, lm_method = "kmedoids", lm_out = "landmarks.csv";
  mvsc::Index lm_p = 600;
  int lm_iters = 10;
  std::uint64_t lm_seed = 0;
  auto* landmarks = app.add_subcommand("landmarks", "Select landmark indices");
  landmarks->add_option("--manifest", lm_manifest)->required();
  landmarks->add_option("--p", lm_p, "Number of landmarks");
  landmarks->add_option("--iters", lm_iters, "k-medoids sweeps");
  landmarks->add_option("--seed", lm_seed);
  landmarks->add_option("--method", lm_method, "kmedoids|random");
  landmarks->add_option("--out", lm_out, "Output CSV of indices");

  mvsc::Index sy_n = 1000;
  int sy_k = 3, sy_v = 2;
  std::string sy_dims = "10", sy_noise = "0.5", sy_merges, sy_format = "f32le",
              sy_out = "synth";
  double sy_sep = 10.0;
  std::uint64_t sy_seed = 0;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic multi-view dataset");
  synth->add_option("--n", sy_n, "Samples");
  synth->add_option("--k", sy_k, "Clusters");
  synth->add_option("--v", sy_v, "Views");
  synth->add_option("--dims", sy_dims, "Per-view dims (single value broadcast)");
  synth->add_option("--noise", sy_noise, "Per-view noise (single value broadcast)");
  synth->add_option("--merges", sy_merges, "Cluster merges, e.g. 0:1+2,1:2+3");
  synth->add_option("--separation", sy_sep, "Minimum center distance");
  synth->add_option("--seed", sy_seed);
  synth->add_option("--format", sy_format, "csv|f32le");
  synth->add_option("--out", sy_out, "Output directory");

  std::string be_sizes, be_out = "bench.csv";
  int be_k = 5, be_q = 8, be_v = 3;
  mvsc::Index be_p = 500, be_dim = 20;
  double be_noise = 1.0;
  std::uint64_t be_seed = 0;
  auto* bench = app.add_subcommand("bench", "Per-stage timings on synthetic data");
  bench->add_option("--sizes", be_sizes, "Ascending comma list of n")->required();
  bench->add_option("--k", be_k);
  bench->add_option("--p", be_p);
  bench->add_option("--q", be_q);
  bench->add_option("--v", be_v);
  bench->add_option("--dim", be_dim, "Per-view dimension");
  bench->add_option("--noise", be_noise);
  bench->add_option("--seed", be_seed);
  bench->add_option("--out", be_out, "Output CSV");

  CLI11_PARSE(app, argc, argv);
  mvsc::par::set_max_threads(threads);

  try {
    if (*cluster) return cmd_cluster(cluster_args);
    if (*eval) return cmd_eval(eval_pred, eval_truth);
    if (*landmarks)
      return cmd_landmarks(lm_manifest, lm_p, lm_iters, lm_seed, lm_method, lm_out);
    if (*synth)
      return cmd_synth(sy_n, sy_k, sy_v, sy_dims, sy_noise, sy_merges, sy_sep,
                       sy_seed, sy_format, sy_out);
    if (*bench)
      return cmd_bench(be_sizes, be_k, be_p, be_q, be_v, be_dim, be_noise,
                       be_seed, be_out);
  } catch (const std::exception& e) {
    std::cerr << nlohmann::json{{"error", e.what()}}.dump() << std::endl;
    return 1;
  }
  return 0;
}
