#include "mvsc/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "mvsc/rng.hpp"

namespace mvsc {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::invalid_argument(msg); }

std::ifstream open_input(const std::filesystem::path& path, bool binary) {
  std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
  if (!in) fail("cannot open file: " + path.string());
  return in;
}

std::ofstream open_output(const std::filesystem::path& path, bool binary) {
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) fail("cannot open file for writing: " + path.string());
  return out;
}

double parse_double(std::string_view token, const std::filesystem::path& path,
                    std::size_t line_no) {
  double value = 0.0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    fail("bad numeric field '" + std::string(token) + "' at " + path.string() +
         ":" + std::to_string(line_no));
  }
  return value;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t'))
    s.remove_suffix(1);
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  return s;
}

}  // namespace

void MultiViewDataset::validate() const {
  if (views.empty()) fail("dataset has no views");
  if (n < 1) fail("dataset has no samples");
  for (const auto& v : views) {
    if (v.dim() < 1) fail("view '" + v.name + "' has zero feature dimension");
    if (v.rows() != n) {
      fail("view '" + v.name + "' has " + std::to_string(v.rows()) +
           " rows, dataset declares n=" + std::to_string(n));
    }
    for (Index i = 0; i < v.rows(); ++i) {
      for (Index j = 0; j < v.dim(); ++j) {
        if (!std::isfinite(v.data(i, j))) {
          fail("non-finite value in view '" + v.name + "' at row " +
               std::to_string(i) + ", column " + std::to_string(j));
        }
      }
    }
  }
  if (labels && static_cast<Index>(labels->size()) != n) {
    fail("labels length " + std::to_string(labels->size()) +
         " does not match n=" + std::to_string(n));
  }
}

Matrix read_matrix_csv(const std::filesystem::path& path) {
  std::ifstream in = open_input(path, false);
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  Index dim = -1;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view rest = trim(line);
    if (rest.empty()) continue;
    std::vector<double> row;
    while (true) {
      const std::size_t comma = rest.find(',');
      std::string_view tok = trim(rest.substr(0, comma));
      row.push_back(parse_double(tok, path, line_no));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (dim < 0) dim = static_cast<Index>(row.size());
    if (static_cast<Index>(row.size()) != dim) {
      fail("ragged CSV row at " + path.string() + ":" + std::to_string(line_no));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) fail("empty CSV matrix: " + path.string());
  Matrix m(static_cast<Index>(rows.size()), dim);
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < dim; ++j) m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  return m;
}

void write_matrix_csv(const std::filesystem::path& path, const Matrix& m) {
  std::ofstream out = open_output(path, false);
  char buf[64];
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), m(i, j));
      if (ec != std::errc()) fail("failed to format value");
      out.write(buf, ptr - buf);
      out.put(j + 1 == m.cols() ? '\n' : ',');
    }
  }
}

Matrix read_matrix_f32le(const std::filesystem::path& path) {
  std::ifstream in = open_input(path, true);
  std::uint32_t header[2];
  if (!in.read(reinterpret_cast<char*>(header), sizeof(header)))
    fail("truncated f32le header: " + path.string());
  const Index n = static_cast<Index>(header[0]);
  const Index d = static_cast<Index>(header[1]);
  if (n < 1 || d < 1) fail("invalid f32le header in " + path.string());
  std::vector<float> buf(static_cast<std::size_t>(n) * static_cast<std::size_t>(d));
  if (!in.read(reinterpret_cast<char*>(buf.data()),
               static_cast<std::streamsize>(buf.size() * sizeof(float))))
    fail("truncated f32le payload: " + path.string());
  Matrix m(n, d);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < d; ++j)
      m(i, j) = static_cast<double>(buf[static_cast<std::size_t>(i * d + j)]);
  return m;
}

void write_matrix_f32le(const std::filesystem::path& path, const Matrix& m) {
  std::ofstream out = open_output(path, true);
  const std::uint32_t header[2] = {static_cast<std::uint32_t>(m.rows()),
                                   static_cast<std::uint32_t>(m.cols())};
  out.write(reinterpret_cast<const char*>(header), sizeof(header));
  std::vector<float> buf(static_cast<std::size_t>(m.cols()));
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j)
      buf[static_cast<std::size_t>(j)] = static_cast<float>(m(i, j));
    out.write(reinterpret_cast<const char*>(buf.data()),
              static_cast<std::streamsize>(buf.size() * sizeof(float)));
  }
}

std::vector<int> read_labels_csv(const std::filesystem::path& path) {
  std::ifstream in = open_input(path, false);
  std::vector<int> labels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view tok = trim(line);
    if (tok.empty()) continue;
    int value = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (ec != std::errc() || ptr != tok.data() + tok.size() || value < 0) {
      fail("bad label '" + std::string(tok) + "' at " + path.string() + ":" +
           std::to_string(line_no));
    }
    labels.push_back(value);
  }
  if (labels.empty()) fail("empty labels file: " + path.string());
  return labels;
}

void write_labels_csv(const std::filesystem::path& path,
                      const std::vector<int>& labels) {
  std::ofstream out = open_output(path, false);
  for (int v : labels) out << v << '\n';
}

MultiViewDataset load_manifest(const std::filesystem::path& manifest_path) {
  std::ifstream in = open_input(manifest_path, false);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    fail("manifest parse error in " + manifest_path.string() + ": " + e.what());
  }
  if (!doc.contains("n") || !doc.contains("views") || !doc["views"].is_array() ||
      doc["views"].empty()) {
    fail("manifest must declare n and a non-empty views array: " +
         manifest_path.string());
  }
  const auto base = manifest_path.parent_path();
  MultiViewDataset ds;
  ds.n = doc["n"].get<Index>();
  for (const auto& jv : doc["views"]) {
    ViewMatrix view;
    view.name = jv.at("name").get<std::string>();
    const auto file = base / jv.at("path").get<std::string>();
    const auto format = jv.at("format").get<std::string>();
    if (format == "csv") {
      view.data = read_matrix_csv(file);
    } else if (format == "f32le") {
      view.data = read_matrix_f32le(file);
    } else {
      fail("unknown matrix format '" + format + "' for view '" + view.name + "'");
    }
    const Index declared_dim = jv.at("dim").get<Index>();
    if (view.dim() != declared_dim) {
      fail("view '" + view.name + "': file has dim " + std::to_string(view.dim()) +
           ", manifest declares " + std::to_string(declared_dim));
    }
    if (view.rows() != ds.n) {
      fail("view '" + view.name + "': file has " + std::to_string(view.rows()) +
           " rows, manifest declares n=" + std::to_string(ds.n));
    }
    ds.views.push_back(std::move(view));
  }
  if (doc.contains("labels") && !doc["labels"].is_null()) {
    ds.labels = read_labels_csv(base / doc["labels"].get<std::string>());
  }
  ds.validate();
  return ds;
}

void save_dataset(const MultiViewDataset& ds, const std::filesystem::path& dir,
                  MatrixFormat format) {
  ds.validate();
  std::filesystem::create_directories(dir);
  nlohmann::json views = nlohmann::json::array();
  for (const auto& v : ds.views) {
    const std::string ext = format == MatrixFormat::Csv ? ".csv" : ".f32";
    const std::string file = v.name + ext;
    if (format == MatrixFormat::Csv) {
      write_matrix_csv(dir / file, v.data);
    } else {
      write_matrix_f32le(dir / file, v.data);
    }
    views.push_back({{"name", v.name},
                     {"path", file},
                     {"format", format == MatrixFormat::Csv ? "csv" : "f32le"},
                     {"dim", v.dim()}});
  }
  nlohmann::json doc{{"n", ds.n}, {"views", views}};
  if (ds.labels) {
    write_labels_csv(dir / "labels.csv", *ds.labels);
    doc["labels"] = "labels.csv";
  } else {
    doc["labels"] = nullptr;
  }
  std::ofstream out = open_output(dir / "manifest.json", false);
  out << doc.dump(2) << '\n';
}

ViewMatrix concatenate_views(const MultiViewDataset& ds) {
  ds.validate();
  Index total = 0;
  for (const auto& v : ds.views) total += v.dim();
  ViewMatrix out;
  out.name = "concat";
  out.data.resize(ds.n, total);
  Index offset = 0;
  for (const auto& v : ds.views) {
    out.data.middleCols(offset, v.dim()) = v.data;
    offset += v.dim();
  }
  return out;
}

void zscore_views(MultiViewDataset& ds) {
  for (auto& v : ds.views) {
    for (Index j = 0; j < v.dim(); ++j) {
      auto col = v.data.col(j);
      const double mean = col.mean();
      col.array() -= mean;
      const double sd = std::sqrt(col.squaredNorm() / static_cast<double>(v.rows()));
      if (sd > 0.0) col /= sd;
    }
  }
}

MultiViewDataset generate_synthetic(const SyntheticSpec& spec) {
  if (spec.n < 1 || spec.k < 1 || spec.n < spec.k)
    fail("synthetic spec requires n >= k >= 1");
  if (spec.view_count < 1) fail("synthetic spec requires at least one view");
  if (static_cast<int>(spec.dims.size()) != spec.view_count ||
      static_cast<int>(spec.noise.size()) != spec.view_count)
    fail("dims/noise must list one entry per view");
  for (Index d : spec.dims)
    if (d < 1) fail("every view dimension must be >= 1");
  for (const auto& m : spec.merges) {
    if (m.view < 0 || m.view >= spec.view_count) fail("merge names an unknown view");
    for (int c : m.clusters)
      if (c < 0 || c >= spec.k) fail("merge names an unknown cluster");
  }

  MultiViewDataset ds;
  ds.n = spec.n;
  std::vector<int> labels(static_cast<std::size_t>(spec.n));
  for (Index i = 0; i < spec.n; ++i)
    labels[static_cast<std::size_t>(i)] = static_cast<int>(i % spec.k);
  ds.labels = labels;

  for (int v = 0; v < spec.view_count; ++v) {
    const Index d = spec.dims[static_cast<std::size_t>(v)];
    auto gen = substream(spec.seed, "synth-view-" + std::to_string(v));
    NormalSampler normal;

    Matrix centers(spec.k, d);
    for (int c = 0; c < spec.k; ++c)
      for (Index j = 0; j < d; ++j) centers(c, j) = normal(gen);
    if (spec.k > 1) {
      double min_dist = std::numeric_limits<double>::infinity();
      for (int a = 0; a < spec.k; ++a)
        for (int b = a + 1; b < spec.k; ++b)
          min_dist = std::min(min_dist, (centers.row(a) - centers.row(b)).norm());
      if (min_dist <= 0.0) fail("degenerate synthetic centers, change the seed");
      centers *= spec.separation / min_dist;
    }
    // Apply merges after scaling so merged clusters coincide exactly.
    for (const auto& m : spec.merges) {
      if (m.view != v || m.clusters.size() < 2) continue;
      for (std::size_t i = 1; i < m.clusters.size(); ++i)
        centers.row(m.clusters[i]) = centers.row(m.clusters[0]);
    }

    ViewMatrix view;
    view.name = "view" + std::to_string(v);
    view.data.resize(spec.n, d);
    const double sigma = spec.noise[static_cast<std::size_t>(v)];
    for (Index i = 0; i < spec.n; ++i) {
      const int c = labels[static_cast<std::size_t>(i)];
      for (Index j = 0; j < d; ++j)
        view.data(i, j) = centers(c, j) + sigma * normal(gen);
    }
    ds.views.push_back(std::move(view));
  }
  ds.validate();
  return ds;
}

}  // namespace mvsc
