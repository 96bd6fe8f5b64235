#include <doctest.h>

#include <fstream>
#include <random>

#include "mvsc/dataset.hpp"
#include "test_util.hpp"

using mvsc::Index;
using mvsc::Matrix;
using test_util::TempDir;

namespace {

void write_text(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path);
  out << content;
}

mvsc::MultiViewDataset two_view_dataset(Index n, Index d1, Index d2,
                                        std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  mvsc::MultiViewDataset ds;
  ds.n = n;
  ds.views.push_back({"a", test_util::random_matrix(n, d1, gen)});
  ds.views.push_back({"b", test_util::random_matrix(n, d2, gen)});
  return ds;
}

}  // namespace

TEST_CASE("manifest load returns the declared shapes") {
  TempDir dir("manifest");
  auto ds = two_view_dataset(100, 5, 3, 1);
  mvsc::save_dataset(ds, dir.path, mvsc::MatrixFormat::Csv);
  const auto loaded = mvsc::load_manifest(dir.path / "manifest.json");
  CHECK(loaded.view_count() == 2);
  CHECK(loaded.n == 100);
  CHECK(loaded.views[0].dim() == 5);
  CHECK(loaded.views[1].dim() == 3);
  CHECK_FALSE(loaded.labels.has_value());
}

TEST_CASE("manifest shape mismatch is rejected") {
  TempDir dir("mismatch");
  auto ds = two_view_dataset(99, 4, 2, 2);
  mvsc::save_dataset(ds, dir.path, mvsc::MatrixFormat::Csv);
  // Claim one more row than the files hold.
  std::string manifest = R"({"n": 100, "views": [
    {"name": "a", "path": "a.csv", "format": "csv", "dim": 4},
    {"name": "b", "path": "b.csv", "format": "csv", "dim": 2}], "labels": null})";
  write_text(dir.path / "manifest.json", manifest);
  CHECK_THROWS_WITH_AS(mvsc::load_manifest(dir.path / "manifest.json"),
                       doctest::Contains("99"), std::invalid_argument);
}

TEST_CASE("missing view file is reported") {
  TempDir dir("missing");
  write_text(dir.path / "manifest.json",
             R"({"n": 2, "views": [{"name": "a", "path": "absent.csv",
                 "format": "csv", "dim": 2}], "labels": null})");
  CHECK_THROWS_AS(mvsc::load_manifest(dir.path / "manifest.json"),
                  std::invalid_argument);
}

TEST_CASE("non-finite values are reported with view, row and column") {
  TempDir dir("nonfinite");
  write_text(dir.path / "a.csv", "1.0,2.0\n3.0,nan\n");
  write_text(dir.path / "manifest.json",
             R"({"n": 2, "views": [{"name": "a", "path": "a.csv",
                 "format": "csv", "dim": 2}], "labels": null})");
  try {
    mvsc::load_manifest(dir.path / "manifest.json");
    FAIL("expected a throw");
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    CHECK(msg.find("a") != std::string::npos);
    CHECK(msg.find("row 1") != std::string::npos);
    CHECK(msg.find("column 1") != std::string::npos);
  }
}

TEST_CASE("UCI-shaped manifest concatenates to 649 columns") {
  // Same view dimensions as the six-view digits corpus.
  const std::vector<Index> dims{216, 76, 64, 6, 240, 47};
  std::mt19937_64 gen(5);
  mvsc::MultiViewDataset ds;
  ds.n = 20;
  for (std::size_t v = 0; v < dims.size(); ++v)
    ds.views.push_back({"v" + std::to_string(v),
                        test_util::random_matrix(20, dims[v], gen)});
  const auto concat = mvsc::concatenate_views(ds);
  CHECK(concat.dim() == 649);
}

TEST_CASE("concatenation is the identity for a single view") {
  std::mt19937_64 gen(8);
  mvsc::MultiViewDataset ds;
  ds.n = 7;
  ds.views.push_back({"only", test_util::random_matrix(7, 4, gen)});
  const auto concat = mvsc::concatenate_views(ds);
  CHECK(concat.data == ds.views[0].data);
}

TEST_CASE("concatenation preserves blocks in view order") {
  auto ds = two_view_dataset(6, 2, 3, 3);
  const auto concat = mvsc::concatenate_views(ds);
  CHECK(concat.dim() == 5);
  for (Index i = 0; i < 6; ++i) {
    for (Index j = 0; j < 2; ++j) CHECK(concat.data(i, j) == ds.views[0].data(i, j));
    for (Index j = 0; j < 3; ++j)
      CHECK(concat.data(i, 2 + j) == ds.views[1].data(i, j));
  }
}

TEST_CASE("csv and f32le round-trips preserve values") {
  TempDir dir("roundtrip");
  std::mt19937_64 gen(13);
  Matrix m = test_util::random_matrix(23, 9, gen);
  m(0, 0) = 1e-17;
  m(1, 1) = -3.25e8;

  SUBCASE("csv round-trips exactly (shortest representation)") {
    mvsc::write_matrix_csv(dir.path / "m.csv", m);
    const Matrix back = mvsc::read_matrix_csv(dir.path / "m.csv");
    CHECK(back == m);
  }
  SUBCASE("f32le round-trips bit-exactly once quantized") {
    mvsc::write_matrix_f32le(dir.path / "m.f32", m);
    const Matrix once = mvsc::read_matrix_f32le(dir.path / "m.f32");
    mvsc::write_matrix_f32le(dir.path / "m2.f32", once);
    const Matrix twice = mvsc::read_matrix_f32le(dir.path / "m2.f32");
    CHECK(once == twice);
  }
}

TEST_CASE("labels round-trip and validate") {
  TempDir dir("labels");
  const std::vector<int> labels{0, 1, 2, 1, 0};
  mvsc::write_labels_csv(dir.path / "labels.csv", labels);
  CHECK(mvsc::read_labels_csv(dir.path / "labels.csv") == labels);
  write_text(dir.path / "bad.csv", "0\n-3\n");
  CHECK_THROWS_AS(mvsc::read_labels_csv(dir.path / "bad.csv"), std::invalid_argument);
}

TEST_CASE("synthetic generation is deterministic and labeled") {
  mvsc::SyntheticSpec spec;
  spec.n = 300;
  spec.k = 3;
  spec.view_count = 2;
  spec.dims = {4, 6};
  spec.noise = {0.0, 0.0};
  spec.seed = 42;
  const auto a = mvsc::generate_synthetic(spec);
  const auto b = mvsc::generate_synthetic(spec);
  REQUIRE(a.labels.has_value());
  CHECK(*a.labels == *b.labels);
  for (Index v = 0; v < 2; ++v) CHECK(a.views[static_cast<std::size_t>(v)].data ==
                                      b.views[static_cast<std::size_t>(v)].data);

  // Zero noise: every sample sits exactly on its cluster center.
  for (Index i = 0; i < spec.n; ++i) {
    for (Index j = 0; j < spec.n; ++j) {
      if ((*a.labels)[static_cast<std::size_t>(i)] == (*a.labels)[static_cast<std::size_t>(j)]) {
        CHECK(a.views[0].data.row(i) == a.views[0].data.row(j));
      }
    }
    if (i > 20) break;  // spot-check
  }
}

TEST_CASE("view corruption merges clusters so no single view suffices") {
  mvsc::SyntheticSpec spec;
  spec.n = 300;
  spec.k = 3;
  spec.view_count = 2;
  spec.dims = {5, 5};
  spec.noise = {0.3, 0.3};
  spec.seed = 9;
  spec.merges = {{0, {0, 1}}, {1, {1, 2}}};
  const auto ds = mvsc::generate_synthetic(spec);
  REQUIRE(ds.labels.has_value());

  // Oracle: nearest-centroid classification per view using true labels.
  const auto centroid_accuracy = [&](const Matrix& X) {
    Matrix centroids = Matrix::Zero(spec.k, X.cols());
    std::vector<Index> counts(static_cast<std::size_t>(spec.k), 0);
    for (Index i = 0; i < spec.n; ++i) {
      centroids.row((*ds.labels)[static_cast<std::size_t>(i)]) += X.row(i);
      ++counts[static_cast<std::size_t>((*ds.labels)[static_cast<std::size_t>(i)])];
    }
    for (int c = 0; c < spec.k; ++c)
      centroids.row(c) /= static_cast<double>(counts[static_cast<std::size_t>(c)]);
    Index correct = 0;
    for (Index i = 0; i < spec.n; ++i) {
      Index best = 0;
      double best_d = (X.row(i) - centroids.row(0)).squaredNorm();
      for (int c = 1; c < spec.k; ++c) {
        const double d = (X.row(i) - centroids.row(c)).squaredNorm();
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (best == (*ds.labels)[static_cast<std::size_t>(i)]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(spec.n);
  };

  const double acc0 = centroid_accuracy(ds.views[0].data);
  const double acc1 = centroid_accuracy(ds.views[1].data);
  mvsc::MultiViewDataset joint = ds;
  const double acc_joint = centroid_accuracy(mvsc::concatenate_views(joint).data);
  CHECK(acc0 < 0.9);  // merged pair is indistinguishable in view 0
  CHECK(acc1 < 0.9);
  CHECK(acc_joint > 0.99);
}

TEST_CASE("synthetic spec validation") {
  mvsc::SyntheticSpec spec;
  spec.n = 2;
  spec.k = 3;
  spec.view_count = 1;
  spec.dims = {2};
  spec.noise = {0.1};
  CHECK_THROWS_AS(mvsc::generate_synthetic(spec), std::invalid_argument);
}

TEST_CASE("zscore centers and scales each view") {
  auto ds = two_view_dataset(50, 3, 2, 21);
  ds.views[0].data.col(0).array() += 100.0;
  mvsc::zscore_views(ds);
  for (const auto& v : ds.views) {
    for (Index j = 0; j < v.dim(); ++j) {
      CHECK(std::abs(v.data.col(j).mean()) < 1e-9);
      const double sd = std::sqrt(v.data.col(j).squaredNorm() / 50.0);
      CHECK(sd == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
}
