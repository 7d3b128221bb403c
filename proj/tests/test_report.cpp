#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include <json.hpp>

#include <covseg/ingestion.hpp>
#include <covseg/report.hpp>
#include <covseg/version.hpp>

#include "support.hpp"

using namespace covseg;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ignore;
    fs::remove_all(path, ignore);
  }
};

SampledScenario fx_style_scenario(std::uint64_t seed) {
  MixtureScenario scenario;
  scenario.seed = seed;
  RegimeSpec quiet;
  quiet.length = 400;
  quiet.mean = Eigen::VectorXd::Zero(3);
  quiet.covariance = Eigen::MatrixXd::Identity(3, 3);
  RegimeSpec loud = quiet;
  loud.length = 350;
  loud.covariance *= 4.0;
  scenario.regimes = {quiet, loud, quiet};
  return sample_scenario(scenario);
}

RunMeta run_meta(const SplitConfig& config, std::ptrdiff_t m) {
  RunMeta meta;
  meta.input = "inline-test";
  meta.returns = "log";
  meta.delta0 = config.delta0;
  meta.margin_factor = config.min_margin_factor;
  meta.t_min = config.min_offset(m);
  meta.jitter_epsilon = config.jitter_epsilon;
  meta.refine = config.refine;
  meta.max_depth = config.max_depth;
  meta.version = kVersion;
  return meta;
}

}  // namespace

TEST_CASE("format_number emits 12 significant digits") {
  CHECK(format_number(1.0 / 3.0) == "0.333333333333");
  CHECK(format_number(300.0) == "300");
  CHECK(format_number(-2.5e-7) == "-2.5e-07");
  CHECK(format_number(0.0) == "0");
}

TEST_CASE("config_hash is stable and sensitive") {
  RunMeta meta;
  meta.delta0 = 300.0;
  meta.version = kVersion;
  const std::string base = config_hash(meta);
  CHECK(base == config_hash(meta));
  CHECK(base.size() == 16);

  RunMeta changed = meta;
  changed.delta0 = 50.0;
  CHECK(config_hash(changed) != base);
  changed = meta;
  changed.refine = true;
  CHECK(config_hash(changed) != base);
  // The input path is run metadata, not configuration.
  changed = meta;
  changed.input = "elsewhere.csv";
  CHECK(config_hash(changed) == base);
}

TEST_CASE("segment report: files, JSON shape, and entropy round trip") {
  const SampledScenario sampled = fx_style_scenario(404);
  SplitConfig config;
  config.delta0 = 30.0;
  const SegmentationResult result = segment_recursive(sampled.data, config);
  REQUIRE(result.segments.size() >= 2);

  TempDir dir("covseg-report-test");
  const ReportFiles files =
      write_segment_report(dir.path, sampled.data, result, run_meta(config, 3));
  for (const auto& file : files.all()) CHECK(fs::exists(file));

  const nlohmann::json doc = nlohmann::json::parse(slurp(files.segments_json));
  CHECK(doc["meta"]["tool"] == "covseg");
  CHECK(doc["meta"]["version"] == kVersion);
  CHECK(doc["meta"]["delta0"] == 30.0);
  CHECK(doc["meta"]["margin_factor"] == 3);
  CHECK(doc["meta"]["t_min"] == 10);
  CHECK(doc["meta"]["m"] == 3);
  CHECK(doc["meta"]["t"] == 1150);
  CHECK(doc["meta"]["config_hash"].get<std::string>().size() == 16);

  const auto& segments = doc["segments"];
  REQUIRE(segments.size() == result.segments.size());
  std::ptrdiff_t covered = 0;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const auto& s = segments[i];
    CHECK(s["k"] == i + 1);  // 1-based
    const std::ptrdiff_t begin = s["begin_col"].get<std::ptrdiff_t>();
    const std::ptrdiff_t end = s["end_col"].get<std::ptrdiff_t>();
    covered += end - begin;
    // Entropy recomputed from the emitted boundaries matches the report.
    const double recomputed = gaussian_entropy(estimate_gaussian(sampled.data, {begin, end}));
    CHECK(std::abs(s["entropy"].get<double>() - recomputed) <= 1e-9);
    const auto eigenvalues = s["eigenvalues"].get<std::vector<double>>();
    REQUIRE(eigenvalues.size() == 3);
    CHECK(eigenvalues[0] >= eigenvalues[1]);
    CHECK(eigenvalues[1] >= eigenvalues[2]);
    CHECK(s["mean"].size() == 3);
  }
  CHECK(covered == 1150);

  // Step files: two rows per segment plus a header.
  const std::string entropy_text = slurp(files.entropy_steps_tsv);
  const auto lines = std::count(entropy_text.begin(), entropy_text.end(), '\n');
  CHECK(lines == static_cast<long>(2 * result.segments.size() + 1));

  // Tree: thresholds hold on every node.
  const nlohmann::json tree = nlohmann::json::parse(slurp(files.tree_json));
  std::function<void(const nlohmann::json&)> walk = [&](const nlohmann::json& node) {
    if (node.contains("leaf")) {
      if (node["reason"] == "below_threshold") {
        CHECK(node["rejected_delta_star"].get<double>() < config.delta0);
      }
    } else {
      CHECK(node["accepted"] == true);
      CHECK(node["delta_star"].get<double>() >= config.delta0);
      walk(node["left"]);
      walk(node["right"]);
    }
  };
  walk(tree);
  CHECK(tree["range"][0] == 0);
  CHECK(tree["range"][1] == 1150);
}

TEST_CASE("segment report is byte-deterministic") {
  const SampledScenario sampled = fx_style_scenario(505);
  SplitConfig config;
  config.delta0 = 30.0;
  const SegmentationResult result = segment_recursive(sampled.data, config);

  TempDir dir_a("covseg-report-a");
  TempDir dir_b("covseg-report-b");
  const RunMeta meta = run_meta(config, 3);
  const ReportFiles a = write_segment_report(dir_a.path, sampled.data, result, meta);
  const ReportFiles b = write_segment_report(dir_b.path, sampled.data, result, meta);
  const auto files_a = a.all();
  const auto files_b = b.all();
  for (std::size_t i = 0; i < files_a.size(); ++i) {
    CHECK(slurp(files_a[i]) == slurp(files_b[i]));
  }
}

TEST_CASE("spectrum dump marks the maximum and normalizes by n") {
  NormalStream normal(8080);
  const ReturnMatrix data = test::wrap(test::random_matrix(normal, 2, 40));
  SplitConfig config;
  config.delta0 = 20.0;
  config.min_margin_factor = 1;
  const DeltaSpectrum spectrum = delta_spectrum(data, {0, 40}, config);

  std::ostringstream out;
  write_spectrum_dump(out, spectrum);
  std::istringstream lines(out.str());
  std::string header;
  std::getline(lines, header);
  CHECK(header.find("best_t=" + std::to_string(spectrum.best_offset)) != std::string::npos);
  std::string columns;
  std::getline(lines, columns);
  CHECK(columns == "t\tdelta\tdelta_over_n\tbest");

  int best_markers = 0;
  std::string row;
  std::size_t rows = 0;
  while (std::getline(lines, row)) {
    std::istringstream fields(row);
    long t = 0;
    double delta = 0.0, normalized = 0.0;
    int best = 0;
    fields >> t >> delta >> normalized >> best;
    CHECK(test::rel_close(normalized, delta / 40.0, 1e-10));
    best_markers += best;
    ++rows;
  }
  CHECK(rows == spectrum.offsets.size());
  CHECK(best_markers == 1);
}

TEST_CASE("synthetic rates round-trip through ingestion") {
  const SampledScenario sampled = fx_style_scenario(606);
  TempDir dir("covseg-synth-roundtrip");
  const fs::path data_path = dir.path / "synth.csv";
  write_synth_rates(data_path, sampled.data);
  write_truth_file(dir.path / "synth.csv.truth", sampled.true_boundaries);

  const RateTable table = load_rates(data_path.string());
  CHECK(table.labels == sampled.data.labels);
  const ReturnMatrix recovered = to_log_returns(table);
  REQUIRE(recovered.observation_count() == sampled.data.observation_count());
  CHECK((recovered.values - sampled.data.values).cwiseAbs().maxCoeff() <= 1e-9);

  const std::string truth = slurp(dir.path / "synth.csv.truth");
  CHECK(truth.find("400\n") != std::string::npos);
  CHECK(truth.find("750\n") != std::string::npos);
}
