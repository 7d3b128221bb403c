#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include <covseg/ingestion.hpp>
#include <covseg/report.hpp>
#include <covseg/segmentation.hpp>
#include <covseg/synthetic.hpp>
#include <covseg/version.hpp>

namespace {

using namespace covseg;

struct IngestFlags {
  std::string delimiter = "auto";
  std::string timestamp_col;
  std::string returns = "log";
  std::string alignment = "intersect";
};

void add_ingest_flags(CLI::App& cmd, IngestFlags& flags) {
  cmd.add_option("--delimiter", flags.delimiter, "Field delimiter")
      ->check(CLI::IsMember({"auto", "comma", "tab"}))
      ->capture_default_str();
  cmd.add_option("--timestamp-col", flags.timestamp_col,
                 "Name of the timestamp column (default: first column)");
  cmd.add_option("--returns", flags.returns, "Return definition: log difference or literal diff")
      ->check(CLI::IsMember({"log", "diff"}))
      ->capture_default_str();
  cmd.add_option("--alignment", flags.alignment, "Timestamp alignment across series")
      ->check(CLI::IsMember({"intersect", "error-on-gap"}))
      ->capture_default_str();
}

ReturnMatrix ingest(const std::string& input, const IngestFlags& flags) {
  LoadOptions options;
  if (flags.delimiter == "comma") options.delimiter = ',';
  if (flags.delimiter == "tab") options.delimiter = '\t';
  options.timestamp_column = flags.timestamp_col;
  const RateTable table = load_rates(input, options);
  const Alignment alignment =
      flags.alignment == "intersect" ? Alignment::intersect : Alignment::error_on_gap;
  const ReturnKind kind =
      flags.returns == "log" ? ReturnKind::log_return : ReturnKind::arithmetic_diff;
  return to_log_returns(table, alignment, kind);
}

int threads_from_env() {
  const char* raw = std::getenv("COVSEG_THREADS");
  if (raw == nullptr || *raw == '\0') return 1;
  char* end = nullptr;
  const long value = std::strtol(raw, &end, 10);
  if (end == raw || *end != '\0' || value < 0) {
    throw Error(ErrorCode::invalid_config,
                "COVSEG_THREADS must be a nonnegative integer, got '" + std::string(raw) + "'");
  }
  if (value == 0) {
    const unsigned hardware = std::thread::hardware_concurrency();
    return hardware == 0 ? 1 : static_cast<int>(hardware);
  }
  return static_cast<int>(value);
}

ColumnRange parse_range(const std::string& text, std::ptrdiff_t total) {
  const std::size_t colon = text.find(':');
  if (colon == std::string::npos) {
    throw Error(ErrorCode::invalid_config, "--range must look like START:END, got '" + text + "'");
  }
  std::ptrdiff_t begin = 0;
  std::ptrdiff_t end = 0;
  try {
    begin = std::stoll(text.substr(0, colon));
    end = std::stoll(text.substr(colon + 1));
  } catch (const std::invalid_argument&) {
    throw Error(ErrorCode::invalid_config, "--range must look like START:END, got '" + text + "'");
  } catch (const std::out_of_range&) {
    throw Error(ErrorCode::invalid_config, "--range values out of integer range in '" + text + "'");
  }
  if (begin < 0 || end > total || begin >= end) {
    throw Error(ErrorCode::range_out_of_bounds,
                "range out of bounds: [" + std::to_string(begin) + ", " + std::to_string(end) +
                    ") with T = " + std::to_string(total));
  }
  return ColumnRange{begin, end};
}

int run_segment(const std::string& input, const std::string& out_dir,
                std::optional<double> delta0, int margin_factor, double jitter, bool refine,
                int max_depth, const IngestFlags& flags) {
  const ReturnMatrix data = ingest(input, flags);
  const std::ptrdiff_t m = data.series_count();

  SplitConfig config;
  config.delta0 = delta0.value_or(SplitConfig::default_delta0(m));
  config.min_margin_factor = margin_factor;
  config.jitter_epsilon = jitter;
  config.refine = refine;
  config.max_depth = max_depth;
  config.max_threads = threads_from_env();

  const SegmentationResult result = segment_recursive(data, config);

  RunMeta meta;
  meta.input = input;
  meta.returns = flags.returns;
  meta.delta0 = config.delta0;
  meta.margin_factor = config.min_margin_factor;
  meta.t_min = config.min_offset(m);
  meta.jitter_epsilon = config.jitter_epsilon;
  meta.refine = config.refine;
  meta.max_depth = config.max_depth;
  meta.version = kVersion;

  const ReportFiles files = write_segment_report(out_dir, data, result, meta);
  std::cout << "segments: " << result.segments.size() << "\n";
  std::cout << "series: " << m << ", observations: " << data.observation_count() << "\n";
  std::cout << "delta0: " << format_number(config.delta0) << ", t_min: " << meta.t_min << "\n";
  std::cout << "report: " << files.all().size() << " files in " << out_dir << "\n";
  return 0;
}

int run_spectrum(const std::string& input, const std::string& range_text,
                 const std::string& out_path, int margin_factor, double jitter,
                 const IngestFlags& flags) {
  const ReturnMatrix data = ingest(input, flags);
  const std::ptrdiff_t m = data.series_count();

  SplitConfig config;
  config.delta0 = SplitConfig::default_delta0(m);
  config.min_margin_factor = margin_factor;
  config.jitter_epsilon = jitter;

  const ColumnRange range = range_text.empty()
                                ? ColumnRange{0, data.observation_count()}
                                : parse_range(range_text, data.observation_count());
  const DeltaSpectrum spectrum = delta_spectrum(data, range, config);

  if (out_path.empty() || out_path == "-") {
    write_spectrum_dump(std::cout, spectrum);
  } else {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) {
      throw Error(ErrorCode::io_error, "cannot open '" + out_path + "' for writing");
    }
    write_spectrum_dump(out, spectrum);
    out.flush();
    if (!out.good()) {
      throw Error(ErrorCode::io_error, "write failed for '" + out_path + "'");
    }
  }
  return 0;
}

int run_synth(const std::string& scenario_path, const std::string& out_path,
              std::optional<std::uint64_t> seed_override) {
  MixtureScenario scenario = parse_scenario_file(scenario_path);
  if (seed_override.has_value()) scenario.seed = *seed_override;

  const SampledScenario sampled = sample_scenario(scenario);
  write_synth_rates(out_path, sampled.data);
  const std::string truth_path = out_path + ".truth";
  write_truth_file(truth_path, sampled.true_boundaries);

  std::cout << "wrote " << out_path << " (" << sampled.data.series_count() << " series, "
            << sampled.data.observation_count() << " return columns)\n";
  std::cout << "wrote " << truth_path << " (" << sampled.true_boundaries.size()
            << " boundaries)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"covseg: segments a multivariate return series into locally stationary "
               "Gaussian regimes and reports per-segment entropy and eigenvalue spectra"};
  app.set_version_flag("--version", std::string("covseg ") + kVersion);
  app.require_subcommand(1);

  auto* segment = app.add_subcommand("segment", "Ingest, segment recursively, write the report");
  std::string seg_input, seg_out_dir;
  std::optional<double> seg_delta0;
  int seg_margin = 3;
  int seg_max_depth = 30;
  double seg_jitter = 0.0;
  bool seg_refine = false;
  std::uint64_t seg_seed_unused = 0;
  IngestFlags seg_flags;
  segment->add_option("input", seg_input, "Delimited rate file")->required();
  segment->add_option("--out-dir", seg_out_dir, "Report output directory")->required();
  segment->add_option("--delta0", seg_delta0,
                      "Split acceptance threshold (default: 10*M after ingestion)");
  segment->add_option("--margin-factor", seg_margin, "t_min = margin-factor*M + 1")
      ->capture_default_str();
  segment->add_option("--max-depth", seg_max_depth, "Recursion depth cap")->capture_default_str();
  segment->add_option("--jitter", seg_jitter, "Diagonal jitter eps*trace(C)/M for degenerate data")
      ->capture_default_str();
  segment->add_flag("--refine", seg_refine, "Re-optimize interior boundaries after the recursion");
  segment->add_option("--seed", seg_seed_unused,
                      "Ignored; segmentation is deterministic (kept for interface uniformity)");
  add_ingest_flags(*segment, seg_flags);

  auto* spectrum = app.add_subcommand("spectrum", "Dump Delta(t) over one window");
  std::string spec_input, spec_range, spec_out;
  int spec_margin = 3;
  double spec_jitter = 0.0;
  IngestFlags spec_flags;
  spectrum->add_option("input", spec_input, "Delimited rate file")->required();
  spectrum->add_option("--range", spec_range, "Global column window START:END (default: all)");
  spectrum->add_option("--out", spec_out, "Output file (default: stdout)");
  spectrum->add_option("--margin-factor", spec_margin, "t_min = margin-factor*M + 1")
      ->capture_default_str();
  spectrum->add_option("--jitter", spec_jitter, "Diagonal jitter for degenerate data")
      ->capture_default_str();
  add_ingest_flags(*spectrum, spec_flags);

  auto* synth = app.add_subcommand("synth", "Sample a mixture scenario into an ingestible file");
  std::string synth_scenario, synth_out;
  std::optional<std::uint64_t> synth_seed;
  synth->add_option("scenario", synth_scenario, "Scenario description file")->required();
  synth->add_option("--out", synth_out, "Output rate file (truth sidecar gets .truth)")
      ->required();
  synth->add_option("--seed", synth_seed, "Override the scenario seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (segment->parsed()) {
      return run_segment(seg_input, seg_out_dir, seg_delta0, seg_margin, seg_jitter, seg_refine,
                         seg_max_depth, seg_flags);
    }
    if (spectrum->parsed()) {
      return run_spectrum(spec_input, spec_range, spec_out, spec_margin, spec_jitter, spec_flags);
    }
    if (synth->parsed()) {
      return run_synth(synth_scenario, synth_out, synth_seed);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << to_string(e.code()) << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
