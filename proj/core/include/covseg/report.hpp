#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "covseg/segmentation.hpp"
#include "covseg/types.hpp"

namespace covseg {

/// Run metadata recorded in every report header. Fields feed the config
/// hash (canonical key=value list, FNV-1a 64).
struct RunMeta {
  std::string input;
  std::string returns = "log";  // "log" | "diff"
  double delta0 = 0.0;
  int margin_factor = 3;
  std::ptrdiff_t t_min = 0;  // margin_factor * M + 1
  double jitter_epsilon = 0.0;
  bool refine = false;
  int max_depth = 30;
  std::string version;
};

/// FNV-1a over the canonical flag string of `meta`.
std::string config_hash(const RunMeta& meta);

/// Every number the tool emits goes through this: %.12g, 12 significant
/// digits, so reports diff cleanly while staying near machine precision.
std::string format_number(double value);

struct ReportFiles {
  std::filesystem::path segments_tsv;
  std::filesystem::path segments_json;
  std::filesystem::path entropy_steps_tsv;
  std::filesystem::path eigenvalue_steps_tsv;
  std::filesystem::path tree_json;

  std::vector<std::filesystem::path> all() const {
    return {segments_tsv, segments_json, entropy_steps_tsv, eigenvalue_steps_tsv, tree_json};
  }
};

/// Writes the full segment report into out_dir (created if absent):
/// a delimited segment table, a JSON document with per-segment means and
/// full eigenvalue lists, step-plot entropy and first/second eigenvalue
/// series, and the recursion tree. Files created by a failed call are
/// removed before the error propagates. Output is byte-deterministic.
ReportFiles write_segment_report(const std::filesystem::path& out_dir, const ReturnMatrix& data,
                                 const SegmentationResult& result, const RunMeta& meta);

/// Delta-spectrum dump: offset, Delta(t), Delta(t)/n, and a marker column
/// for t*; header line carries the range and the maximum.
void write_spectrum_dump(std::ostream& out, const DeltaSpectrum& spectrum);

/// Writes sampled returns as an ingestible rate file: R(0) = 1,
/// R(s+1) = R(s) * exp(r(s)), one header row, comma-delimited.
void write_synth_rates(const std::filesystem::path& path, const ReturnMatrix& returns);

/// Sidecar with one true boundary (return column index) per line.
void write_truth_file(const std::filesystem::path& path,
                      const std::vector<std::ptrdiff_t>& boundaries);

}  // namespace covseg
