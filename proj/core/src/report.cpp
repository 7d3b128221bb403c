#include "covseg/report.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

namespace covseg {

std::string format_number(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.12g", value);
  return buffer;
}

namespace {

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t hash = 1469598103934665603ULL;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 1099511628211ULL;
  }
  return hash;
}

std::string json_escape(const std::string& text) {
  std::string out;
  out.reserve(text.size() + 2);
  for (char c : text) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buffer[8];
          std::snprintf(buffer, sizeof(buffer), "\\u%04x", c);
          out += buffer;
        } else {
          out += c;
        }
    }
  }
  return out;
}

std::string quoted(const std::string& text) { return "\"" + json_escape(text) + "\""; }

void write_file(const std::filesystem::path& path, const std::string& content,
                std::vector<std::filesystem::path>& created) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(ErrorCode::io_error, "cannot open '" + path.string() + "' for writing");
  }
  created.push_back(path);
  out << content;
  out.flush();
  if (!out.good()) {
    throw Error(ErrorCode::io_error, "write failed for '" + path.string() + "'");
  }
}

std::string meta_json(const ReturnMatrix& data, const RunMeta& meta, int indent_spaces) {
  const std::string pad(indent_spaces, ' ');
  std::ostringstream out;
  out << pad << "\"tool\": \"covseg\",\n";
  out << pad << "\"version\": " << quoted(meta.version) << ",\n";
  out << pad << "\"input\": " << quoted(meta.input) << ",\n";
  out << pad << "\"returns\": " << quoted(meta.returns) << ",\n";
  out << pad << "\"m\": " << data.series_count() << ",\n";
  out << pad << "\"t\": " << data.observation_count() << ",\n";
  out << pad << "\"series\": [";
  for (std::size_t i = 0; i < data.labels.size(); ++i) {
    if (i > 0) out << ", ";
    out << quoted(data.labels[i]);
  }
  out << "],\n";
  out << pad << "\"delta0\": " << format_number(meta.delta0) << ",\n";
  out << pad << "\"margin_factor\": " << meta.margin_factor << ",\n";
  out << pad << "\"t_min\": " << meta.t_min << ",\n";
  out << pad << "\"jitter_epsilon\": " << format_number(meta.jitter_epsilon) << ",\n";
  out << pad << "\"refine\": " << (meta.refine ? "true" : "false") << ",\n";
  out << pad << "\"max_depth\": " << meta.max_depth << ",\n";
  out << pad << "\"config_hash\": " << quoted(config_hash(meta));
  return out.str();
}

void tree_json(const SplitNode& node, int indent_spaces, std::ostringstream& out) {
  const std::string pad(indent_spaces, ' ');
  const std::string inner(indent_spaces + 2, ' ');
  out << "{\n";
  out << inner << "\"range\": [" << node.range.begin << ", " << node.range.end << "],\n";
  out << inner << "\"depth\": " << node.depth << ",\n";
  if (node.is_leaf()) {
    out << inner << "\"leaf\": true,\n";
    out << inner << "\"reason\": " << quoted(to_string(node.reason)) << ",\n";
    if (node.rejected_delta.has_value()) {
      out << inner << "\"rejected_delta_star\": " << format_number(*node.rejected_delta) << ",\n";
    }
    out << inner << "\"segment\": " << node.segment_index + 1 << "\n";
  } else {
    out << inner << "\"accepted\": true,\n";
    out << inner << "\"split_column\": " << node.split_column << ",\n";
    out << inner << "\"delta_star\": " << format_number(node.delta_star) << ",\n";
    out << inner << "\"left\": ";
    tree_json(*node.left, indent_spaces + 2, out);
    out << ",\n";
    out << inner << "\"right\": ";
    tree_json(*node.right, indent_spaces + 2, out);
    out << "\n";
  }
  out << pad << "}";
}

}  // namespace

std::string config_hash(const RunMeta& meta) {
  std::string canonical;
  canonical += "delta0=" + format_number(meta.delta0);
  canonical += ";jitter_epsilon=" + format_number(meta.jitter_epsilon);
  canonical += ";margin_factor=" + std::to_string(meta.margin_factor);
  canonical += ";max_depth=" + std::to_string(meta.max_depth);
  canonical += ";refine=" + std::string(meta.refine ? "1" : "0");
  canonical += ";returns=" + meta.returns;
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%016llx",
                static_cast<unsigned long long>(fnv1a(canonical)));
  return buffer;
}

ReportFiles write_segment_report(const std::filesystem::path& out_dir, const ReturnMatrix& data,
                                 const SegmentationResult& result, const RunMeta& meta) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) {
    throw Error(ErrorCode::io_error,
                "cannot create output directory '" + out_dir.string() + "': " + ec.message());
  }

  const std::ptrdiff_t m = data.series_count();
  ReportFiles files;
  files.segments_tsv = out_dir / "segments.tsv";
  files.segments_json = out_dir / "segments.json";
  files.entropy_steps_tsv = out_dir / "entropy_steps.tsv";
  files.eigenvalue_steps_tsv = out_dir / "eigenvalue_steps.tsv";
  files.tree_json = out_dir / "tree.json";

  const auto start_text = [&](const Segment& s) { return data.timestamps[s.range.begin].text; };
  const auto end_text = [&](const Segment& s) { return data.timestamps[s.range.end - 1].text; };

  // segments.tsv
  std::ostringstream tsv;
  tsv << "k\tstart\tend\tlength\tentropy\tlambda1";
  if (m >= 2) tsv << "\tlambda2";
  tsv << "\n";
  for (std::size_t i = 0; i < result.segments.size(); ++i) {
    const Segment& s = result.segments[i];
    tsv << i + 1 << "\t" << start_text(s) << "\t" << end_text(s) << "\t" << s.range.length()
        << "\t" << format_number(s.entropy) << "\t" << format_number(s.eigenvalues(0));
    if (m >= 2) tsv << "\t" << format_number(s.eigenvalues(1));
    tsv << "\n";
  }

  // segments.json
  std::ostringstream json;
  json << "{\n  \"meta\": {\n" << meta_json(data, meta, 4) << "\n  },\n";
  json << "  \"segments\": [\n";
  for (std::size_t i = 0; i < result.segments.size(); ++i) {
    const Segment& s = result.segments[i];
    json << "    {\n";
    json << "      \"k\": " << i + 1 << ",\n";
    json << "      \"start\": " << quoted(start_text(s)) << ",\n";
    json << "      \"end\": " << quoted(end_text(s)) << ",\n";
    json << "      \"begin_col\": " << s.range.begin << ",\n";
    json << "      \"end_col\": " << s.range.end << ",\n";
    json << "      \"length\": " << s.range.length() << ",\n";
    json << "      \"depth\": " << s.depth << ",\n";
    json << "      \"entropy\": " << format_number(s.entropy) << ",\n";
    json << "      \"mean\": [";
    for (std::ptrdiff_t r = 0; r < m; ++r) {
      if (r > 0) json << ", ";
      json << format_number(s.stats.mean(r));
    }
    json << "],\n";
    json << "      \"eigenvalues\": [";
    for (std::ptrdiff_t r = 0; r < m; ++r) {
      if (r > 0) json << ", ";
      json << format_number(s.eigenvalues(r));
    }
    json << "]\n";
    json << "    }" << (i + 1 < result.segments.size() ? "," : "") << "\n";
  }
  json << "  ]\n}\n";

  // entropy_steps.tsv: two rows per segment, step-plot ready
  std::ostringstream entropy;
  entropy << "timestamp\tentropy\n";
  for (const Segment& s : result.segments) {
    entropy << start_text(s) << "\t" << format_number(s.entropy) << "\n";
    entropy << end_text(s) << "\t" << format_number(s.entropy) << "\n";
  }

  // eigenvalue_steps.tsv
  std::ostringstream eigen;
  eigen << "timestamp\tlambda1";
  if (m >= 2) eigen << "\tlambda2";
  eigen << "\n";
  for (const Segment& s : result.segments) {
    for (int endpoint = 0; endpoint < 2; ++endpoint) {
      eigen << (endpoint == 0 ? start_text(s) : end_text(s)) << "\t"
            << format_number(s.eigenvalues(0));
      if (m >= 2) eigen << "\t" << format_number(s.eigenvalues(1));
      eigen << "\n";
    }
  }

  // tree.json
  std::ostringstream tree;
  tree_json(*result.tree, 0, tree);
  tree << "\n";

  std::vector<std::filesystem::path> created;
  try {
    write_file(files.segments_tsv, tsv.str(), created);
    write_file(files.segments_json, json.str(), created);
    write_file(files.entropy_steps_tsv, entropy.str(), created);
    write_file(files.eigenvalue_steps_tsv, eigen.str(), created);
    write_file(files.tree_json, tree.str(), created);
  } catch (...) {
    for (const auto& path : created) {
      std::error_code ignore;
      std::filesystem::remove(path, ignore);
    }
    throw;
  }
  return files;
}

void write_spectrum_dump(std::ostream& out, const DeltaSpectrum& spectrum) {
  const std::ptrdiff_t n = spectrum.segment_range.length();
  const std::vector<double> normalized = normalized_js(spectrum, n);
  out << "# covseg spectrum range=" << to_string(spectrum.segment_range) << " n=" << n
      << " offsets=" << spectrum.offsets.size() << " best_t=" << spectrum.best_offset
      << " best_delta=" << format_number(spectrum.best_value) << "\n";
  out << "t\tdelta\tdelta_over_n\tbest\n";
  for (std::size_t i = 0; i < spectrum.offsets.size(); ++i) {
    out << spectrum.offsets[i] << "\t" << format_number(spectrum.values[i]) << "\t"
        << format_number(normalized[i]) << "\t"
        << (spectrum.offsets[i] == spectrum.best_offset ? 1 : 0) << "\n";
  }
}

void write_synth_rates(const std::filesystem::path& path, const ReturnMatrix& returns) {
  const std::ptrdiff_t m = returns.series_count();
  const std::ptrdiff_t t = returns.observation_count();

  std::ostringstream out;
  out << "t";
  for (const std::string& label : returns.labels) out << "," << label;
  out << "\n";

  Eigen::VectorXd level = Eigen::VectorXd::Ones(m);
  out << 0;
  for (std::ptrdiff_t i = 0; i < m; ++i) out << "," << format_number(level(i));
  out << "\n";
  for (std::ptrdiff_t s = 0; s < t; ++s) {
    level = (level.array() * returns.values.col(s).array().exp()).matrix();
    out << s + 1;
    for (std::ptrdiff_t i = 0; i < m; ++i) out << "," << format_number(level(i));
    out << "\n";
  }

  std::vector<std::filesystem::path> created;
  write_file(path, out.str(), created);
}

void write_truth_file(const std::filesystem::path& path,
                      const std::vector<std::ptrdiff_t>& boundaries) {
  std::ostringstream out;
  out << "# true boundaries (0-based return column indices)\n";
  for (std::ptrdiff_t boundary : boundaries) out << boundary << "\n";
  std::vector<std::filesystem::path> created;
  write_file(path, out.str(), created);
}

}  // namespace covseg
