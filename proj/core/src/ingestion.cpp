#include "covseg/ingestion.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace covseg {

namespace {

std::string trim(const std::string& token) {
  std::size_t first = token.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  std::size_t last = token.find_last_not_of(" \t\r");
  return token.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& line, char delimiter) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream stream(line);
  while (std::getline(stream, field, delimiter)) {
    fields.push_back(trim(field));
  }
  if (!line.empty() && line.back() == delimiter) fields.push_back("");
  return fields;
}

bool is_missing(const std::string& cell) {
  return cell.empty() || cell == "NA" || cell == "NaN" || cell == "nan";
}

char detect_delimiter(const std::string& header, const std::string& origin) {
  const auto commas = std::count(header.begin(), header.end(), ',');
  const auto tabs = std::count(header.begin(), header.end(), '\t');
  if (commas == 0 && tabs == 0) {
    throw Error(ErrorCode::parse_error,
                origin + ": unparseable header: no comma or tab delimiter found");
  }
  return tabs > commas ? '\t' : ',';
}

}  // namespace

RateTable load_rates(std::istream& in, const std::string& origin, const LoadOptions& options) {
  std::string header;
  if (!std::getline(in, header)) {
    throw Error(ErrorCode::parse_error, origin + ": empty file, header row required");
  }
  const char delimiter =
      options.delimiter != '\0' ? options.delimiter : detect_delimiter(header, origin);

  const std::vector<std::string> columns = split(header, delimiter);
  if (columns.size() < 2) {
    throw Error(ErrorCode::parse_error,
                origin + ": unparseable header: need a timestamp column and at least one series");
  }

  std::size_t ts_index = 0;
  if (!options.timestamp_column.empty()) {
    const auto it = std::find(columns.begin(), columns.end(), options.timestamp_column);
    if (it == columns.end()) {
      throw Error(ErrorCode::parse_error, origin + ": timestamp column '" +
                                              options.timestamp_column + "' not in header");
    }
    ts_index = static_cast<std::size_t>(it - columns.begin());
  }

  RateTable table;
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (c == ts_index) continue;
    if (columns[c].empty()) {
      throw Error(ErrorCode::parse_error,
                  origin + ": empty series name in header column " + std::to_string(c + 1));
    }
    if (std::find(table.labels.begin(), table.labels.end(), columns[c]) != table.labels.end()) {
      throw Error(ErrorCode::parse_error, origin + ": duplicate series name '" + columns[c] + "'");
    }
    table.labels.push_back(columns[c]);
  }
  table.series.resize(table.labels.size());

  std::string line;
  int row = 1;  // header was row 1
  bool kind_known = false;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const std::vector<std::string> cells = split(line, delimiter);
    if (cells.size() != columns.size()) {
      throw Error(ErrorCode::parse_error,
                  origin + ": row " + std::to_string(row) + ": expected " +
                      std::to_string(columns.size()) + " fields, got " +
                      std::to_string(cells.size()));
    }

    Timestamp stamp;
    try {
      const TimestampKind kind = classify_timestamp(cells[ts_index]);
      if (!kind_known) {
        table.kind = kind;
        kind_known = true;
      } else if (kind != table.kind) {
        throw Error(ErrorCode::parse_error, "mixed timestamp forms (ISO dates and integers)");
      }
      stamp = parse_timestamp(cells[ts_index]);
    } catch (const Error& e) {
      throw Error(ErrorCode::parse_error,
                  origin + ": row " + std::to_string(row) + ": " + e.what());
    }
    if (table.texts.count(stamp.key) > 0) {
      throw Error(ErrorCode::parse_error, origin + ": row " + std::to_string(row) +
                                              ": duplicate timestamp '" + stamp.text + "'");
    }
    table.texts.emplace(stamp.key, stamp.text);

    std::size_t series_index = 0;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (c == ts_index) continue;
      const std::string& label = table.labels[series_index];
      const std::string& cell = cells[c];
      if (!is_missing(cell)) {
        double value = 0.0;
        const char* begin = cell.data();
        const char* end = begin + cell.size();
        auto [ptr, ec] = std::from_chars(begin, end, value);
        if (ec != std::errc{} || ptr != end) {
          throw Error(ErrorCode::parse_error,
                      origin + ": row " + std::to_string(row) + ", column '" + label +
                          "': malformed numeric '" + cell + "'");
        }
        if (!(value > 0.0) || !std::isfinite(value)) {
          throw Error(ErrorCode::invalid_data,
                      origin + ": row " + std::to_string(row) + ", column '" + label +
                          "': non-positive rate " + cell);
        }
        table.series[series_index].emplace(stamp.key, value);
      }
      ++series_index;
    }
  }

  if (table.texts.empty()) {
    throw Error(ErrorCode::parse_error, origin + ": no data rows");
  }
  return table;
}

RateTable load_rates(const std::string& path, const LoadOptions& options) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::io_error, "cannot open rate file '" + path + "'");
  }
  return load_rates(in, path, options);
}

ReturnMatrix to_log_returns(const RateTable& table, Alignment alignment, ReturnKind kind) {
  if (table.labels.empty()) {
    throw Error(ErrorCode::invalid_data, "rate table has no series");
  }

  std::vector<std::int64_t> keys;
  keys.reserve(table.texts.size());
  if (alignment == Alignment::intersect) {
    for (const auto& [key, text] : table.texts) {
      bool everywhere = true;
      for (const auto& series : table.series) {
        if (series.count(key) == 0) {
          everywhere = false;
          break;
        }
      }
      if (everywhere) keys.push_back(key);
    }
  } else {
    for (const auto& [key, text] : table.texts) {
      for (std::size_t i = 0; i < table.series.size(); ++i) {
        if (table.series[i].count(key) == 0) {
          throw Error(ErrorCode::invalid_data, "missing cell at timestamp '" + text +
                                                   "', series '" + table.labels[i] + "'");
        }
      }
      keys.push_back(key);
    }
  }

  if (keys.size() < 2) {
    throw Error(ErrorCode::invalid_data,
                "fewer than 2 aligned timestamps (" + std::to_string(keys.size()) + ")");
  }

  const std::ptrdiff_t m = static_cast<std::ptrdiff_t>(table.labels.size());
  const std::ptrdiff_t t_out = static_cast<std::ptrdiff_t>(keys.size()) - 1;

  ReturnMatrix result;
  result.labels = table.labels;
  result.values.resize(m, t_out);
  result.timestamps.reserve(t_out);
  for (std::ptrdiff_t t = 0; t < t_out; ++t) {
    const std::int64_t later = keys[static_cast<std::size_t>(t) + 1];
    result.timestamps.push_back(Timestamp{later, table.texts.at(later)});
  }

  for (std::ptrdiff_t i = 0; i < m; ++i) {
    const auto& series = table.series[static_cast<std::size_t>(i)];
    for (std::ptrdiff_t t = 0; t < t_out; ++t) {
      const double earlier = series.at(keys[static_cast<std::size_t>(t)]);
      const double later = series.at(keys[static_cast<std::size_t>(t) + 1]);
      result.values(i, t) = kind == ReturnKind::log_return ? std::log(later) - std::log(earlier)
                                                           : later - earlier;
    }
  }

  result.validate();
  return result;
}

}  // namespace covseg
