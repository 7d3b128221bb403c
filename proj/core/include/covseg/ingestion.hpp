#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "covseg/types.hpp"

namespace covseg {

struct LoadOptions {
  char delimiter = '\0';         // '\0' = auto-detect comma vs tab from the header
  std::string timestamp_column;  // empty = first column
};

/// Parsed rate file: per-series timestamp -> positive rate maps. Timestamps
/// are keyed the same way as covseg::Timestamp; `texts` keeps the original
/// spellings for reports.
struct RateTable {
  std::vector<std::string> labels;
  std::vector<std::map<std::int64_t, double>> series;  // one map per label
  std::map<std::int64_t, std::string> texts;
  TimestampKind kind = TimestampKind::integer;
};

/// Reads a delimited rate file: header row naming the series, one timestamp
/// column (ISO dates or integers, not mixed), strictly positive rates.
/// Empty, "NA", or "NaN" cells are treated as missing and resolved by the
/// alignment step. Malformed or non-positive cells fail with row/column
/// coordinates.
RateTable load_rates(const std::string& path, const LoadOptions& options = {});
RateTable load_rates(std::istream& in, const std::string& origin, const LoadOptions& options = {});

enum class Alignment { intersect, error_on_gap };
enum class ReturnKind { log_return, arithmetic_diff };

/// Aligns the series on common timestamps and differences them:
/// r_i(t) = log R_i(t+1) - log R_i(t) (or the literal difference under
/// arithmetic_diff). Output timestamps are the later endpoint of each
/// difference. Under error_on_gap any missing cell aborts with coordinates.
ReturnMatrix to_log_returns(const RateTable& table, Alignment alignment = Alignment::intersect,
                            ReturnKind kind = ReturnKind::log_return);

}  // namespace covseg
