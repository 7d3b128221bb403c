#include "covseg/types.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>

namespace covseg {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::empty_window: return "empty_window";
    case ErrorCode::range_out_of_bounds: return "range_out_of_bounds";
    case ErrorCode::singular_covariance: return "singular_covariance";
    case ErrorCode::asymmetric_matrix: return "asymmetric_matrix";
    case ErrorCode::segment_too_short: return "segment_too_short";
    case ErrorCode::not_positive_definite: return "not_positive_definite";
    case ErrorCode::invalid_config: return "invalid_config";
    case ErrorCode::invalid_data: return "invalid_data";
    case ErrorCode::parse_error: return "parse_error";
    case ErrorCode::io_error: return "io_error";
  }
  return "unknown";
}

std::string to_string(ColumnRange range) {
  std::ostringstream out;
  out << "[" << range.begin << ", " << range.end << ")";
  return out.str();
}

namespace {

bool is_integer_token(const std::string& token) {
  if (token.empty()) return false;
  std::size_t i = token[0] == '-' ? 1 : 0;
  if (i == token.size()) return false;
  for (; i < token.size(); ++i) {
    if (!std::isdigit(static_cast<unsigned char>(token[i]))) return false;
  }
  return true;
}

bool is_leap_year(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

int days_in_month(int y, int m) {
  static constexpr int kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (m == 2 && is_leap_year(y)) return 29;
  return kDays[m - 1];
}

// Howard Hinnant's days-from-civil algorithm; epoch 1970-01-01.
std::int64_t days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2u) / 5u +
                       static_cast<unsigned>(d) - 1u;
  const unsigned doe = yoe * 365u + yoe / 4u - yoe / 100u + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

bool parse_iso_date(const std::string& token, std::int64_t& key) {
  // strict YYYY-MM-DD
  if (token.size() != 10 || token[4] != '-' || token[7] != '-') return false;
  int y = 0, m = 0, d = 0;
  auto digits = [](const char* p, int n, int& out) {
    out = 0;
    for (int i = 0; i < n; ++i) {
      if (!std::isdigit(static_cast<unsigned char>(p[i]))) return false;
      out = out * 10 + (p[i] - '0');
    }
    return true;
  };
  if (!digits(token.data(), 4, y) || !digits(token.data() + 5, 2, m) ||
      !digits(token.data() + 8, 2, d)) {
    return false;
  }
  if (m < 1 || m > 12 || d < 1 || d > days_in_month(y, m)) return false;
  key = days_from_civil(y, m, d);
  return true;
}

}  // namespace

TimestampKind classify_timestamp(const std::string& token) {
  std::int64_t key = 0;
  if (parse_iso_date(token, key)) return TimestampKind::iso_date;
  if (is_integer_token(token)) return TimestampKind::integer;
  throw Error(ErrorCode::parse_error,
              "timestamp '" + token + "' is neither an ISO date (YYYY-MM-DD) nor an integer");
}

Timestamp parse_timestamp(const std::string& token) {
  std::int64_t key = 0;
  if (parse_iso_date(token, key)) return Timestamp{key, token};
  if (is_integer_token(token)) {
    std::int64_t value = 0;
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc{} || ptr != token.data() + token.size()) {
      throw Error(ErrorCode::parse_error, "integer timestamp '" + token + "' out of range");
    }
    return Timestamp{value, token};
  }
  throw Error(ErrorCode::parse_error,
              "timestamp '" + token + "' is neither an ISO date (YYYY-MM-DD) nor an integer");
}

void ReturnMatrix::validate() const {
  if (series_count() < 1) {
    throw Error(ErrorCode::invalid_data, "return matrix needs at least one series");
  }
  if (observation_count() < 2) {
    throw Error(ErrorCode::invalid_data, "return matrix needs at least two observations");
  }
  if (static_cast<std::ptrdiff_t>(labels.size()) != series_count()) {
    throw Error(ErrorCode::invalid_data, "label count does not match series count");
  }
  if (static_cast<std::ptrdiff_t>(timestamps.size()) != observation_count()) {
    throw Error(ErrorCode::invalid_data, "timestamp count does not match observation count");
  }
  for (std::size_t i = 1; i < timestamps.size(); ++i) {
    if (!(timestamps[i - 1] < timestamps[i])) {
      throw Error(ErrorCode::invalid_data,
                  "timestamps not strictly increasing at position " + std::to_string(i));
    }
  }
  if (!values.allFinite()) {
    throw Error(ErrorCode::invalid_data, "return matrix contains non-finite values");
  }
}

}  // namespace covseg
