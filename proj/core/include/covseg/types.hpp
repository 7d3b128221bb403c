#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace covseg {

enum class ErrorCode {
  empty_window,
  range_out_of_bounds,
  singular_covariance,
  asymmetric_matrix,
  segment_too_short,
  not_positive_definite,
  invalid_config,
  invalid_data,
  parse_error,
  io_error,
};

const char* to_string(ErrorCode code);

/// Library-wide exception. `index()` carries the failing Cholesky pivot or
/// the offending split offset when one exists, -1 otherwise.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::ptrdiff_t index = -1)
      : std::runtime_error(message), code_(code), index_(index) {}

  ErrorCode code() const noexcept { return code_; }
  std::ptrdiff_t index() const noexcept { return index_; }

 private:
  ErrorCode code_;
  std::ptrdiff_t index_;
};

enum class TimestampKind { integer, iso_date };

/// Observation tag: an ISO-8601 date ("2001-01-04") or a plain integer.
/// Ordered by `key`: days since 1970-01-01 for dates, the value itself for
/// integers. `text` keeps the original spelling for reports.
struct Timestamp {
  std::int64_t key = 0;
  std::string text;

  friend bool operator<(const Timestamp& a, const Timestamp& b) { return a.key < b.key; }
  friend bool operator==(const Timestamp& a, const Timestamp& b) { return a.key == b.key; }
};

/// Parses an ISO date or integer token; throws Error(parse_error) otherwise.
Timestamp parse_timestamp(const std::string& token);

/// Which of the two accepted forms `token` is; throws if neither.
TimestampKind classify_timestamp(const std::string& token);

/// Half-open column interval [begin, end).
struct ColumnRange {
  std::ptrdiff_t begin = 0;
  std::ptrdiff_t end = 0;

  std::ptrdiff_t length() const { return end - begin; }
  bool empty() const { return end <= begin; }

  friend bool operator==(const ColumnRange& a, const ColumnRange& b) {
    return a.begin == b.begin && a.end == b.end;
  }
};

/// Formats "[begin, end)".
std::string to_string(ColumnRange range);

/// M series (rows) by T observations (columns) of dimensionless log-returns.
struct ReturnMatrix {
  Eigen::MatrixXd values;
  std::vector<std::string> labels;      // size M
  std::vector<Timestamp> timestamps;    // size T, strictly increasing

  std::ptrdiff_t series_count() const { return values.rows(); }
  std::ptrdiff_t observation_count() const { return values.cols(); }

  /// Enforces M >= 1, T >= 2, strictly increasing timestamps, finite values,
  /// and label/timestamp sizes matching the matrix. Throws Error(invalid_data).
  void validate() const;
};

/// Fitted mean vector and MLE (1/n) covariance with the sample count used.
struct GaussianEstimate {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
  std::ptrdiff_t count = 0;
};

/// Real spectrum of a symmetric matrix, eigenvalues sorted descending.
struct EigenSpectrum {
  Eigen::VectorXd eigenvalues;
  std::optional<Eigen::MatrixXd> eigenvectors;  // columns align with eigenvalues
};

}  // namespace covseg
