#pragma once

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <string>
#include <vector>

#include <Eigen/QR>
#include <covseg/synthetic.hpp>
#include <covseg/types.hpp>

namespace covseg::test {

/// ReturnMatrix with integer timestamps 0..T-1 and labels S1..SM.
inline ReturnMatrix wrap(const Eigen::MatrixXd& values) {
  ReturnMatrix data;
  data.values = values;
  for (std::ptrdiff_t i = 0; i < values.rows(); ++i) {
    data.labels.push_back("S" + std::to_string(i + 1));
  }
  for (std::ptrdiff_t t = 0; t < values.cols(); ++t) {
    data.timestamps.push_back(Timestamp{t, std::to_string(t)});
  }
  return data;
}

/// Rows are series: make_data({{1, 3}, {2, 4}}) is column (1,2) then (3,4).
inline ReturnMatrix make_data(std::initializer_list<std::initializer_list<double>> rows) {
  const std::ptrdiff_t m = static_cast<std::ptrdiff_t>(rows.size());
  const std::ptrdiff_t t = static_cast<std::ptrdiff_t>(rows.begin()->size());
  Eigen::MatrixXd values(m, t);
  std::ptrdiff_t i = 0;
  for (const auto& row : rows) {
    std::ptrdiff_t j = 0;
    for (double v : row) values(i, j++) = v;
    ++i;
  }
  return wrap(values);
}

inline Eigen::MatrixXd random_matrix(NormalStream& normal, std::ptrdiff_t rows,
                                     std::ptrdiff_t cols) {
  Eigen::MatrixXd out(rows, cols);
  for (std::ptrdiff_t j = 0; j < cols; ++j) {
    for (std::ptrdiff_t i = 0; i < rows; ++i) out(i, j) = normal();
  }
  return out;
}

/// A A^T / m + 0.1 I: symmetric positive definite, O(1) scale.
inline Eigen::MatrixXd random_spd(NormalStream& normal, std::ptrdiff_t m) {
  const Eigen::MatrixXd a = random_matrix(normal, m, m);
  Eigen::MatrixXd spd = a * a.transpose() / static_cast<double>(m);
  spd.diagonal().array() += 0.1;
  return (spd + spd.transpose()).eval() / 2.0;
}

/// Well-conditioned invertible matrix: random orthogonal Q times a diagonal
/// in [0.7, 1.5] (condition number below ~2.2).
inline Eigen::MatrixXd random_well_conditioned(NormalStream& normal, std::ptrdiff_t m) {
  const Eigen::MatrixXd a = random_matrix(normal, m, m);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  Eigen::MatrixXd q = qr.householderQ();
  Eigen::VectorXd scale(m);
  for (std::ptrdiff_t i = 0; i < m; ++i) {
    scale(i) = 0.7 + 0.8 * std::abs(normal()) / 3.0;
    if (scale(i) > 1.5) scale(i) = 1.5;
  }
  return q * scale.asDiagonal();
}

/// |a-b| <= tol * max(1, |a|, |b|): relative with an absolute floor of tol.
inline bool rel_close(double a, double b, double tol) {
  const double scale = std::max({1.0, std::abs(a), std::abs(b)});
  return std::abs(a - b) <= tol * scale;
}

/// The naive double-loop MLE covariance (independent oracle for
/// estimate_gaussian).
inline Eigen::MatrixXd naive_covariance(const ReturnMatrix& data, std::ptrdiff_t begin,
                                        std::ptrdiff_t end) {
  const std::ptrdiff_t m = data.series_count();
  const std::ptrdiff_t n = end - begin;
  std::vector<double> mean(static_cast<std::size_t>(m), 0.0);
  for (std::ptrdiff_t i = 0; i < m; ++i) {
    for (std::ptrdiff_t s = begin; s < end; ++s) mean[static_cast<std::size_t>(i)] += data.values(i, s);
    mean[static_cast<std::size_t>(i)] /= static_cast<double>(n);
  }
  Eigen::MatrixXd cov(m, m);
  for (std::ptrdiff_t i = 0; i < m; ++i) {
    for (std::ptrdiff_t j = 0; j < m; ++j) {
      double sum = 0.0;
      for (std::ptrdiff_t s = begin; s < end; ++s) {
        sum += (data.values(i, s) - mean[static_cast<std::size_t>(i)]) *
               (data.values(j, s) - mean[static_cast<std::size_t>(j)]);
      }
      cov(i, j) = sum / static_cast<double>(n);
    }
  }
  return cov;
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace covseg::test
