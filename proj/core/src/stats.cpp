#include "covseg/stats.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Eigenvalues>

namespace covseg {

namespace detail {

double cholesky_log_det_in_place(Eigen::MatrixXd& a) {
  const std::ptrdiff_t n = a.rows();
  double log_det = 0.0;
  for (std::ptrdiff_t j = 0; j < n; ++j) {
    double pivot = a(j, j) - a.row(j).head(j).squaredNorm();
    if (!(pivot > 0.0) || !std::isfinite(pivot)) {
      throw Error(ErrorCode::singular_covariance,
                  "singular covariance (pivot " + std::to_string(j) + " = " +
                      std::to_string(pivot) + ")",
                  j);
    }
    log_det += std::log(pivot);  // pivot = L(j,j)^2
    a(j, j) = std::sqrt(pivot);
    const double inv = 1.0 / a(j, j);
    for (std::ptrdiff_t i = j + 1; i < n; ++i) {
      a(i, j) = (a(i, j) - a.row(i).head(j).dot(a.row(j).head(j))) * inv;
    }
  }
  return log_det;
}

}  // namespace detail

GaussianEstimate estimate_gaussian(const ReturnMatrix& data, ColumnRange range) {
  if (range.empty()) {
    throw Error(ErrorCode::empty_window, "empty window " + to_string(range));
  }
  if (range.begin < 0 || range.end > data.observation_count()) {
    throw Error(ErrorCode::range_out_of_bounds,
                "range out of bounds: " + to_string(range) + " with T = " +
                    std::to_string(data.observation_count()));
  }
  const std::ptrdiff_t n = range.length();
  const auto block = data.values.middleCols(range.begin, n);

  GaussianEstimate est;
  est.count = n;
  est.mean = block.rowwise().mean();
  Eigen::MatrixXd centered = block.colwise() - est.mean;
  est.covariance.noalias() = centered * centered.transpose() / static_cast<double>(n);
  est.covariance = ((est.covariance + est.covariance.transpose()) / 2.0).eval();
  return est;
}

double log_det_psd(const Eigen::MatrixXd& cov) {
  Eigen::MatrixXd scratch = cov;
  return detail::cholesky_log_det_in_place(scratch);
}

Eigen::MatrixXd cholesky_lower(const Eigen::MatrixXd& cov) {
  Eigen::MatrixXd factor = cov;
  detail::cholesky_log_det_in_place(factor);
  factor.triangularView<Eigen::StrictlyUpper>().setZero();
  return factor;
}

EigenSpectrum eigen_symmetric(const Eigen::MatrixXd& cov, bool with_eigenvectors) {
  const double asymmetry = (cov - cov.transpose()).cwiseAbs().maxCoeff();
  if (!(asymmetry <= 1e-10)) {
    throw Error(ErrorCode::asymmetric_matrix,
                "asymmetric matrix: max|C - C^T| = " + std::to_string(asymmetry));
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(
      cov, with_eigenvectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::invalid_data, "symmetric eigensolver failed to converge");
  }

  const std::ptrdiff_t m = cov.rows();
  EigenSpectrum spectrum;
  spectrum.eigenvalues = solver.eigenvalues().reverse();  // ascending -> descending
  if (with_eigenvectors) {
    Eigen::MatrixXd vectors(m, m);
    for (std::ptrdiff_t j = 0; j < m; ++j) {
      vectors.col(j) = solver.eigenvectors().col(m - 1 - j);
    }
    spectrum.eigenvectors = std::move(vectors);
  }
  return spectrum;
}

double gaussian_entropy(const Eigen::MatrixXd& covariance) {
  const double m = static_cast<double>(covariance.rows());
  const double log_2pi_e = std::log(2.0 * std::numbers::pi) + 1.0;
  return 0.5 * m * log_2pi_e + 0.5 * log_det_psd(covariance);
}

double gaussian_entropy(const GaussianEstimate& est) { return gaussian_entropy(est.covariance); }

std::pair<double, double> marchenko_pastur_support(std::ptrdiff_t m, std::ptrdiff_t t,
                                                   double sigma2) {
  if (m < 1 || t < 1 || !(sigma2 > 0.0)) {
    throw Error(ErrorCode::invalid_config, "marchenko_pastur requires M >= 1, T >= 1, sigma2 > 0");
  }
  const double root = std::sqrt(static_cast<double>(m) / static_cast<double>(t));
  const double lo = sigma2 * (1.0 - root) * (1.0 - root);
  const double hi = sigma2 * (1.0 + root) * (1.0 + root);
  return {lo, hi};
}

double marchenko_pastur_density(double lambda, std::ptrdiff_t m, std::ptrdiff_t t, double sigma2) {
  const auto [lo, hi] = marchenko_pastur_support(m, t, sigma2);
  if (!(lambda > lo) || !(lambda < hi) || !(lambda > 0.0)) {
    return 0.0;
  }
  const double ratio_inv = static_cast<double>(t) / static_cast<double>(m);
  return ratio_inv * std::sqrt((lambda - lo) * (hi - lambda)) /
         (2.0 * std::numbers::pi * sigma2 * lambda);
}

void add_diagonal_jitter(Eigen::MatrixXd& cov, double eps) {
  if (eps == 0.0) return;
  const double shift = eps * cov.trace() / static_cast<double>(cov.rows());
  cov.diagonal().array() += shift;
}

}  // namespace covseg
