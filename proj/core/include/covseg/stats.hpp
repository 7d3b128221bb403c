#pragma once

#include <utility>

#include "covseg/types.hpp"

namespace covseg {

/// Per-row mean and MLE covariance (1/n denominator, centered on the
/// range-local mean) over a half-open column range. The covariance is
/// symmetrized as (C + C^T)/2 after accumulation.
///
/// Throws Error(empty_window) for an empty range and
/// Error(range_out_of_bounds) when the range leaves [0, T).
GaussianEstimate estimate_gaussian(const ReturnMatrix& data, ColumnRange range);

/// log|C| = 2 * sum(log diag(L)) from the Cholesky factor L of C. Only the
/// lower triangle of `cov` is referenced; the caller guarantees symmetry.
/// Throws Error(singular_covariance) carrying the failing pivot index when a
/// pivot is not strictly positive.
double log_det_psd(const Eigen::MatrixXd& cov);

/// Lower Cholesky factor L with L * L^T = cov. Same contract as log_det_psd.
Eigen::MatrixXd cholesky_lower(const Eigen::MatrixXd& cov);

/// Full real spectrum of a symmetric matrix, eigenvalues descending.
/// Throws Error(asymmetric_matrix) when max|C - C^T| exceeds 1e-10.
EigenSpectrum eigen_symmetric(const Eigen::MatrixXd& cov, bool with_eigenvectors = false);

/// Differential entropy of the fitted Gaussian:
/// (M/2) * log(2*pi*e) + log|C| / 2. Propagates the singular-covariance
/// error from log_det_psd.
double gaussian_entropy(const GaussianEstimate& est);
double gaussian_entropy(const Eigen::MatrixXd& covariance);

/// Support edges lambda_-/lambda_+ = sigma2 * (1 -+ sqrt(M/T))^2.
std::pair<double, double> marchenko_pastur_support(std::ptrdiff_t m, std::ptrdiff_t t,
                                                   double sigma2);

/// Marchenko-Pastur density (T/M) * sqrt((l - l_-)(l_+ - l)) / (2 pi sigma2 l)
/// on [l_-, l_+], zero outside. A diagnostic overlay for eigenvalue spectra
/// of short windows; not used by the segmentation itself.
double marchenko_pastur_density(double lambda, std::ptrdiff_t m, std::ptrdiff_t t, double sigma2);

/// Adds eps * trace(C)/M to the diagonal. No-op when eps == 0.
void add_diagonal_jitter(Eigen::MatrixXd& cov, double eps);

namespace detail {

/// Factors the lower triangle of `a` in place (destroying it) and returns
/// log|A|. Shared by log_det_psd and the streaming split-spectrum loop so the
/// hot path can reuse one scratch matrix.
double cholesky_log_det_in_place(Eigen::MatrixXd& a);

}  // namespace detail

}  // namespace covseg
