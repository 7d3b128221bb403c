#pragma once

#include <memory>
#include <vector>

#include "covseg/stats.hpp"
#include "covseg/types.hpp"

namespace covseg {

/// Knobs of the recursive bisection. `delta0` is the minimum split gain
/// required to accept a split; the conventional default is 10*M.
struct SplitConfig {
  double delta0 = 0.0;
  int min_margin_factor = 3;   // t_min = factor*M + 1 columns kept on each side
  int max_depth = 30;          // splits allowed along any root-to-leaf path
  double jitter_epsilon = 0.0; // optional diagonal jitter eps*trace(C)/M
  bool refine = false;         // post-pass boundary re-optimization, off by default
  int max_threads = 1;         // concurrent branch evaluation cap (>= 1)

  static double default_delta0(std::ptrdiff_t m) { return 10.0 * static_cast<double>(m); }

  /// Smallest admissible split offset: min_margin_factor*M + 1.
  std::ptrdiff_t min_offset(std::ptrdiff_t m) const;
  /// Largest admissible split offset: n - (min_margin_factor*M + 1).
  std::ptrdiff_t max_offset(std::ptrdiff_t m, std::ptrdiff_t n) const;

  void validate() const;  // throws Error(invalid_config)
};

/// The split-gain function Delta(t) over the admissible offsets of one
/// segment. Offsets are relative to segment_range.begin.
struct DeltaSpectrum {
  ColumnRange segment_range;
  std::vector<std::ptrdiff_t> offsets;
  std::vector<double> values;
  std::ptrdiff_t best_offset = -1;  // smallest offset attaining the maximum
  double best_value = 0.0;
};

/// A terminal (locally stationary) window with its fitted Gaussian.
struct Segment {
  ColumnRange range;
  GaussianEstimate stats;
  double entropy = 0.0;
  Eigen::VectorXd eigenvalues;  // all M, descending
  int depth = 0;                // recursion depth at which it became terminal
};

enum class LeafReason { below_threshold, too_short, max_depth };
const char* to_string(LeafReason reason);

/// Binary recursion record: internal nodes are accepted splits, leaves are
/// terminal segments with the reason the recursion stopped there.
struct SplitNode {
  ColumnRange range;
  int depth = 0;

  // Internal nodes only.
  std::unique_ptr<SplitNode> left;
  std::unique_ptr<SplitNode> right;
  std::ptrdiff_t split_column = -1;  // global column index of the accepted split
  double delta_star = 0.0;           // accepted Delta*

  // Leaves only.
  LeafReason reason = LeafReason::below_threshold;
  std::optional<double> rejected_delta;  // Delta* < delta0 (below_threshold leaves)
  std::size_t segment_index = 0;         // position in SegmentationResult::segments

  bool is_leaf() const { return left == nullptr; }
};

struct SegmentationResult {
  std::vector<Segment> segments;  // time order; tiles [0, T) exactly
  std::unique_ptr<SplitNode> tree;
};

/// Delta(t) for every admissible offset of `range`, computed from streaming
/// moment sums (one accumulation pass, one Cholesky pair per offset).
///
/// Errors: segment_too_short when the admissible window is empty;
/// singular_covariance (offset attached) when any window fails to factor.
DeltaSpectrum delta_spectrum(const ReturnMatrix& data, ColumnRange range,
                             const SplitConfig& config);

/// Test oracle for delta_spectrum: the literal plug-in log-likelihood
/// difference log L2(t) - log L1, evaluated density-by-density with an LU
/// inverse per window. Deliberately shares no factorization code with the
/// fast path.
double brute_force_delta(const ReturnMatrix& data, ColumnRange range, std::ptrdiff_t offset,
                         const SplitConfig& config);

/// Delta(t)/n per offset: the Jensen-Shannon divergence between the two
/// window Gaussians under weights t/n and (n-t)/n.
std::vector<double> normalized_js(const DeltaSpectrum& spectrum, std::ptrdiff_t range_length);

/// Depth-first recursive bisection with the delta0 termination rule.
/// Produces segments in time order tiling [0, T), plus the full split tree.
SegmentationResult segment_recursive(const ReturnMatrix& data, const SplitConfig& config);

namespace detail {

/// Index of the maximum, ties resolved toward the smallest index. This is
/// the tie-breaking rule of DeltaSpectrum::best_offset.
std::size_t first_argmax(const std::vector<double>& values);

}  // namespace detail

}  // namespace covseg
