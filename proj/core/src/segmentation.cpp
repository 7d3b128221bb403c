#include "covseg/segmentation.hpp"

#include <atomic>
#include <cmath>
#include <future>
#include <numbers>
#include <string>

#include <Eigen/LU>

namespace covseg {

const char* to_string(LeafReason reason) {
  switch (reason) {
    case LeafReason::below_threshold: return "below_threshold";
    case LeafReason::too_short: return "too_short";
    case LeafReason::max_depth: return "max_depth";
  }
  return "unknown";
}

std::ptrdiff_t SplitConfig::min_offset(std::ptrdiff_t m) const {
  return static_cast<std::ptrdiff_t>(min_margin_factor) * m + 1;
}

std::ptrdiff_t SplitConfig::max_offset(std::ptrdiff_t m, std::ptrdiff_t n) const {
  return n - min_offset(m);
}

void SplitConfig::validate() const {
  if (!(delta0 > 0.0)) {
    throw Error(ErrorCode::invalid_config, "delta0 must be positive");
  }
  if (min_margin_factor < 1) {
    throw Error(ErrorCode::invalid_config, "min_margin_factor must be >= 1");
  }
  if (max_depth < 1) {
    throw Error(ErrorCode::invalid_config, "max_depth must be >= 1");
  }
  if (jitter_epsilon < 0.0 || !std::isfinite(jitter_epsilon)) {
    throw Error(ErrorCode::invalid_config, "jitter_epsilon must be finite and >= 0");
  }
  if (max_threads < 1) {
    throw Error(ErrorCode::invalid_config, "max_threads must be >= 1");
  }
}

namespace {

void check_range(const ReturnMatrix& data, ColumnRange range) {
  if (range.begin < 0 || range.end > data.observation_count() || range.begin > range.end) {
    throw Error(ErrorCode::range_out_of_bounds,
                "range out of bounds: " + to_string(range) + " with T = " +
                    std::to_string(data.observation_count()));
  }
}

// MLE covariance from window moment sums: sq/n - mean*mean^T. Only the lower
// triangle of `sq_lower` is read; `out` comes back fully symmetric, with the
// optional diagonal jitter applied.
void covariance_from_sums(const Eigen::MatrixXd& sq_lower, const Eigen::VectorXd& sum,
                          std::ptrdiff_t count, double jitter_eps, Eigen::MatrixXd& out) {
  const std::ptrdiff_t m = sum.size();
  const double inv = 1.0 / static_cast<double>(count);
  for (std::ptrdiff_t j = 0; j < m; ++j) {
    const double mean_j = sum(j) * inv;
    for (std::ptrdiff_t i = j; i < m; ++i) {
      out(i, j) = sq_lower(i, j) * inv - (sum(i) * inv) * mean_j;
    }
  }
  for (std::ptrdiff_t j = 1; j < m; ++j) {
    for (std::ptrdiff_t i = 0; i < j; ++i) {
      out(i, j) = out(j, i);
    }
  }
  add_diagonal_jitter(out, jitter_eps);
}

// Factors `buffer` in place; decorates a pivot failure with the offset and
// segment it happened in.
double window_log_det(Eigen::MatrixXd& buffer, std::ptrdiff_t offset, ColumnRange range) {
  try {
    return detail::cholesky_log_det_in_place(buffer);
  } catch (const Error& e) {
    if (offset < 0) {
      throw Error(ErrorCode::singular_covariance,
                  "singular covariance in pooled window " + to_string(range) + ": " + e.what(),
                  offset);
    }
    throw Error(ErrorCode::singular_covariance,
                "singular covariance at t=" + std::to_string(offset) + " in " + to_string(range) +
                    ": " + e.what(),
                offset);
  }
}

}  // namespace

DeltaSpectrum delta_spectrum(const ReturnMatrix& data, ColumnRange range,
                             const SplitConfig& config) {
  config.validate();
  check_range(data, range);
  const std::ptrdiff_t m = data.series_count();
  const std::ptrdiff_t n = range.length();
  const std::ptrdiff_t t_min = config.min_offset(m);
  const std::ptrdiff_t t_max = config.max_offset(m, n);
  if (t_min > t_max) {
    throw Error(ErrorCode::segment_too_short,
                "segment too short: " + to_string(range) + " of length " + std::to_string(n) +
                    " admits no split (needs >= " + std::to_string(2 * t_min) + " columns)");
  }

  // Center on the segment mean. Delta(t) is shift-invariant, and centering
  // keeps the streaming sq-sum/mean cancellation well conditioned.
  Eigen::MatrixXd x = data.values.middleCols(range.begin, n);
  const Eigen::VectorXd segment_mean = x.rowwise().mean();
  x.colwise() -= segment_mean;

  const Eigen::VectorXd total_sum = x.rowwise().sum();
  Eigen::MatrixXd total_sq = Eigen::MatrixXd::Zero(m, m);
  total_sq.selfadjointView<Eigen::Lower>().rankUpdate(x);

  Eigen::MatrixXd cov(m, m);
  covariance_from_sums(total_sq, total_sum, n, config.jitter_epsilon, cov);
  const double pooled_log_det = window_log_det(cov, -1, range);

  DeltaSpectrum spectrum;
  spectrum.segment_range = range;
  spectrum.offsets.reserve(static_cast<std::size_t>(t_max - t_min + 1));
  spectrum.values.reserve(static_cast<std::size_t>(t_max - t_min + 1));

  Eigen::VectorXd left_sum = Eigen::VectorXd::Zero(m);
  Eigen::MatrixXd left_sq = Eigen::MatrixXd::Zero(m, m);
  Eigen::VectorXd right_sum(m);
  Eigen::MatrixXd right_sq(m, m);

  for (std::ptrdiff_t t = 1; t <= t_max; ++t) {
    left_sum += x.col(t - 1);
    left_sq.selfadjointView<Eigen::Lower>().rankUpdate(x.col(t - 1));
    if (t < t_min) continue;

    covariance_from_sums(left_sq, left_sum, t, config.jitter_epsilon, cov);
    const double left_log_det = window_log_det(cov, t, range);

    right_sum = total_sum - left_sum;
    right_sq = total_sq - left_sq;
    covariance_from_sums(right_sq, right_sum, n - t, config.jitter_epsilon, cov);
    const double right_log_det = window_log_det(cov, t, range);

    const double nd = static_cast<double>(n);
    const double td = static_cast<double>(t);
    const double delta =
        0.5 * (nd * pooled_log_det - td * left_log_det - (nd - td) * right_log_det);
    spectrum.offsets.push_back(t);
    spectrum.values.push_back(delta);
  }
  const std::size_t best = detail::first_argmax(spectrum.values);
  spectrum.best_offset = spectrum.offsets[best];
  spectrum.best_value = spectrum.values[best];
  return spectrum;
}

std::size_t detail::first_argmax(const std::vector<double>& values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

namespace {

// Plug-in Gaussian log-likelihood of a window, summed observation by
// observation. Uses an LU inverse so it stays independent of the Cholesky
// fast path it serves as an oracle for.
double plugin_log_likelihood(const Eigen::Ref<const Eigen::MatrixXd>& block,
                             const GaussianEstimate& est) {
  const std::ptrdiff_t m = block.rows();
  const std::ptrdiff_t n = block.cols();
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(est.covariance);
  const double det = lu.determinant();
  if (!(det > 0.0) || !std::isfinite(det)) {
    throw Error(ErrorCode::singular_covariance,
                "singular covariance: oracle determinant " + std::to_string(det));
  }
  const Eigen::MatrixXd inverse = lu.inverse();
  const double log_norm =
      -0.5 * (static_cast<double>(m) * std::log(2.0 * std::numbers::pi) + std::log(det));
  double total = static_cast<double>(n) * log_norm;
  Eigen::VectorXd centered(m);
  for (std::ptrdiff_t s = 0; s < n; ++s) {
    centered = block.col(s) - est.mean;
    total -= 0.5 * centered.dot(inverse * centered);
  }
  return total;
}

}  // namespace

double brute_force_delta(const ReturnMatrix& data, ColumnRange range, std::ptrdiff_t offset,
                         const SplitConfig& config) {
  config.validate();
  check_range(data, range);
  const std::ptrdiff_t m = data.series_count();
  const std::ptrdiff_t n = range.length();
  const std::ptrdiff_t t_min = config.min_offset(m);
  const std::ptrdiff_t t_max = config.max_offset(m, n);
  if (t_min > t_max) {
    throw Error(ErrorCode::segment_too_short,
                "segment too short: " + to_string(range) + " admits no split");
  }
  if (offset < t_min || offset > t_max) {
    throw Error(ErrorCode::range_out_of_bounds,
                "split offset t=" + std::to_string(offset) + " outside admissible window [" +
                    std::to_string(t_min) + ", " + std::to_string(t_max) + "]");
  }

  GaussianEstimate pooled = estimate_gaussian(data, range);
  GaussianEstimate left = estimate_gaussian(data, {range.begin, range.begin + offset});
  GaussianEstimate right = estimate_gaussian(data, {range.begin + offset, range.end});
  add_diagonal_jitter(pooled.covariance, config.jitter_epsilon);
  add_diagonal_jitter(left.covariance, config.jitter_epsilon);
  add_diagonal_jitter(right.covariance, config.jitter_epsilon);

  const auto block = data.values.middleCols(range.begin, n);
  const double log_l1 = plugin_log_likelihood(block, pooled);
  const double log_l2 = plugin_log_likelihood(block.leftCols(offset), left) +
                        plugin_log_likelihood(block.rightCols(n - offset), right);
  return log_l2 - log_l1;
}

std::vector<double> normalized_js(const DeltaSpectrum& spectrum, std::ptrdiff_t range_length) {
  if (range_length < 1) {
    throw Error(ErrorCode::invalid_config, "range length must be positive");
  }
  const double inv = 1.0 / static_cast<double>(range_length);
  std::vector<double> normalized;
  normalized.reserve(spectrum.values.size());
  for (double value : spectrum.values) {
    normalized.push_back(value * inv);
  }
  return normalized;
}

namespace {

struct BuildContext {
  const ReturnMatrix& data;
  const SplitConfig& config;
  std::atomic<int> spare_threads;
};

std::unique_ptr<SplitNode> build_node(BuildContext& ctx, ColumnRange range, int depth) {
  auto node = std::make_unique<SplitNode>();
  node->range = range;
  node->depth = depth;

  const std::ptrdiff_t m = ctx.data.series_count();
  if (depth >= ctx.config.max_depth) {
    node->reason = LeafReason::max_depth;
    return node;
  }
  if (ctx.config.min_offset(m) > ctx.config.max_offset(m, range.length())) {
    node->reason = LeafReason::too_short;
    return node;
  }

  const DeltaSpectrum spectrum = delta_spectrum(ctx.data, range, ctx.config);
  if (spectrum.best_value < ctx.config.delta0) {
    node->reason = LeafReason::below_threshold;
    node->rejected_delta = spectrum.best_value;
    return node;
  }

  node->delta_star = spectrum.best_value;
  node->split_column = range.begin + spectrum.best_offset;
  const ColumnRange left_range{range.begin, node->split_column};
  const ColumnRange right_range{node->split_column, range.end};

  if (ctx.spare_threads.fetch_sub(1, std::memory_order_acq_rel) > 0) {
    auto left_future = std::async(std::launch::async, [&ctx, left_range, depth] {
      return build_node(ctx, left_range, depth + 1);
    });
    node->right = build_node(ctx, right_range, depth + 1);
    node->left = left_future.get();
    ctx.spare_threads.fetch_add(1, std::memory_order_acq_rel);
  } else {
    ctx.spare_threads.fetch_add(1, std::memory_order_acq_rel);
    node->left = build_node(ctx, left_range, depth + 1);
    node->right = build_node(ctx, right_range, depth + 1);
  }
  return node;
}

void collect_leaves(SplitNode* node, std::vector<SplitNode*>& leaves) {
  if (node->is_leaf()) {
    leaves.push_back(node);
    return;
  }
  collect_leaves(node->left.get(), leaves);
  collect_leaves(node->right.get(), leaves);
}

Segment make_segment(const ReturnMatrix& data, const SplitConfig& config, ColumnRange range,
                     int depth) {
  Segment segment;
  segment.range = range;
  segment.depth = depth;
  segment.stats = estimate_gaussian(data, range);
  add_diagonal_jitter(segment.stats.covariance, config.jitter_epsilon);
  try {
    segment.entropy = gaussian_entropy(segment.stats);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::singular_covariance) {
      throw Error(ErrorCode::singular_covariance,
                  std::string(e.what()) + " in terminal segment " + to_string(range), e.index());
    }
    throw;
  }
  segment.eigenvalues = eigen_symmetric(segment.stats.covariance).eigenvalues;
  return segment;
}

// One pass of the optional boundary refinement: re-optimize each interior
// boundary inside the union of its two neighbors, holding the rest fixed.
// Repeats until no boundary moves, capped at 10 sweeps.
void refine_boundaries(const ReturnMatrix& data, const SplitConfig& config,
                       std::vector<ColumnRange>& ranges) {
  const std::ptrdiff_t m = data.series_count();
  std::vector<std::ptrdiff_t> bounds;
  bounds.reserve(ranges.size() + 1);
  bounds.push_back(ranges.front().begin);
  for (const ColumnRange& range : ranges) bounds.push_back(range.end);

  for (int sweep = 0; sweep < 10; ++sweep) {
    bool moved = false;
    for (std::size_t i = 1; i + 1 < bounds.size(); ++i) {
      const ColumnRange merged{bounds[i - 1], bounds[i + 1]};
      if (config.min_offset(m) > config.max_offset(m, merged.length())) continue;
      const DeltaSpectrum spectrum = delta_spectrum(data, merged, config);
      const std::ptrdiff_t refined = merged.begin + spectrum.best_offset;
      if (refined != bounds[i]) {
        bounds[i] = refined;
        moved = true;
      }
    }
    if (!moved) break;
  }
  for (std::size_t i = 0; i < ranges.size(); ++i) {
    ranges[i] = ColumnRange{bounds[i], bounds[i + 1]};
  }
}

}  // namespace

SegmentationResult segment_recursive(const ReturnMatrix& data, const SplitConfig& config) {
  config.validate();
  data.validate();

  BuildContext ctx{data, config, config.max_threads - 1};
  SegmentationResult result;
  result.tree = build_node(ctx, ColumnRange{0, data.observation_count()}, 0);

  std::vector<SplitNode*> leaves;
  collect_leaves(result.tree.get(), leaves);

  std::vector<ColumnRange> ranges;
  ranges.reserve(leaves.size());
  for (const SplitNode* leaf : leaves) ranges.push_back(leaf->range);
  if (config.refine && ranges.size() > 1) {
    refine_boundaries(data, config, ranges);
  }

  result.segments.reserve(leaves.size());
  for (std::size_t i = 0; i < leaves.size(); ++i) {
    leaves[i]->segment_index = i;
    result.segments.push_back(make_segment(data, config, ranges[i], leaves[i]->depth));
  }
  return result;
}

}  // namespace covseg
