#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "covseg/types.hpp"

namespace covseg {

/// xoshiro256++ (Blackman & Vigna, 2019), state seeded through splitmix64.
/// Pinned by name so identical seeds give identical streams on every
/// platform; std::normal_distribution is deliberately avoided because its
/// algorithm is implementation-defined.
class Xoshiro256PlusPlus {
 public:
  explicit Xoshiro256PlusPlus(std::uint64_t seed) noexcept;

  std::uint64_t next() noexcept;

  /// Uniform in [0, 1): the top 53 bits of next().
  double uniform01() noexcept;

 private:
  std::uint64_t state_[4];
};

/// Standard normal stream: Box-Muller over xoshiro256++. Draws a pair per
/// transform and caches the second value.
class NormalStream {
 public:
  explicit NormalStream(std::uint64_t seed) noexcept : rng_(seed) {}

  double operator()() noexcept;

 private:
  Xoshiro256PlusPlus rng_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

/// One locally stationary block of a mixture scenario.
struct RegimeSpec {
  std::ptrdiff_t length = 0;
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;  // symmetric positive definite
};

/// Ordered regimes plus the RNG seed; all regimes share the dimension M.
struct MixtureScenario {
  std::vector<RegimeSpec> regimes;
  std::uint64_t seed = 0;

  void validate() const;  // shape checks; positive definiteness is checked at sampling
};

struct SampledScenario {
  ReturnMatrix data;
  std::vector<std::ptrdiff_t> true_boundaries;  // regime start columns, 0 excluded
};

/// Samples column s of regime j as mean_j + L_j * z with L_j the lower
/// Cholesky factor of the regime covariance and z i.i.d. standard normals.
/// Every regime covariance is factored up front; a non-PD one raises
/// Error(not_positive_definite) before any sampling happens.
SampledScenario sample_scenario(const MixtureScenario& scenario);

/// Parses the declarative scenario format (see README): an optional
/// `seed N` line followed by one or more `regime` blocks, each holding
/// `length N`, `mean v1 .. vM`, and M `cov` rows. '#' starts a comment.
/// Errors carry `origin:line`.
MixtureScenario parse_scenario(std::istream& in, const std::string& origin);
MixtureScenario parse_scenario_file(const std::string& path);

}  // namespace covseg
