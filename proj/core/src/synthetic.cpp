#include "covseg/synthetic.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "covseg/stats.hpp"

namespace covseg {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) noexcept { return (x << k) | (x >> (64 - k)); }

}  // namespace

Xoshiro256PlusPlus::Xoshiro256PlusPlus(std::uint64_t seed) noexcept {
  std::uint64_t sm = seed;
  for (auto& word : state_) word = splitmix64(sm);
}

std::uint64_t Xoshiro256PlusPlus::next() noexcept {
  const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
  const std::uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = rotl(state_[3], 45);
  return result;
}

double Xoshiro256PlusPlus::uniform01() noexcept {
  return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

double NormalStream::operator()() noexcept {
  if (has_cached_) {
    has_cached_ = false;
    return cached_;
  }
  // u1 in (0, 1] keeps the log finite.
  const double u1 = (static_cast<double>(rng_.next() >> 11) + 1.0) * 0x1.0p-53;
  const double u2 = rng_.uniform01();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  cached_ = radius * std::sin(angle);
  has_cached_ = true;
  return radius * std::cos(angle);
}

void MixtureScenario::validate() const {
  if (regimes.empty()) {
    throw Error(ErrorCode::invalid_config, "scenario has no regimes");
  }
  const std::ptrdiff_t m = regimes.front().mean.size();
  for (std::size_t j = 0; j < regimes.size(); ++j) {
    const RegimeSpec& regime = regimes[j];
    if (regime.length < 1) {
      throw Error(ErrorCode::invalid_config,
                  "regime " + std::to_string(j + 1) + " has non-positive length");
    }
    if (regime.mean.size() != m || regime.covariance.rows() != m ||
        regime.covariance.cols() != m) {
      throw Error(ErrorCode::invalid_config,
                  "regime " + std::to_string(j + 1) + " does not share dimension M = " +
                      std::to_string(m));
    }
  }
}

SampledScenario sample_scenario(const MixtureScenario& scenario) {
  scenario.validate();
  const std::ptrdiff_t m = scenario.regimes.front().mean.size();

  // Factor every covariance before any sampling.
  std::vector<Eigen::MatrixXd> factors;
  factors.reserve(scenario.regimes.size());
  for (std::size_t j = 0; j < scenario.regimes.size(); ++j) {
    try {
      factors.push_back(cholesky_lower(scenario.regimes[j].covariance));
    } catch (const Error& e) {
      throw Error(ErrorCode::not_positive_definite,
                  "regime " + std::to_string(j + 1) + " covariance not positive definite: " +
                      e.what(),
                  e.index());
    }
  }

  std::ptrdiff_t total = 0;
  for (const RegimeSpec& regime : scenario.regimes) total += regime.length;

  SampledScenario sampled;
  sampled.data.values.resize(m, total);
  sampled.data.labels.reserve(m);
  for (std::ptrdiff_t i = 0; i < m; ++i) {
    sampled.data.labels.push_back("S" + std::to_string(i + 1));
  }
  sampled.data.timestamps.reserve(total);
  for (std::ptrdiff_t s = 0; s < total; ++s) {
    sampled.data.timestamps.push_back(Timestamp{s, std::to_string(s)});
  }

  NormalStream normal(scenario.seed);
  Eigen::VectorXd z(m);
  std::ptrdiff_t column = 0;
  for (std::size_t j = 0; j < scenario.regimes.size(); ++j) {
    if (j > 0) sampled.true_boundaries.push_back(column);
    const RegimeSpec& regime = scenario.regimes[j];
    for (std::ptrdiff_t s = 0; s < regime.length; ++s, ++column) {
      for (std::ptrdiff_t i = 0; i < m; ++i) z(i) = normal();
      sampled.data.values.col(column) =
          regime.mean + factors[j].triangularView<Eigen::Lower>() * z;
    }
  }
  return sampled;
}

namespace {

struct ScenarioParser {
  std::string origin;
  int line_number = 0;

  [[noreturn]] void fail(const std::string& message) const {
    throw Error(ErrorCode::parse_error,
                origin + ":" + std::to_string(line_number) + ": " + message);
  }

  double parse_real(const std::string& token) const {
    double value = 0.0;
    const char* begin = token.data();
    const char* end = begin + token.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end) fail("malformed number '" + token + "'");
    return value;
  }
};

std::vector<std::string> split_words(const std::string& line) {
  std::vector<std::string> words;
  std::istringstream stream(line);
  std::string word;
  while (stream >> word) words.push_back(word);
  return words;
}

}  // namespace

MixtureScenario parse_scenario(std::istream& in, const std::string& origin) {
  ScenarioParser parser{origin};
  MixtureScenario scenario;
  bool seed_seen = false;

  RegimeSpec current;
  std::vector<Eigen::VectorXd> cov_rows;
  bool in_regime = false;

  auto finish_regime = [&]() {
    const std::ptrdiff_t m = current.mean.size();
    if (m == 0) parser.fail("regime block is missing its 'mean' line");
    if (current.length < 1) parser.fail("regime block is missing a positive 'length'");
    if (static_cast<std::ptrdiff_t>(cov_rows.size()) != m) {
      parser.fail("regime block needs " + std::to_string(m) + " 'cov' rows, got " +
                  std::to_string(cov_rows.size()));
    }
    current.covariance.resize(m, m);
    for (std::ptrdiff_t i = 0; i < m; ++i) current.covariance.row(i) = cov_rows[i];
    const double asymmetry =
        (current.covariance - current.covariance.transpose()).cwiseAbs().maxCoeff();
    if (!(asymmetry <= 1e-9)) parser.fail("regime covariance is not symmetric");
    scenario.regimes.push_back(std::move(current));
    current = RegimeSpec{};
    cov_rows.clear();
  };

  std::string raw;
  while (std::getline(in, raw)) {
    ++parser.line_number;
    const std::size_t hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    const std::vector<std::string> words = split_words(raw);
    if (words.empty()) continue;
    const std::string& keyword = words[0];

    if (keyword == "seed") {
      if (in_regime) parser.fail("'seed' must appear before the first regime");
      if (seed_seen) parser.fail("duplicate 'seed'");
      if (words.size() != 2) parser.fail("'seed' takes exactly one integer");
      std::uint64_t seed = 0;
      auto [ptr, ec] =
          std::from_chars(words[1].data(), words[1].data() + words[1].size(), seed);
      if (ec != std::errc{} || ptr != words[1].data() + words[1].size()) {
        parser.fail("malformed seed '" + words[1] + "'");
      }
      scenario.seed = seed;
      seed_seen = true;
    } else if (keyword == "regime") {
      if (words.size() != 1) parser.fail("'regime' takes no arguments");
      if (in_regime) finish_regime();
      in_regime = true;
    } else if (keyword == "length") {
      if (!in_regime) parser.fail("'length' outside a regime block");
      if (words.size() != 2) parser.fail("'length' takes exactly one integer");
      std::ptrdiff_t length = 0;
      auto [ptr, ec] =
          std::from_chars(words[1].data(), words[1].data() + words[1].size(), length);
      if (ec != std::errc{} || ptr != words[1].data() + words[1].size() || length < 1) {
        parser.fail("malformed length '" + words[1] + "'");
      }
      current.length = length;
    } else if (keyword == "mean") {
      if (!in_regime) parser.fail("'mean' outside a regime block");
      if (words.size() < 2) parser.fail("'mean' needs at least one value");
      if (current.mean.size() != 0) parser.fail("duplicate 'mean' in regime block");
      current.mean.resize(static_cast<std::ptrdiff_t>(words.size()) - 1);
      for (std::size_t i = 1; i < words.size(); ++i) {
        current.mean(static_cast<std::ptrdiff_t>(i) - 1) = parser.parse_real(words[i]);
      }
    } else if (keyword == "cov") {
      if (!in_regime) parser.fail("'cov' outside a regime block");
      if (current.mean.size() == 0) parser.fail("'mean' must precede 'cov' rows");
      const std::ptrdiff_t m = current.mean.size();
      if (static_cast<std::ptrdiff_t>(words.size()) - 1 != m) {
        parser.fail("'cov' row needs " + std::to_string(m) + " values");
      }
      Eigen::VectorXd row(m);
      for (std::ptrdiff_t i = 0; i < m; ++i) {
        row(i) = parser.parse_real(words[static_cast<std::size_t>(i) + 1]);
      }
      cov_rows.push_back(std::move(row));
    } else {
      parser.fail("unknown keyword '" + keyword + "'");
    }
  }

  ++parser.line_number;
  if (in_regime) finish_regime();
  if (scenario.regimes.empty()) parser.fail("scenario defines no regimes");
  const std::ptrdiff_t m = scenario.regimes.front().mean.size();
  for (std::size_t j = 1; j < scenario.regimes.size(); ++j) {
    if (scenario.regimes[j].mean.size() != m) {
      parser.fail("regime " + std::to_string(j + 1) + " dimension differs from regime 1");
    }
  }
  return scenario;
}

MixtureScenario parse_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::io_error, "cannot open scenario file '" + path + "'");
  }
  return parse_scenario(in, path);
}

}  // namespace covseg
