#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <thread>
#include <vector>

#include <boost/math/distributions/normal.hpp>

#include "riskbench/error.hpp"
#include "riskbench/money.hpp"

namespace riskbench {

// Random numbers: SplitMix64 addressed by counter. Output i of the stream for
// `seed` is mix(seed + (i + 1) * 0x9E3779B97F4A7C15), identical to the i-th
// value of a sequential SplitMix64 generator started at `seed`. Draw j of a
// simulation consumes outputs 2j (component choice) and 2j + 1 (variate), so
// every draw is addressable and results do not depend on how draws are split
// across workers.

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t splitmix64_mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

class CounterStream {
 public:
  constexpr explicit CounterStream(std::uint64_t seed) : seed_(seed) {}

  constexpr std::uint64_t word(std::uint64_t index) const {
    return splitmix64_mix(seed_ + (index + 1) * kGoldenGamma);
  }

  /// Open-interval uniform (0,1) from the top 53 bits.
  constexpr double uniform(std::uint64_t index) const {
    return (static_cast<double>(word(index) >> 11) + 0.5) * 0x1.0p-53;
  }

 private:
  std::uint64_t seed_;
};

struct MixtureComponent {
  Cents mean;
  Cents std_dev;
  double probability = 0.0;
};

struct MixtureSpec {
  std::vector<MixtureComponent> components;

  void check() const {
    if (components.empty()) throw Error(ErrorCode::InvalidArgument, "mixture has no components");
    double total = 0.0;
    for (const auto& c : components) {
      if (c.std_dev < Cents{0}) throw Error(ErrorCode::InvalidArgument, "negative standard deviation");
      if (!(c.probability >= 0.0)) throw Error(ErrorCode::InvalidArgument, "negative probability");
      total += c.probability;
    }
    if (std::abs(total - 1.0) > 1e-9)
      throw Error(ErrorCode::InvalidArgument, "mixture probabilities must sum to 1");
  }

  /// Low/high severity mixture observed for the ISAO peer group.
  static MixtureSpec isao_default() {
    return {{{Cents::from_dollars(50'000), Cents::from_dollars(25'000), 0.75},
             {Cents::from_dollars(450'000), Cents::from_dollars(300'000), 0.25}}};
  }
};

inline constexpr std::size_t kDefaultDraws = 10'000;
inline constexpr Cents kDefaultBinWidth = Cents::from_dollars(25'000);

struct SimulationResult {
  std::vector<Cents> samples;  // draw order
  std::vector<std::uint64_t> component_counts;
  std::uint64_t seed = 0;
  MixtureSpec spec;
};

namespace detail {

inline std::size_t pick_component(const MixtureSpec& spec, double u) {
  double cumulative = 0.0;
  for (std::size_t i = 0; i + 1 < spec.components.size(); ++i) {
    cumulative += spec.components[i].probability;
    if (u < cumulative) return i;
  }
  return spec.components.size() - 1;
}

inline Cents draw_variate(const MixtureComponent& c, double u) {
  if (c.std_dev == Cents{0}) return std::max(c.mean, Cents{0});
  const boost::math::normal_distribution<double> dist(static_cast<double>(c.mean.value),
                                                      static_cast<double>(c.std_dev.value));
  const double v = boost::math::quantile(dist, u);
  return v <= 0.0 ? Cents{0} : round_cents(v);  // bottom-censored at zero
}

}  // namespace detail

/// Draws n losses from the mixture. Per draw: one uniform selects the
/// component, a second feeds the normal inverse CDF, negatives censor to zero.
inline SimulationResult sample_losses(const MixtureSpec& spec, std::size_t n, std::uint64_t seed,
                                      std::size_t workers = 1) {
  spec.check();
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "need at least one draw");
  workers = std::clamp<std::size_t>(workers, 1, n);
  SimulationResult result;
  result.seed = seed;
  result.spec = spec;
  result.samples.resize(n);
  std::vector<std::uint8_t> chosen(n);
  const CounterStream stream(seed);

  auto run = [&](std::size_t begin, std::size_t end) {
    for (std::size_t j = begin; j < end; ++j) {
      const std::size_t c = detail::pick_component(spec, stream.uniform(2 * j));
      chosen[j] = static_cast<std::uint8_t>(c);
      result.samples[j] = detail::draw_variate(spec.components[c], stream.uniform(2 * j + 1));
    }
  };
  if (workers == 1) {
    run(0, n);
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t begin = std::min(n, w * chunk);
      const std::size_t end = std::min(n, begin + chunk);
      if (begin < end) pool.emplace_back(run, begin, end);
    }
  }
  result.component_counts.assign(spec.components.size(), 0);
  for (auto c : chosen) ++result.component_counts[c];
  return result;
}

struct HistogramBin {
  Cents lower;
  std::uint64_t count = 0;
};

/// Contiguous bins of [k w, (k+1) w) from the lowest to the highest occupied bin.
inline std::vector<HistogramBin> histogram(std::span<const Cents> samples, Cents bin_width) {
  if (!(bin_width > Cents{0})) throw Error(ErrorCode::InvalidArgument, "bin width must be positive");
  if (samples.empty()) return {};
  auto bin_of = [&](Cents v) {
    std::int64_t q = v.value / bin_width.value;
    if (v.value % bin_width.value < 0) --q;
    return q;
  };
  const auto [lo, hi] = std::minmax_element(samples.begin(), samples.end());
  const std::int64_t first = bin_of(*lo);
  const std::int64_t last = bin_of(*hi);
  std::vector<HistogramBin> bins(static_cast<std::size_t>(last - first + 1));
  for (std::size_t i = 0; i < bins.size(); ++i)
    bins[i].lower = Cents{(first + static_cast<std::int64_t>(i)) * bin_width.value};
  for (Cents v : samples) ++bins[static_cast<std::size_t>(bin_of(v) - first)].count;
  return bins;
}

inline std::vector<HistogramBin> histogram(const SimulationResult& result, Cents bin_width) {
  return histogram(std::span<const Cents>(result.samples), bin_width);
}

/// Empirical survival function 1 - F(l) = #{samples > l} / n.
class LossExceedanceCurve {
 public:
  explicit LossExceedanceCurve(std::vector<Cents> samples) : sorted_(std::move(samples)) {
    if (sorted_.empty()) throw Error(ErrorCode::InvalidArgument, "curve needs at least one sample");
    std::sort(sorted_.begin(), sorted_.end());
  }

  std::size_t size() const { return sorted_.size(); }
  const std::vector<Cents>& sorted_samples() const { return sorted_; }

  std::size_t exceed_count(Cents threshold) const {
    return static_cast<std::size_t>(sorted_.end() -
                                    std::upper_bound(sorted_.begin(), sorted_.end(), threshold));
  }

  double exceedance(Cents threshold) const {
    return static_cast<double>(exceed_count(threshold)) / static_cast<double>(sorted_.size());
  }

 private:
  std::vector<Cents> sorted_;
};

inline LossExceedanceCurve lec_from_samples(const SimulationResult& result) {
  return LossExceedanceCurve(result.samples);
}

struct ExceedanceRow {
  Cents threshold;
  double probability = 0.0;
};

/// Rows in ascending threshold order, so probabilities are nonincreasing.
inline std::vector<ExceedanceRow> lec_query(const LossExceedanceCurve& curve, std::vector<Cents> thresholds) {
  std::sort(thresholds.begin(), thresholds.end());
  std::vector<ExceedanceRow> rows;
  rows.reserve(thresholds.size());
  for (Cents t : thresholds) rows.push_back({t, curve.exceedance(t)});
  return rows;
}

/// Default reporting thresholds: $1k..$5m on a 1-2-5 ladder.
inline std::vector<Cents> default_lec_thresholds() {
  std::vector<Cents> out;
  for (std::int64_t decade = 1'000; decade <= 1'000'000; decade *= 10)
    for (std::int64_t m : {1, 2, 5}) out.push_back(Cents::from_dollars(decade * m));
  out.push_back(Cents::from_dollars(10'000'000));
  return out;
}

}  // namespace riskbench
