#pragma once

// Exact sampling from the fitted ensembles and percentile confidence intervals.
//
// Each pair is drawn independently: a unit link with probability p_ij, then a
// geometric number of extra units with continuation probability y_i y_j. The
// geometric part is drawn by inversion in one step.
//
// Randomness is counter-based: the stream of pair (i, j) in sample m is keyed
// by (seed, m, min(i, j), max(i, j)), so results do not depend on how pairs or
// samples are distributed over threads.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

#include "nullnet/errors.hpp"
#include "nullnet/graph.hpp"
#include "nullnet/models.hpp"
#include "nullnet/netstats.hpp"

namespace nullnet {

/// SplitMix64 generator; satisfies UniformRandomBitGenerator.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit constexpr SplitMix64(std::uint64_t state) noexcept : state_(state) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  constexpr result_type operator()() noexcept {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  constexpr double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

/// Stream for one (seed, sample, pair) key.
inline SplitMix64 pair_stream(std::uint64_t seed, std::uint64_t sample, std::size_t i, std::size_t j) noexcept {
  const auto lo = static_cast<std::uint64_t>(std::min(i, j));
  const auto hi = static_cast<std::uint64_t>(std::max(i, j));
  SplitMix64 mix(seed);
  std::uint64_t key = mix();
  for (std::uint64_t word : {sample, lo, hi}) key = SplitMix64(key ^ word)();
  return SplitMix64(key);
}

/// One draw from q(w) for a pair with link probability p and continuation v.
template <typename Rng>
Weight sample_pair_weight(double p, double v, Rng& rng) {
  const double u1 = rng.uniform();
  if (!(u1 < p)) return 0;
  if (v <= 0.0) return 1;
  // P(extra = g) = v^g (1 - v): extra = floor(ln U / ln v), U in (0, 1].
  const double u2 = 1.0 - rng.uniform();
  const double extra = std::floor(std::log(u2) / std::log(v));
  constexpr double kCap = 9.0e18;
  return 1 + static_cast<Weight>(std::min(extra, kCap));
}

struct SampleConfig {
  std::size_t samples = 1000;
  std::uint64_t seed = 0;
  double alpha = 0.05;
  unsigned threads = 1;

  void validate() const {
    if (samples < 1) throw InputError("sample count must be >= 1");
    if (!(alpha > 0.0) || !(alpha < 1.0)) throw InputError("alpha must lie in (0, 1)");
  }
};

inline WeightedGraph sample_graph(const ModelParams& params, std::uint64_t seed, std::uint64_t sample_index) {
  const std::size_t n = params.size();
  SquareMatrix<Weight> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const PairState st = pair_state(params, i, j);
      auto rng = pair_stream(seed, sample_index, i, j);
      const Weight draw = sample_pair_weight(st.link_probability(), st.continuation(), rng);
      w(i, j) = draw;
      w(j, i) = draw;
    }
  }
  return WeightedGraph(params.nodes, std::move(w));
}

/// Runs `body(m)` for m in [0, count) on up to `threads` workers. Each index
/// is processed exactly once; callers write into index-addressed slots.
inline void parallel_for_samples(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  if (threads == 1) {
    for (std::size_t m = 0; m < count; ++m) body(m);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t)
      pool.emplace_back([&] {
        try {
          for (std::size_t m = next++; m < count; m = next++) body(m);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = count;
        }
      });
  }
  if (failure) std::rethrow_exception(failure);
}

/// Linear-interpolation quantile (type 7) of sorted values.
inline double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) throw InputError("quantile of an empty list");
  const double h = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

/// Percentile interval of a list; nullopt when more than half is undefined.
inline std::optional<Interval> percentile_interval(const std::vector<std::optional<double>>& draws, double alpha) {
  std::vector<double> values;
  values.reserve(draws.size());
  for (const auto& d : draws)
    if (d) values.push_back(*d);
  if (values.empty() || 2 * values.size() < draws.size()) return std::nullopt;
  std::sort(values.begin(), values.end());
  return Interval{quantile_sorted(values, alpha / 2.0), quantile_sorted(values, 1.0 - alpha / 2.0)};
}

/// Per-node statistic of a sampled graph; nullopt marks an undefined value.
using NodeStatistic = std::function<std::vector<std::optional<double>>(const WeightedGraph&)>;

/// Per-node (alpha/2, 1 - alpha/2) percentile bounds of `statistic` over
/// `config.samples` graphs drawn from `params`.
inline std::vector<std::optional<Interval>> ensemble_interval(const ModelParams& params, const NodeStatistic& statistic,
                                                              const SampleConfig& config) {
  config.validate();
  if (config.samples < 100) throw InputError("percentile intervals need at least 100 samples");
  const std::size_t n = params.size();
  std::vector<std::vector<std::optional<double>>> draws(config.samples);
  parallel_for_samples(config.samples, config.threads, [&](std::size_t m) {
    draws[m] = statistic(sample_graph(params, config.seed, m));
    if (draws[m].size() != n) throw InputError("statistic returned the wrong number of nodes");
  });
  std::vector<std::optional<Interval>> out(n);
  std::vector<std::optional<double>> column(config.samples);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t m = 0; m < config.samples; ++m) column[m] = draws[m][i];
    out[i] = percentile_interval(column, config.alpha);
  }
  return out;
}

}  // namespace nullnet
