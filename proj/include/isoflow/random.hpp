#pragma once

#include <cstdint>
#include <limits>

#include <boost/random/normal_distribution.hpp>

namespace isoflow {

/// Finalizer of the SplitMix64 generator; a bijective 64-bit mixer.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Identifies an independent random stream. Children are derived by stable
/// hashing, so a stream is reproducible from (seed, stream id, sample index)
/// regardless of the order in which streams are created or consumed.
struct StreamKey {
  std::uint64_t offset = 0;
  std::uint64_t salt = 0;

  static StreamKey root(std::uint64_t seed) noexcept;
  StreamKey child(std::uint64_t index) const noexcept;

  friend bool operator==(const StreamKey&, const StreamKey&) = default;
};

/// Counter-based engine: the n-th output is a pure function of (key, n).
/// Satisfies UniformRandomBitGenerator.
class CounterEngine {
public:
  using result_type = std::uint64_t;

  explicit CounterEngine(StreamKey key, std::uint64_t counter = 0) noexcept
      : key_(key), counter_(counter) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept;

  std::uint64_t counter() const noexcept { return counter_; }
  const StreamKey& key() const noexcept { return key_; }

private:
  StreamKey key_;
  std::uint64_t counter_;
};

/// A seeded stream of uniform and standard normal variates.
class RandomStream {
public:
  explicit RandomStream(StreamKey key) noexcept : engine_(key) {}
  RandomStream(std::uint64_t seed, std::uint64_t stream_id) noexcept
      : engine_(StreamKey::root(seed).child(stream_id)) {}

  /// Standard normal variate (ziggurat).
  double normal() { return normal_(engine_); }
  /// Uniform variate on [0, 1) with 53 random bits.
  double uniform() noexcept;
  std::uint64_t bits() noexcept { return engine_(); }

  CounterEngine& engine() noexcept { return engine_; }

private:
  CounterEngine engine_;
  boost::random::normal_distribution<double> normal_;
};

} // namespace isoflow
