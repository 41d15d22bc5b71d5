#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <string_view>

namespace ksmi {

// Stable 64-bit finalizer (SplitMix64 output function).
std::uint64_t mix64(std::uint64_t x);

// FNV-1a over the bytes of `tag`; stable across platforms and runs.
std::uint64_t hash_tag(std::string_view tag);

// Stream id for a (purpose, index) pair.
std::uint64_t stream_id(std::string_view purpose, std::uint64_t index);

/// Counter-based random stream keyed by (base_seed, stream_id).
///
/// Output i of a stream is a pure function of (base_seed, stream_id, i), so
/// two streams with the same key produce the same sequence and a parallel
/// Monte-Carlo loop can hand each task its own substream without any shared
/// state. Distinct stream ids are decorrelated by the SplitMix64 finalizer;
/// independence between streams is a property of that generator, not
/// something this class checks.
///
/// Satisfies UniformRandomBitGenerator so the <random> distributions apply.
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t base_seed, std::uint64_t stream);

  static RngStream derive(std::uint64_t base_seed, std::string_view purpose,
                          std::uint64_t index);

  // Child stream; keyed by this stream's key, not its position.
  RngStream substream(std::string_view purpose, std::uint64_t index) const;

  std::uint64_t base_seed() const { return base_seed_; }
  std::uint64_t id() const { return stream_; }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }
  result_type operator()();

  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  double normal();
  // Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound);

 private:
  std::uint64_t base_seed_;
  std::uint64_t stream_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace ksmi
