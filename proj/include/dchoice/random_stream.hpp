#pragma once

#include <cstdint>
#include <random>

namespace dchoice {

/// A reproducible random substream keyed by (master_seed, stream_index).
///
/// Each trial of an experiment owns one stream; two streams with the same key
/// produce identical sequences on every platform, since the variates are
/// derived from raw engine output rather than from std distributions.
class RandomStream {
 public:
  RandomStream(std::uint64_t master_seed, std::uint64_t stream_index);

  std::uint64_t master_seed() const noexcept { return master_seed_; }
  std::uint64_t stream_index() const noexcept { return stream_index_; }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();

  /// Unit-rate exponential variate.
  double exponential();

 private:
  std::uint64_t master_seed_;
  std::uint64_t stream_index_;
  std::mt19937_64 engine_;
};

}  // namespace dchoice
