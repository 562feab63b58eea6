#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <string_view>

namespace adot {

/// Identity of the random stream written into output metadata.
inline constexpr std::string_view kRngName = "philox4x32-10/box-muller";
inline constexpr int kRngVersion = 1;

/// Philox4x32-10 counter-based generator (Salmon et al., Random123).
///
/// A stream is fully determined by (seed, stream id); draws advance a
/// 64-bit block counter, so two engines built from the same pair produce
/// identical sequences on every platform.
class Philox4x32 {
 public:
  using result_type = std::uint32_t;
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  explicit Philox4x32(std::uint64_t seed = 0, std::uint64_t stream = 0);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();
  /// Uniform double in (0, 1], safe as a logarithm argument.
  double uniform_open_low();
  /// Standard normal draw via the Box-Muller transform (pairs are cached).
  double normal();

  /// The raw 10-round bijection, exposed for known-answer tests.
  static Counter block(Counter counter, Key key);

 private:
  void refill();

  Key key_{};
  std::uint64_t block_index_ = 0;
  std::uint32_t stream_hi_ = 0;
  std::uint32_t stream_lo_ = 0;
  Counter buffer_{};
  int used_ = 4;
  bool has_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

}  // namespace adot
