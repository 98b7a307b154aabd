#ifndef REWL1_RNG_HPP
#define REWL1_RNG_HPP

#include <cmath>
#include <cstdint>
#include <numbers>

namespace rewl1 {

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Identifies one reproducible random stream. Draw i of a stream is a pure
/// function of (master_seed, stream_id, i), so streams can be consumed in any
/// order or on any thread and still agree.
struct RngStream {
  std::uint64_t master_seed = 0;
  std::uint64_t stream_id = 0;

  constexpr RngStream() = default;
  constexpr RngStream(std::uint64_t seed, std::uint64_t id) : master_seed(seed), stream_id(id) {}

  /// Child stream; distinct child ids give statistically independent streams.
  constexpr RngStream substream(std::uint64_t child) const noexcept {
    return {master_seed, mix64(stream_id ^ mix64(child + 0x632BE59BD9B4E019ull))};
  }

  constexpr std::uint64_t key() const noexcept { return mix64(master_seed ^ mix64(stream_id)); }

  friend constexpr bool operator==(const RngStream&, const RngStream&) = default;
};

/// Sequential reader over an RngStream (counter-based SplitMix64).
///
/// Conventions, fixed so that other implementations can reproduce streams:
///  - uniform(): top 53 bits of a draw, mapped to (0, 1] as (b + 1) * 2^-53.
///  - normal(): Box-Muller on two consecutive uniforms u1, u2, returning
///    sqrt(-2 ln u1) * cos(2 pi u2); the sine branch is discarded.
///  - below(n): uniform() * n truncated, clamped to n - 1.
class RngReader {
 public:
  explicit constexpr RngReader(const RngStream& stream) noexcept : key_(stream.key()) {}

  std::uint64_t next_u64() noexcept {
    ++counter_;
    return mix64(key_ + counter_ * 0xD1B54A32D192ED03ull);
  }

  double uniform() noexcept {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  double normal() noexcept {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  /// +1 or -1 with equal probability.
  double sign() noexcept { return (next_u64() >> 63) ? 1.0 : -1.0; }

  std::uint64_t below(std::uint64_t n) noexcept {
    const auto v = static_cast<std::uint64_t>(uniform() * static_cast<double>(n));
    return v >= n ? n - 1 : v;
  }

  std::uint64_t draws() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace rewl1

#endif  // REWL1_RNG_HPP
