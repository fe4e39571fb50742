#pragma once

#include <cmath>
#include <cstdint>

namespace markovcert {

namespace detail {

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

/// splitmix64 finalizer (Steele/Lea/Flood; Vigna's public-domain constants).
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace detail

/**
 * Counter-based random stream keyed by (seed, stream_id).
 *
 * Internally a splitmix64 walk whose initial state is a strong mix of the
 * key pair, so streams with sequential ids are statistically independent
 * and a draw sequence is a pure function of the key — the property the
 * trajectory simulator relies on for thread-count-independent results.
 */
class StreamRng {
 public:
  StreamRng(std::uint64_t seed, std::uint64_t stream_id)
      : state_(detail::mix64(detail::mix64(seed + detail::kGolden) ^
                             ((stream_id + 1) * detail::kGolden))) {}

  std::uint64_t next_u64() {
    state_ += detail::kGolden;
    return detail::mix64(state_);
  }

  /// Uniform draw in the open interval (0, 1) with 53-bit resolution.
  double next_uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal draw (Box-Muller, second value cached).
  double next_normal() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    const double u1 = next_uniform();
    const double u2 = next_uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * M_PI * u2;
    cached_ = radius * std::sin(angle);
    has_cached_ = true;
    return radius * std::cos(angle);
  }

  double next_normal(double mean, double stddev) {
    return mean + stddev * next_normal();
  }

 private:
  std::uint64_t state_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace markovcert
