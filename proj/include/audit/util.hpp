#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace audit {

inline constexpr std::uint64_t kFnvOffsetBasis = 0xcbf29ce484222325ULL;
inline constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

/// 64-bit FNV-1a. Used for instance ids, cache keys, and manifest hashes;
/// fixed here so hashes are identical across platforms and runs.
inline std::uint64_t fnv1a64(std::string_view data,
                             std::uint64_t state = kFnvOffsetBasis) {
  for (unsigned char c : data) {
    state ^= c;
    state *= kFnvPrime;
  }
  return state;
}

std::string to_hex(std::uint64_t value);

/// Deterministic cross-platform RNG stream (SplitMix64). std::shuffle and
/// the std distributions are implementation-defined, so seeded runs use
/// this instead.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, bound). Modulo bias is negligible for the small bounds
  /// used here and keeps the stream identical everywhere.
  std::uint64_t next_below(std::uint64_t bound) {
    return bound == 0 ? 0 : next() % bound;
  }

  /// Uniform in [0, 1).
  double next_double() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

 private:
  std::uint64_t state_;
};

std::string trim(std::string_view s);
std::string to_lower_ascii(std::string_view s);
std::vector<std::string> split_lines(std::string_view text);
bool starts_with(std::string_view s, std::string_view prefix);

/// Fixed-point decimal rendering used by every report file (default six
/// decimals, matching the summary contract).
std::string format_fixed(double value, int decimals = 6);

/// "2026-08-22T12:34:56Z"
std::string iso_utc_now();

}  // namespace audit
