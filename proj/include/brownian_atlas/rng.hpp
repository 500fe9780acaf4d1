#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace brownian_atlas {

// SplitMix64 mixing function (Steele/Lea/Flood). Full-period bijection on u64.
inline constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Counter-based splittable generator. A stream is identified by the key
// (seed, tag, replica); draws are a pure function of (key, counter), so
// replica streams are identical no matter which thread runs them or in
// what order replicas execute.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : key_(mix64(seed)) {}

  Rng(std::uint64_t seed, std::string_view tag, std::uint64_t replica)
      : key_(mix64(mix64(mix64(seed) ^ fnv1a64(tag)) + replica)) {}

  // Derive an independent child stream without disturbing this one.
  Rng child(std::string_view tag, std::uint64_t replica) const {
    Rng r(0);
    r.key_ = mix64(mix64(key_ ^ fnv1a64(tag)) + replica);
    return r;
  }

  std::uint64_t next_u64() { return mix64(key_ + 0x9e3779b97f4a7c15ULL * (++counter_)); }

  // Uniform on (0,1]: never 0, so log() in Box-Muller is safe.
  double next_unit() { return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; }

  // Uniform on [0,n).
  std::uint64_t next_below(std::uint64_t n) {
    // Rejection keeps the draw exactly uniform for any n.
    const std::uint64_t limit = ~0ULL - ~0ULL % n;
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return x % n;
  }

  // Standard normal via Box-Muller; the paired value is cached.
  double next_gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = next_unit();
    const double u2 = next_unit();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  std::uint64_t key() const { return key_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace brownian_atlas
