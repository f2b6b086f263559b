#pragma once

#include <cstdint>
#include <limits>

namespace palmtess {

/// Purpose tags separating the random streams used within one replicate.
enum class Purpose : std::uint64_t {
  sample = 1,
  conductance = 2,
  bonds = 3,
  gibbs = 4,
  thinning = 5,
  placement = 6,
  aux = 7,
};

inline constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Counter-based generator keyed by (seed, replicate, purpose). Satisfies
/// UniformRandomBitGenerator, so the standard distributions can draw from it.
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream() : RngStream(0, 0, Purpose::sample) {}
  RngStream(std::uint64_t seed, std::uint64_t replicate, Purpose purpose)
      : RngStream(seed, replicate, static_cast<std::uint64_t>(purpose)) {}
  RngStream(std::uint64_t seed, std::uint64_t replicate, std::uint64_t purpose)
      : seed_(seed), replicate_(replicate), purpose_(purpose),
        key_(mix64(mix64(mix64(seed) ^ (replicate * 0xd1b54a32d192ed03ULL)) ^
                   (purpose * 0x8cb92ba72f3d8dd7ULL))) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept { return mix64(key_ + (++counter_) * 0x9e3779b97f4a7c15ULL); }

  /// Uniform on [0, 1).
  double uniform() noexcept { return to_unit((*this)()); }
  double uniform(double a, double b) noexcept { return a + (b - a) * uniform(); }

  /// Same seed and replicate, different purpose; the counter restarts.
  RngStream with_purpose(Purpose p) const { return RngStream(seed_, replicate_, p); }
  RngStream with_purpose(std::uint64_t p) const { return RngStream(seed_, replicate_, p); }

  /// Uniform on [0, 1) addressed by the key (a, b); does not advance the stream.
  double uniform_for(std::uint64_t a, std::uint64_t b, std::uint64_t salt = 0) const noexcept {
    return to_unit(mix64(mix64(key_ ^ mix64(a + 0x632be59bd9b4e019ULL)) + mix64(b) + salt * 0x9e37ULL));
  }

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t replicate() const noexcept { return replicate_; }
  std::uint64_t draws() const noexcept { return counter_; }

  static double to_unit(std::uint64_t x) noexcept {
    return static_cast<double>(x >> 11) * 0x1.0p-53;
  }

 private:
  std::uint64_t seed_;
  std::uint64_t replicate_;
  std::uint64_t purpose_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace palmtess
