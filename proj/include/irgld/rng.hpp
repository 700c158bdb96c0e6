#pragma once

// Counter-based, splittable random streams.
//
// A stream is a (key, counter) pair. Every output is a pure function of the
// key and the counter position, so a stream can be split into independent
// children by index without shared state. Graph generation keys one uniform
// per vertex pair; pool construction keys one stream per tree and one per
// particle.

#include <cstdint>
#include <limits>

namespace irgld {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

// SplitMix64 finaliser.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t derive_key(std::uint64_t key, std::uint64_t index) noexcept {
  return mix64(key ^ mix64(index * kGolden + 0x632BE59BD9B4E019ULL));
}

// Raw 64 bits at position `counter` of stream `key`.
constexpr std::uint64_t bits_at(std::uint64_t key, std::uint64_t counter) noexcept {
  return mix64(key + (counter + 1) * kGolden);
}

// Uniform on [0,1) with 53-bit resolution.
constexpr double to_unit_closed_open(std::uint64_t x) noexcept {
  return static_cast<double>(x >> 11) * 0x1.0p-53;
}

// Uniform on (0,1].
constexpr double to_unit_open_closed(std::uint64_t x) noexcept {
  return static_cast<double>((x >> 11) + 1) * 0x1.0p-53;
}

class Stream {
 public:
  using result_type = std::uint64_t;

  constexpr explicit Stream(std::uint64_t seed) noexcept : key_(mix64(seed ^ 0xD1B54A32D192ED03ULL)) {}

  static constexpr Stream from_key(std::uint64_t key, std::uint64_t position = 0) noexcept {
    Stream s(0);
    s.key_ = key;
    s.counter_ = position;
    return s;
  }

  // Independent child stream; children with different indices never overlap.
  constexpr Stream split(std::uint64_t index) const noexcept { return from_key(derive_key(key_, index)); }

  constexpr std::uint64_t key() const noexcept { return key_; }
  constexpr std::uint64_t position() const noexcept { return counter_; }

  constexpr result_type operator()() noexcept { return bits_at(key_, counter_++); }
  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  // [0,1)
  constexpr double uniform() noexcept { return to_unit_closed_open((*this)()); }
  // (0,1]
  constexpr double uniform_pos() noexcept { return to_unit_open_closed((*this)()); }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace irgld
