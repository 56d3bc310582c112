#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>

namespace stablecone {

// Substream scheme identifier recorded in run manifests. Bump if the
// derivation below or any variate transform changes.
inline constexpr std::string_view kStreamScheme = "philox4x32-10/splitmix64-v1";

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// FNV-1a over the tag bytes, then mixed. Stable across platforms.
constexpr std::uint64_t tag_hash(std::string_view tag) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return splitmix64(h);
}

// key = splitmix64(splitmix64(master ^ tag_hash(tag)) + index)
constexpr std::uint64_t substream_key(std::uint64_t master, std::string_view tag,
                                      std::uint64_t index) {
  return splitmix64(splitmix64(master ^ tag_hash(tag)) + index);
}

// Philox4x32-10 (Salmon et al.), keyed by 64 bits, counter over 128 bits.
class Philox4x32 {
 public:
  using Block = std::array<std::uint32_t, 4>;

  static Block generate(Block ctr, std::uint64_t key) {
    std::uint32_t k0 = static_cast<std::uint32_t>(key);
    std::uint32_t k1 = static_cast<std::uint32_t>(key >> 32);
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = std::uint64_t{0xD2511F53u} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * ctr[2];
      const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const auto lo0 = static_cast<std::uint32_t>(p0);
      const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
      const auto lo1 = static_cast<std::uint32_t>(p1);
      ctr = {hi1 ^ ctr[1] ^ k0, lo1, hi0 ^ ctr[3] ^ k1, lo0};
      k0 += 0x9E3779B9u;
      k1 += 0xBB67AE85u;
    }
    return ctr;
  }
};

// Counter-based stream: the n-th 64-bit draw depends only on (key, n), so a
// stream can be recreated anywhere from its key. Satisfies
// UniformRandomBitGenerator.
class RngStream {
 public:
  using result_type = std::uint64_t;

  explicit RngStream(std::uint64_t key) : key_(key) {}
  RngStream(std::uint64_t master, std::string_view tag, std::uint64_t index)
      : key_(substream_key(master, tag, index)) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }

  result_type operator()() {
    if (pos_ == 2) refill();
    const auto lo = buf_[2 * pos_];
    const auto hi = buf_[2 * pos_ + 1];
    ++pos_;
    return (std::uint64_t{hi} << 32) | lo;
  }

  // Child stream for nested estimators; deterministic in (key, child).
  RngStream split(std::uint64_t child) const {
    return RngStream(splitmix64(key_ ^ splitmix64(child + 0xA5A5A5A5ULL)));
  }

  std::uint64_t key() const { return key_; }
  std::uint64_t blocks_used() const { return counter_; }

  // Uniform on the open interval (0,1) with 53 random bits.
  double uniform() {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
  }

  double exponential() { return -std::log(uniform()); }

  // Box-Muller; the spare variate is kept so draws come in a fixed order.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double r = std::sqrt(-2.0 * std::log(uniform()));
    const double phi = 2.0 * std::numbers::pi * uniform();
    spare_ = r * std::sin(phi);
    has_spare_ = true;
    return r * std::cos(phi);
  }

  // Marsaglia-Tsang, with the shape < 1 boost gamma(a) = gamma(a+1) U^{1/a}.
  double gamma(double shape) {
    if (shape < 1.0) {
      const double g = gamma(shape + 1.0);
      return g * std::pow(uniform(), 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  double beta(double a, double b) {
    const double x = gamma(a);
    const double y = gamma(b);
    return x / (x + y);
  }

 private:
  void refill() {
    buf_ = Philox4x32::generate(
        {static_cast<std::uint32_t>(counter_), static_cast<std::uint32_t>(counter_ >> 32), 0u, 0u},
        key_);
    ++counter_;
    pos_ = 0;
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  Philox4x32::Block buf_{};
  int pos_ = 2;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace stablecone
