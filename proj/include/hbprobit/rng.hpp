#pragma once

#include <cstdint>

namespace hbprobit {

// Philox4x32-10 counter-based generator (Salmon et al. 2011). A stream is a
// 64-bit key plus a block counter; draws depend only on (key, counter), so
// independent streams can be consumed in any order or on any thread without
// affecting each other's output.
class Philox {
 public:
  explicit Philox(std::uint64_t key)
      : key0_(static_cast<std::uint32_t>(key)),
        key1_(static_cast<std::uint32_t>(key >> 32)) {}

  std::uint32_t next_u32() {
    if (pos_ == 4) refill();
    return block_[pos_++];
  }

  std::uint64_t next_u64() {
    const std::uint64_t lo = next_u32();
    const std::uint64_t hi = next_u32();
    return lo | (hi << 32);
  }

  // Uniform draw on the open interval (0, 1), 53-bit resolution.
  double next_double() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

 private:
  void refill() {
    std::uint32_t c0 = static_cast<std::uint32_t>(counter_);
    std::uint32_t c1 = static_cast<std::uint32_t>(counter_ >> 32);
    std::uint32_t c2 = 0;
    std::uint32_t c3 = 0;
    std::uint32_t k0 = key0_;
    std::uint32_t k1 = key1_;
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = 0xD2511F53ull * c0;
      const std::uint64_t p1 = 0xCD9E8D57ull * c2;
      const std::uint32_t n0 = static_cast<std::uint32_t>(p1 >> 32) ^ c1 ^ k0;
      const std::uint32_t n1 = static_cast<std::uint32_t>(p1);
      const std::uint32_t n2 = static_cast<std::uint32_t>(p0 >> 32) ^ c3 ^ k1;
      const std::uint32_t n3 = static_cast<std::uint32_t>(p0);
      c0 = n0;
      c1 = n1;
      c2 = n2;
      c3 = n3;
      k0 += 0x9E3779B9u;
      k1 += 0xBB67AE85u;
    }
    block_[0] = c0;
    block_[1] = c1;
    block_[2] = c2;
    block_[3] = c3;
    ++counter_;
    pos_ = 0;
  }

  std::uint32_t key0_;
  std::uint32_t key1_;
  std::uint64_t counter_ = 0;
  std::uint32_t block_[4] = {0, 0, 0, 0};
  int pos_ = 4;
};

namespace detail {
inline std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ull;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBull;
  z ^= z >> 31;
  return z;
}
}  // namespace detail

// Splittable stream label. child(i) derives an independent key, so a chain
// key can be split per iteration, per conditional, and per household, and
// the resulting draw sequences do not depend on scheduling order. This is
// the documented seed-splitting rule: every stream key is
//   mix(parent ^ (0x9E3779B97F4A7C15 * (id + 1)))
// starting from mix(user_seed).
struct RngKey {
  std::uint64_t state = 0;

  static RngKey root(std::uint64_t seed) { return RngKey{detail::mix64(seed)}; }

  RngKey child(std::uint64_t id) const {
    return RngKey{detail::mix64(state ^ (0x9E3779B97F4A7C15ull * (id + 1)))};
  }

  Philox stream() const { return Philox(state); }
};

}  // namespace hbprobit
