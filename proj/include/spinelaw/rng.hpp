#pragma once

#include <cstdint>
#include <limits>
#include <string_view>

namespace spinelaw {

// SplitMix64 finalizer; used for all seed and stream derivation.
constexpr auto mix64(std::uint64_t x) -> std::uint64_t {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr auto hash_combine(std::uint64_t seed, std::uint64_t value) -> std::uint64_t {
  return mix64(seed ^ mix64(value));
}

// xoshiro256** seeded through SplitMix64. Satisfies UniformRandomBitGenerator so it
// plugs into <random> distributions. Cheap to construct, so every particle gets its own.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) {
    for (auto& word : s_) {
      word = mix64(seed);
      seed += 0x9e3779b97f4a7c15ULL;
    }
  }

  static constexpr auto min() -> result_type { return 0; }
  static constexpr auto max() -> result_type { return std::numeric_limits<result_type>::max(); }

  auto operator()() -> result_type {
    const auto result = rotl(s_[1] * 5, 7) * 9;
    const auto t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform on [0, 1) with 53 random bits.
  auto uniform() -> double { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

 private:
  static constexpr auto rotl(std::uint64_t x, int k) -> std::uint64_t {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t s_[4];
};

// What a stream is used for. Distinct purposes never share draws.
enum class Stream_purpose : std::uint64_t {
  p_tree = 1,
  q_spine = 2,
  q_subtree = 3,
  root_lifetime = 4,
  motion_only = 5,
};

// Identifies one replication's stream family. Per-particle streams are derived as
//   seed = H(H(H(H(master, rep), purpose), label_hash), salt)
// with H = hash_combine; the derivation is frozen because output bytes depend on it.
struct Rng_handle {
  std::uint64_t master_seed = 0;
  std::uint64_t replication = 0;
  Stream_purpose purpose = Stream_purpose::p_tree;

  auto family_seed() const -> std::uint64_t {
    return hash_combine(hash_combine(master_seed, replication), static_cast<std::uint64_t>(purpose));
  }

  auto stream(std::uint64_t label_hash, std::uint64_t salt = 0) const -> Rng {
    return Rng{hash_combine(hash_combine(family_seed(), label_hash), salt)};
  }
};

// Ulam-Harris label hashing: root has a fixed hash, a child mixes its index into the parent's.
inline constexpr std::uint64_t k_root_label_hash = 0x5eed5eed5eed5eedULL;

constexpr auto child_label_hash(std::uint64_t parent_hash, std::uint32_t child_index) -> std::uint64_t {
  return hash_combine(parent_hash, std::uint64_t{child_index} + 1);
}

}  // namespace spinelaw
