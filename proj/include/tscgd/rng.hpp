#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace tscgd {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
///
/// A stream is identified by (key, stream_id). The 128-bit Philox counter is
/// (stream_id, block), so for a fixed key every (stream_id, block) pair maps
/// to a distinct input of a bijection: blocks of different streams never
/// coincide and streams are disjoint by construction.
class PhiloxStream {
 public:
  using result_type = std::uint64_t;
  using Block = std::array<std::uint32_t, 4>;

  PhiloxStream(std::uint64_t key, std::uint64_t stream_id) noexcept
      : key_{static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32)},
        stream_id_(stream_id) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept {
    if (word_ == 0) {
      buffer_ = bijection({static_cast<std::uint32_t>(stream_id_),
                           static_cast<std::uint32_t>(stream_id_ >> 32),
                           static_cast<std::uint32_t>(block_),
                           static_cast<std::uint32_t>(block_ >> 32)},
                          key_);
      ++block_;
    }
    const result_type out = (static_cast<result_type>(buffer_[word_ + 1]) << 32) | buffer_[word_];
    word_ = (word_ + 2) % 4;
    return out;
  }

  std::uint64_t stream_id() const noexcept { return stream_id_; }

  /// The raw Philox4x32-10 permutation of one counter block under `key`.
  static Block bijection(Block counter, std::array<std::uint32_t, 2> key) noexcept {
    constexpr std::uint32_t kMul0 = 0xD2511F53u;
    constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * counter[0];
      const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * counter[2];
      const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const auto lo0 = static_cast<std::uint32_t>(p0);
      const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
      const auto lo1 = static_cast<std::uint32_t>(p1);
      counter = {hi1 ^ counter[1] ^ key[0], lo1, hi0 ^ counter[3] ^ key[1], lo0};
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    return counter;
  }

 private:
  std::array<std::uint32_t, 2> key_;
  std::uint64_t stream_id_;
  std::uint64_t block_ = 0;
  Block buffer_{};
  unsigned word_ = 0;
};

using Rng = PhiloxStream;

/// Stream ids reserved for non-query randomness (problem data, covariate
/// samplers, gradient checks). Oracle queries use ids counting up from 0.
inline constexpr std::uint64_t kAuxStreamBase = 0xF000'0000'0000'0000ull;

}  // namespace tscgd
