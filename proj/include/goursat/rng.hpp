#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace goursat::rng {

// Counter-based random numbers (Philox 4x64, 10 rounds). Every draw is a pure
// function of (key, counter), so independent trials and out-of-order or
// streamed generation all reproduce bit-identically. The key carries
// (master_seed, stream); the counter carries the draw index.

namespace detail {

inline constexpr std::uint64_t philox_m0 = 0xD2E7470EE14C6C93ull;
inline constexpr std::uint64_t philox_m1 = 0xCA5A826395121157ull;
inline constexpr std::uint64_t philox_w0 = 0x9E3779B97F4A7C15ull;
inline constexpr std::uint64_t philox_w1 = 0xBB67AE8584CAA73Bull;

inline void mulhilo(std::uint64_t a, std::uint64_t b, std::uint64_t& hi, std::uint64_t& lo) {
  const unsigned __int128 p = static_cast<unsigned __int128>(a) * b;
  hi = static_cast<std::uint64_t>(p >> 64);
  lo = static_cast<std::uint64_t>(p);
}

}  // namespace detail

/// One 256-bit Philox4x64-10 block.
inline std::array<std::uint64_t, 4> philox4x64(std::array<std::uint64_t, 4> ctr,
                                               std::array<std::uint64_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    std::uint64_t hi0, lo0, hi1, lo1;
    detail::mulhilo(detail::philox_m0, ctr[0], hi0, lo0);
    detail::mulhilo(detail::philox_m1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += detail::philox_w0;
    key[1] += detail::philox_w1;
  }
  return ctr;
}

/// Maps a 64-bit word to the open interval (0, 1): the top 52 bits plus a half
/// step, times 2^-52. With 52 bits the +0.5 is exactly representable, so the
/// result is confined to [2^-53, 1 - 2^-53] and log() below is always finite.
inline double to_unit_open(std::uint64_t u) {
  return (static_cast<double>(u >> 12) + 0.5) * 0x1p-52;
}

/// The index-th standard-normal draw of stream (master_seed, stream).
///
/// Fixed construction: Philox4x64-10 with key = (master_seed, stream) and
/// counter = (index, 0, 0, 0); lanes 0 and 1 feed the cosine branch of the
/// Box-Muller transform. One draw per counter block keeps random access exact.
inline double standard_normal_at(std::uint64_t master_seed, std::uint64_t stream,
                                 std::uint64_t index) {
  const auto words = philox4x64({index, 0, 0, 0}, {master_seed, stream});
  const double u1 = to_unit_open(words[0]);
  const double u2 = to_unit_open(words[1]);
  constexpr double two_pi = 6.283185307179586476925286766559;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
}

}  // namespace goursat::rng
