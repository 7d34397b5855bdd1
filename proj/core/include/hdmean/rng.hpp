#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace hdmean {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
///
/// A stream is identified by (key, stream_id). Output block k of a stream is
/// philox(key, counter = {k_lo, k_hi, id_lo, id_hi}), so stream r is fully
/// determined by its index and never shares state with stream r'. This is what
/// lets replications run on any number of threads and reduce to the same
/// aggregate as a serial run.
///
/// Satisfies std::uniform_random_bit_generator with 32-bit output.
class RngStream {
 public:
  using result_type = std::uint32_t;

  RngStream(std::uint64_t key, std::uint64_t stream_id);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  /// Independent child stream, e.g. one per sample in a two-sample draw.
  RngStream fork(std::uint64_t salt) const;

  std::uint64_t key() const { return key_; }
  std::uint64_t stream_id() const { return stream_id_; }

 private:
  void refill();

  std::uint64_t key_;
  std::uint64_t stream_id_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buf_{};
  unsigned pos_ = 4;
};

/// One Philox4x32-10 block: ten rounds over a 128-bit counter and 64-bit key.
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key);

/// SplitMix64 finaliser; used to derive keys from user seeds and salts.
std::uint64_t mix64(std::uint64_t x);

}  // namespace hdmean
