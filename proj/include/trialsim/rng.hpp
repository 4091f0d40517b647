#pragma once

#include <array>
#include <cstdint>

namespace trialsim {

// Counter-based random stream (Philox4x64-10). A stream is addressed by
// (master_seed, stream_index, substream); equal addresses reproduce the
// identical sequence on any host or thread, distinct addresses give
// statistically independent sequences. Replication r of a simulation runs
// on stream_index = r, so results do not depend on the worker schedule.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t stream_index,
            std::uint64_t substream = 0)
      : key_{master_seed, substream},
        stream_index_(stream_index),
        block_(0),
        pos_(kBlockSize) {}

  std::uint64_t master_seed() const { return key_[0]; }
  std::uint64_t stream_index() const { return stream_index_; }
  std::uint64_t substream() const { return key_[1]; }

  // Fresh stream addressed under the same (seed, index) but a different
  // substream; used to keep data generation and analysis-time Monte Carlo
  // on separate sequences.
  RngStream child(std::uint64_t substream) const {
    return RngStream(key_[0], stream_index_, substream);
  }

  std::uint64_t next_u64() {
    if (pos_ == kBlockSize) {
      fill_block();
      pos_ = 0;
    }
    return buffer_[pos_++];
  }

  // Uniform on [0,1) with 53 random bits.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform on (0,1); safe under log().
  double next_open() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

 private:
  static constexpr int kBlockSize = 4;
  static constexpr std::uint64_t kMult0 = 0xD2E7470EE14C6C93ULL;
  static constexpr std::uint64_t kMult1 = 0xCA5A826395121157ULL;
  static constexpr std::uint64_t kWeyl0 = 0x9E3779B97F4A7C15ULL;
  static constexpr std::uint64_t kWeyl1 = 0xBB67AE8584CAA73BULL;

  static void mulhilo(std::uint64_t a, std::uint64_t b, std::uint64_t& hi,
                      std::uint64_t& lo) {
    const auto prod =
        static_cast<unsigned __int128>(a) * static_cast<unsigned __int128>(b);
    hi = static_cast<std::uint64_t>(prod >> 64);
    lo = static_cast<std::uint64_t>(prod);
  }

  void fill_block() {
    std::array<std::uint64_t, 4> ctr{block_, stream_index_, key_[1], 0};
    std::uint64_t k0 = key_[0];
    std::uint64_t k1 = key_[1];
    for (int round = 0; round < 10; ++round) {
      std::uint64_t hi0, lo0, hi1, lo1;
      mulhilo(kMult0, ctr[0], hi0, lo0);
      mulhilo(kMult1, ctr[2], hi1, lo1);
      ctr = {hi1 ^ ctr[1] ^ k0, lo1, hi0 ^ ctr[3] ^ k1, lo0};
      k0 += kWeyl0;
      k1 += kWeyl1;
    }
    buffer_ = ctr;
    ++block_;
  }

  std::array<std::uint64_t, 2> key_;
  std::uint64_t stream_index_;
  std::uint64_t block_;
  std::array<std::uint64_t, 4> buffer_{};
  int pos_;
};

}  // namespace trialsim
