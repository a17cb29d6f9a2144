#pragma once

// Philox4x64-10 counter-based generator (Salmon et al., SC'11).
//
// A stream is identified by (seed, stream index): the seed is the key and
// the stream index occupies the upper two counter words, so streams for
// different trajectories never overlap and need no coordination.

#include <array>
#include <cstdint>

namespace qtraj {

using PhiloxCounter = std::array<std::uint64_t, 4>;
using PhiloxKey = std::array<std::uint64_t, 2>;

PhiloxCounter philox4x64(PhiloxCounter counter, PhiloxKey key);

class PhiloxStream {
 public:
  using result_type = std::uint64_t;

  PhiloxStream(std::uint64_t seed, std::uint64_t stream)
      : key_{seed, 0x7172'616a'6563'746fULL}, counter_{0, 0, stream, 0} {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }

  result_type operator()() {
    if (next_ == 4) refill();
    return block_[next_++];
  }

  // Uniform double in the open interval (0, 1).
  double uniform() { return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53; }

  // Number of 64-bit words drawn so far.
  std::uint64_t draws() const { return counter_[0] * 4 - (4 - next_); }

 private:
  void refill() {
    block_ = philox4x64(counter_, key_);
    ++counter_[0];
    if (counter_[0] == 0) ++counter_[1];
    next_ = 0;
  }

  PhiloxKey key_;
  PhiloxCounter counter_;
  PhiloxCounter block_{};
  unsigned next_ = 4;
};

}  // namespace qtraj
