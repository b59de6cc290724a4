#pragma once

#include <bit>
#include <cstdint>
#include <span>

#include "gcnabft/errors.hpp"

namespace gcnabft {

enum class FloatWidth : std::uint8_t { Single, Double };

// Which population of arithmetic results a fault targets. Matrix
// multiply-add results go through the single-precision datapath; checksum
// accumulation runs in double.
enum class Stream : std::uint8_t { MacResult, ChecksumAccum, None };

inline constexpr int width_bits(FloatWidth w) {
  return w == FloatWidth::Single ? 32 : 64;
}

inline float flip_bit(float value, int bit) {
  if (bit < 0 || bit >= 32) throw BitOutOfRange("bit must be in [0,32)");
  return std::bit_cast<float>(std::bit_cast<std::uint32_t>(value) ^
                              (std::uint32_t{1} << bit));
}

inline double flip_bit(double value, int bit) {
  if (bit < 0 || bit >= 64) throw BitOutOfRange("bit must be in [0,64)");
  return std::bit_cast<double>(std::bit_cast<std::uint64_t>(value) ^
                               (std::uint64_t{1} << bit));
}

// Flips one bit of the binary interchange encoding at the given width.
// Deterministic involution for width-valued inputs.
inline double flip_bit(double value, FloatWidth width, int bit) {
  if (width == FloatWidth::Single)
    return static_cast<double>(flip_bit(static_cast<float>(value), bit));
  return flip_bit(value, bit);
}

// Armed single-flip hook. `seen` counts events of the targeted stream across
// a whole kernel invocation sequence (e.g. the H*W product followed by the
// H*w_r check column within one phase), so target_op_index addresses the
// concatenated stream. At most one flip fires; afterwards the hook is spent.
//
// A MacResult flip acts on the single-precision image of the multiply-add
// result and the flipped value is stored back into the accumulator; a
// ChecksumAccum flip acts on the double running sum directly.
struct FaultHook {
  Stream target_stream = Stream::None;
  std::uint64_t target_op_index = 0;
  int target_bit = 0;

  std::uint64_t seen = 0;
  bool fired = false;

  void on_event(Stream stream, double& value) {
    if (fired || stream != target_stream) return;
    if (seen++ == target_op_index) {
      value = flip_bit(value,
                       stream == Stream::MacResult ? FloatWidth::Single
                                                   : FloatWidth::Double,
                       target_bit);
      fired = true;
    }
  }
};

// Kernels take a set of hooks so multi-fault trials can arm several sites in
// the same stream.
using HookSet = std::span<FaultHook* const>;

inline void offer_event(HookSet hooks, Stream stream, double& value) {
  for (FaultHook* h : hooks) h->on_event(stream, value);
}

}  // namespace gcnabft
