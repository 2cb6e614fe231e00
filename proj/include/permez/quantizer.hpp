#pragma once

#include <cstdint>

namespace permez {

inline constexpr int kMinCodeBits = 4;
inline constexpr int kMaxCodeBits = 16;
// Code 0 marks a balance point: the value is stored raw instead of quantized.
inline constexpr std::uint32_t kBalanceCode = 0;

struct QuantizerSpec {
  int m = 8;
  double b_a = 0.0;

  std::uint32_t center() const noexcept { return 1u << (m - 1); }
  std::uint32_t code_count() const noexcept { return 1u << m; }
  double step() const noexcept { return 2.0 * b_a; }
};

// Throws InvalidArgument unless kMinCodeBits <= m <= kMaxCodeBits and b_a > 0.
QuantizerSpec make_quantizer(int m, double b_a);

// Round-half-away-from-zero onto the 2*b_a grid centered at center();
// anything that lands outside [1, 2^m - 1] becomes kBalanceCode.
std::uint32_t quantize(double err, const QuantizerSpec& spec) noexcept;

// Throws BalanceFlagNotDequantizable for code 0.
double dequantize(std::uint32_t code, const QuantizerSpec& spec);

}  // namespace permez
