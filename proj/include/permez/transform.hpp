#pragma once

// Relative-error <-> absolute-error domain mapping.
//
// Values are mapped with log2 after multiplying by a sign-dependent factor so
// that every positive value lands below `boundary` and every negative value
// above it. An absolute bound b_a = log2(1 + b_r) on the mapped value then
// bounds the pointwise relative error of the original by b_r.

#include <cstddef>
#include <cstdint>
#include <span>

namespace permez {

enum class ElementType : std::uint8_t { Float32 = 0, Float64 = 1 };

std::size_t element_width(ElementType type) noexcept;

// Smallest positive normal value of the element type.
double epsilon0(ElementType type) noexcept;

// Magnitudes at or below this are treated as exact zeros by the transform.
double zero_floor(double epsilon0, double b_r) noexcept;

struct BlockStats {
  double abs_min = 0.0;  // smallest nonzero magnitude; 0 when nonzero_count == 0
  double abs_max = 0.0;
  bool has_zero = false;
  bool has_negative = false;
  std::size_t count = 0;
  std::size_t nonzero_count = 0;
};

// Elements with |x| <= floor count as zeros. Throws NonFiniteInput.
BlockStats compute_block_stats(std::span<const double> block, double floor = 0.0);

struct TransformParams {
  double factor_pos = 1.0;
  double factor_neg = 1.0;
  double epsilon0 = 0.0;
  double b_r = 0.0;
  double b_a = 0.0;
  double boundary = 0.0;
  double zero_code_value = 0.0;
  double zero_threshold = 0.0;
  double zero_floor = 0.0;
  double log2_factor_pos = 0.0;
  double log2_factor_neg = 0.0;
};

// Throws DegenerateBlock when the block has no nonzero element and
// SubnormalMinimum when abs_min <= epsilon0.
TransformParams make_transform_params(const BlockStats& stats, double b_r, double epsilon0);

// Rebuilds the full parameter set from the serialized fields. Used both by
// make_transform_params and when loading a container, so the derived values
// are bit-identical on both sides.
TransformParams transform_params_from_factors(double factor_pos, double factor_neg, double b_r,
                                              double epsilon0);

double forward_map(double x, const TransformParams& p) noexcept;
double inverse_map(double v, const TransformParams& p) noexcept;

}  // namespace permez
