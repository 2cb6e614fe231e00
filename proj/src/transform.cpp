#include "permez/transform.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "permez/error.hpp"

namespace permez {

std::size_t element_width(ElementType type) noexcept { return type == ElementType::Float32 ? 4 : 8; }

double epsilon0(ElementType type) noexcept {
  return type == ElementType::Float32 ? static_cast<double>(std::numeric_limits<float>::min())
                                      : std::numeric_limits<double>::min();
}

double zero_floor(double eps0, double b_r) noexcept { return eps0 * (1.0 + b_r) * (1.0 + b_r); }

BlockStats compute_block_stats(std::span<const double> block, double floor) {
  BlockStats s;
  s.count = block.size();
  double lo = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < block.size(); ++i) {
    const double x = block[i];
    if (!std::isfinite(x)) {
      throw Error(ErrorKind::NonFiniteInput, "element " + std::to_string(i) + " is not finite");
    }
    const double a = std::fabs(x);
    if (a <= floor) {
      s.has_zero = true;
      continue;
    }
    ++s.nonzero_count;
    if (x < 0) s.has_negative = true;
    if (a < lo) lo = a;
    if (a > s.abs_max) s.abs_max = a;
  }
  s.abs_min = s.nonzero_count ? lo : 0.0;
  return s;
}

TransformParams make_transform_params(const BlockStats& stats, double b_r, double eps0) {
  if (!(b_r > 0.0 && b_r < 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "relative error bound must lie in (0, 1)");
  }
  if (stats.nonzero_count == 0) {
    throw Error(ErrorKind::DegenerateBlock, "block has no nonzero element");
  }
  if (!(stats.abs_min > eps0)) {
    throw Error(ErrorKind::SubnormalMinimum, "smallest nonzero magnitude is not above epsilon0");
  }
  const double factor_pos = stats.abs_min;
  // (abs_max + eps0) * factor_pos * (1 + b_r)^2 / (abs_min - eps0), grouped so
  // the intermediate stays near abs_max in magnitude.
  const double growth = (1.0 + b_r) * (1.0 + b_r);
  const double factor_neg = (stats.abs_max + eps0) * (factor_pos / (stats.abs_min - eps0)) * growth;
  if (!std::isfinite(factor_neg)) {
    throw Error(ErrorKind::InvalidArgument, "negative factor is not representable");
  }
  return transform_params_from_factors(factor_pos, factor_neg, b_r, eps0);
}

TransformParams transform_params_from_factors(double factor_pos, double factor_neg, double b_r, double eps0) {
  TransformParams p;
  p.factor_pos = factor_pos;
  p.factor_neg = factor_neg;
  p.epsilon0 = eps0;
  p.b_r = b_r;
  p.b_a = std::log2(1.0 + b_r);
  p.log2_factor_pos = std::log2(factor_pos);
  p.log2_factor_neg = std::log2(factor_neg);
  // The smallest negative image is log2((abs_min - eps0) * factor_neg), which
  // sits exactly 2*b_a above the largest positive image; the boundary is the
  // midpoint. factor_pos == abs_min by construction.
  p.boundary = std::log2(factor_pos - eps0) + p.log2_factor_neg - p.b_a;
  p.zero_code_value = std::log2(eps0) + p.log2_factor_pos;
  p.zero_threshold = p.zero_code_value + p.b_a;
  p.zero_floor = zero_floor(eps0, b_r);
  return p;
}

double forward_map(double x, const TransformParams& p) noexcept {
  if (std::fabs(x) <= p.zero_floor) return p.zero_code_value;
  if (x > 0) return std::log2(x) + p.log2_factor_pos;
  return std::log2(-x) + p.log2_factor_neg;
}

double inverse_map(double v, const TransformParams& p) noexcept {
  if (v <= p.zero_threshold) return 0.0;
  if (v <= p.boundary) return std::exp2(v - p.log2_factor_pos);
  return -std::exp2(v - p.log2_factor_neg);
}

}  // namespace permez
