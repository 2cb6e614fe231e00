#include "permez/quantizer.hpp"

#include <cmath>

#include "permez/error.hpp"

namespace permez {

QuantizerSpec make_quantizer(int m, double b_a) {
  if (m < kMinCodeBits || m > kMaxCodeBits) {
    throw Error(ErrorKind::InvalidArgument, "code width m must lie in [4, 16]");
  }
  if (!(b_a > 0.0) || !std::isfinite(b_a)) {
    throw Error(ErrorKind::InvalidArgument, "absolute bound must be positive");
  }
  return QuantizerSpec{m, b_a};
}

std::uint32_t quantize(double err, const QuantizerSpec& spec) noexcept {
  double steps = std::round(err / spec.step());  // std::round rounds halves away from zero
  // Rounding in err / step can leave an exact half-step an ulp outside the
  // bound; the neighboring step is then within it.
  const double miss = steps * spec.step() - err;
  if (std::fabs(miss) > spec.b_a) steps -= std::copysign(1.0, miss);
  if (!(std::fabs(steps * spec.step() - err) <= spec.b_a)) return kBalanceCode;
  const double candidate = static_cast<double>(spec.center()) + steps;
  if (!(candidate >= 1.0 && candidate <= static_cast<double>(spec.code_count() - 1))) {
    return kBalanceCode;
  }
  return static_cast<std::uint32_t>(candidate);
}

double dequantize(std::uint32_t code, const QuantizerSpec& spec) {
  if (code == kBalanceCode) {
    throw Error(ErrorKind::BalanceFlagNotDequantizable, "code 0 carries no residual");
  }
  return (static_cast<double>(code) - static_cast<double>(spec.center())) * spec.step();
}

}  // namespace permez
