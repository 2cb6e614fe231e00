#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "permez/huffman.hpp"
#include "permez/pipeline.hpp"
#include "permez/predictor.hpp"
#include "permez/quantizer.hpp"

namespace permez::testing {

// Init model with a uniform codebook over all 2^m codes.
inline Codec make_codec(double b_r, int m = 8, ElementType type = ElementType::Float64) {
  Codec c;
  c.model = init_model();
  c.quantizer = make_quantizer(m, std::log2(1.0 + b_r));
  c.codebook = build_codebook(FrequencyTable(std::size_t{1} << m, 1.0));
  c.b_r = b_r;
  c.type = type;
  return c;
}

// White noise with random signs, magnitudes across ~60 decades and sprinkled zeros.
inline std::vector<double> adversarial_block(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> exponent(-30.0, 30.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) {
    const double r = u(rng);
    if (r < 0.05) {
      x = 0.0;
    } else {
      x = std::pow(10.0, exponent(rng)) * (r < 0.5 ? -1.0 : 1.0);
    }
  }
  return v;
}

inline std::uint64_t fnv1a(std::span<const std::uint8_t> bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (auto b : bytes) {
    h ^= b;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace permez::testing
