#pragma once

// Lorenzo stencil and the three-layer perceptron that replaces it.
//
// The perceptron maps an S-value neighbor surface plus a bias input to H = 2
// leaky-ReLU hidden units and a single linear output. At initialization each
// hidden unit carries the Lorenzo coefficients, so the network reproduces the
// Lorenzo prediction whenever that prediction is non-negative.

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace permez {

struct StencilTerm {
  int k1 = 0;  // row offset (north)
  int k2 = 0;  // column offset (west)
  double coefficient = 0.0;
};

// All (k1, k2) != (0, 0) with 0 <= k1, k2 <= n, ordered by (k1, k2).
std::vector<StencilTerm> lorenzo_coefficients(int order, int dims = 2);

// 2-D order-1 surface: west, north, northwest.
inline constexpr std::size_t kSurfaceSize = 3;
inline constexpr std::size_t kHiddenSize = 2;
inline constexpr double kDefaultLeakySlope = 0.01;

using Surface = std::array<double, kSurfaceSize>;

struct PerceptronModel {
  // w1[i][j]: input i (surface entries, then the bias input) -> hidden unit j.
  std::array<std::array<double, kHiddenSize>, kSurfaceSize + 1> w1{};
  std::array<double, kHiddenSize> w2{};
  double leaky_slope = kDefaultLeakySlope;
  int n_order = 1;
  int dims = 2;

  bool all_finite() const noexcept;
  friend bool operator==(const PerceptronModel&, const PerceptronModel&) = default;
};

PerceptronModel init_model(std::size_t surface_size = kSurfaceSize, double leaky_slope = kDefaultLeakySlope);

inline double leaky_relu(double x, double slope) noexcept { return x >= 0.0 ? x : slope * x; }

inline double predict(const PerceptronModel& m, const Surface& s) noexcept {
  double out = 0.0;
  for (std::size_t j = 0; j < kHiddenSize; ++j) {
    double h = m.w1[kSurfaceSize][j];
    for (std::size_t i = 0; i < kSurfaceSize; ++i) h += m.w1[i][j] * s[i];
    out += m.w2[j] * leaky_relu(h, m.leaky_slope);
  }
  return out;
}

struct TrainBatch {
  std::vector<Surface> surfaces;
  std::vector<double> targets;
};

struct TrainResult {
  PerceptronModel model;
  double loss = 0.0;  // mean squared error before the update
};

// Gradient of mean((predict - target)^2) + l2 * |w|^2, laid out like the
// model parameters. Exposed for gradient checking.
struct Gradient {
  std::array<std::array<double, kHiddenSize>, kSurfaceSize + 1> w1{};
  std::array<double, kHiddenSize> w2{};
};

double batch_loss(const PerceptronModel& m, const TrainBatch& batch, double l2);
Gradient batch_gradient(const PerceptronModel& m, const TrainBatch& batch, double l2);

// One full-batch gradient-descent step. Throws DivergedTraining if any weight
// becomes non-finite and InvalidArgument on bad hyperparameters or batch.
TrainResult train_step(const PerceptronModel& m, const TrainBatch& batch, double lr, double l2);

std::vector<std::uint8_t> serialize_model(const PerceptronModel& m);
PerceptronModel deserialize_model(std::span<const std::uint8_t> bytes);

}  // namespace permez
