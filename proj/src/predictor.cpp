#include "permez/predictor.hpp"

#include <cmath>

#include "permez/byte_io.hpp"
#include "permez/error.hpp"

namespace permez {

namespace {

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

std::vector<StencilTerm> lorenzo_coefficients(int order, int dims) {
  if (order < 1) throw Error(ErrorKind::InvalidArgument, "Lorenzo order must be >= 1");
  if (dims != 2) throw Error(ErrorKind::InvalidArgument, "only 2-D stencils are supported");
  std::vector<StencilTerm> terms;
  for (int k1 = 0; k1 <= order; ++k1) {
    for (int k2 = 0; k2 <= order; ++k2) {
      if (k1 == 0 && k2 == 0) continue;
      const double sign = ((k1 + k2 + 1) % 2 == 0) ? 1.0 : -1.0;
      terms.push_back({k1, k2, sign * binomial(order, k1) * binomial(order, k2)});
    }
  }
  return terms;
}

bool PerceptronModel::all_finite() const noexcept {
  for (const auto& row : w1)
    for (double w : row)
      if (!std::isfinite(w)) return false;
  for (double w : w2)
    if (!std::isfinite(w)) return false;
  return std::isfinite(leaky_slope);
}

PerceptronModel init_model(std::size_t surface_size, double leaky_slope) {
  if (surface_size != kSurfaceSize) {
    throw Error(ErrorKind::InvalidArgument, "surface size must match the 2-D order-1 Lorenzo stencil");
  }
  PerceptronModel m;
  m.leaky_slope = leaky_slope;
  // Surface order is west (0,1), north (1,0), northwest (1,1).
  const std::array<double, kSurfaceSize> lorenzo = [] {
    std::array<double, kSurfaceSize> c{};
    for (const auto& t : lorenzo_coefficients(1)) {
      if (t.k1 == 0 && t.k2 == 1) c[0] = t.coefficient;
      if (t.k1 == 1 && t.k2 == 0) c[1] = t.coefficient;
      if (t.k1 == 1 && t.k2 == 1) c[2] = t.coefficient;
    }
    return c;
  }();
  for (std::size_t j = 0; j < kHiddenSize; ++j) {
    for (std::size_t i = 0; i < kSurfaceSize; ++i) m.w1[i][j] = lorenzo[i];
    m.w1[kSurfaceSize][j] = 0.0;
    m.w2[j] = 1.0 / static_cast<double>(kHiddenSize);
  }
  return m;
}

namespace {

void check_batch(const TrainBatch& batch) {
  if (batch.surfaces.empty() || batch.surfaces.size() != batch.targets.size()) {
    throw Error(ErrorKind::InvalidArgument, "training batch must be non-empty with matching lengths");
  }
}

double weight_norm2(const PerceptronModel& m) {
  double sum = 0.0;
  for (const auto& row : m.w1)
    for (double w : row) sum += w * w;
  for (double w : m.w2) sum += w * w;
  return sum;
}

}  // namespace

double batch_loss(const PerceptronModel& m, const TrainBatch& batch, double l2) {
  check_batch(batch);
  double sse = 0.0;
  for (std::size_t n = 0; n < batch.surfaces.size(); ++n) {
    const double d = predict(m, batch.surfaces[n]) - batch.targets[n];
    sse += d * d;
  }
  return sse / static_cast<double>(batch.surfaces.size()) + l2 * weight_norm2(m);
}

Gradient batch_gradient(const PerceptronModel& m, const TrainBatch& batch, double l2) {
  check_batch(batch);
  Gradient g;
  const double scale = 2.0 / static_cast<double>(batch.surfaces.size());
  for (std::size_t n = 0; n < batch.surfaces.size(); ++n) {
    const Surface& s = batch.surfaces[n];
    std::array<double, kHiddenSize> pre{};
    std::array<double, kHiddenSize> act{};
    double out = 0.0;
    for (std::size_t j = 0; j < kHiddenSize; ++j) {
      pre[j] = m.w1[kSurfaceSize][j];
      for (std::size_t i = 0; i < kSurfaceSize; ++i) pre[j] += m.w1[i][j] * s[i];
      act[j] = leaky_relu(pre[j], m.leaky_slope);
      out += m.w2[j] * act[j];
    }
    const double d_out = scale * (out - batch.targets[n]);
    for (std::size_t j = 0; j < kHiddenSize; ++j) {
      g.w2[j] += d_out * act[j];
      const double d_pre = d_out * m.w2[j] * (pre[j] >= 0.0 ? 1.0 : m.leaky_slope);
      for (std::size_t i = 0; i < kSurfaceSize; ++i) g.w1[i][j] += d_pre * s[i];
      g.w1[kSurfaceSize][j] += d_pre;
    }
  }
  for (std::size_t i = 0; i <= kSurfaceSize; ++i)
    for (std::size_t j = 0; j < kHiddenSize; ++j) g.w1[i][j] += 2.0 * l2 * m.w1[i][j];
  for (std::size_t j = 0; j < kHiddenSize; ++j) g.w2[j] += 2.0 * l2 * m.w2[j];
  return g;
}

TrainResult train_step(const PerceptronModel& m, const TrainBatch& batch, double lr, double l2) {
  if (!(lr >= 0.0) || !(l2 >= 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "learning rate and l2 must be non-negative");
  }
  check_batch(batch);
  TrainResult r{m, 0.0};
  double sse = 0.0;
  for (std::size_t n = 0; n < batch.surfaces.size(); ++n) {
    const double d = predict(m, batch.surfaces[n]) - batch.targets[n];
    sse += d * d;
  }
  r.loss = sse / static_cast<double>(batch.surfaces.size());
  if (lr == 0.0) return r;
  const Gradient g = batch_gradient(m, batch, l2);
  for (std::size_t i = 0; i <= kSurfaceSize; ++i)
    for (std::size_t j = 0; j < kHiddenSize; ++j) r.model.w1[i][j] -= lr * g.w1[i][j];
  for (std::size_t j = 0; j < kHiddenSize; ++j) r.model.w2[j] -= lr * g.w2[j];
  if (!r.model.all_finite()) {
    throw Error(ErrorKind::DivergedTraining, "weights became non-finite");
  }
  return r;
}

std::vector<std::uint8_t> serialize_model(const PerceptronModel& m) {
  ByteWriter w;
  w.put(static_cast<std::uint32_t>(kSurfaceSize));
  w.put(static_cast<std::uint32_t>(kHiddenSize));
  w.put(m.leaky_slope);
  for (const auto& row : m.w1)
    for (double v : row) w.put(v);
  for (double v : m.w2) w.put(v);
  return w.take();
}

PerceptronModel deserialize_model(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  const auto s = r.get<std::uint32_t>();
  const auto h = r.get<std::uint32_t>();
  if (s != kSurfaceSize || h != kHiddenSize) {
    throw Error(ErrorKind::Corrupt, "unsupported model shape");
  }
  PerceptronModel m;
  m.leaky_slope = r.get<double>();
  for (auto& row : m.w1)
    for (double& v : row) v = r.get<double>();
  for (double& v : m.w2) v = r.get<double>();
  if (r.remaining() != 0) throw Error(ErrorKind::Corrupt, "trailing bytes after model");
  if (!m.all_finite()) throw Error(ErrorKind::Corrupt, "model contains non-finite weights");
  return m;
}

}  // namespace permez
