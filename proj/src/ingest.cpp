#include "permez/ingest.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>

#include "permez/error.hpp"

namespace permez {

namespace {

constexpr std::size_t kTextHeaderBytes = 3200;
constexpr std::size_t kBinaryHeaderBytes = 400;
constexpr std::size_t kTraceHeaderBytes = 240;
// Byte offsets from the start of the file / trace header.
constexpr std::size_t kSamplesPerTraceOffset = 3220;
constexpr std::size_t kFormatCodeOffset = 3224;
constexpr std::size_t kTraceSamplesOffset = 114;

std::uint16_t be16(const std::uint8_t* p) { return static_cast<std::uint16_t>((p[0] << 8) | p[1]); }
std::uint32_t be32(const std::uint8_t* p) {
  return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) | (std::uint32_t{p[2]} << 8) | p[3];
}

void check_finite(const Dataset& d) {
  for (std::size_t i = 0; i < d.values.size(); ++i) {
    if (!std::isfinite(d.values[i])) {
      throw Error(ErrorKind::NonFiniteInput, d.source + ": element " + std::to_string(i) + " is not finite");
    }
  }
}

}  // namespace

float ibm_to_ieee(std::uint32_t word) noexcept {
  const bool negative = word >> 31;
  const int exponent = static_cast<int>((word >> 24) & 0x7F) - 64;
  const std::uint32_t fraction = word & 0x00FFFFFF;
  // fraction * 2^-24 * 16^exponent is exact in binary64; the narrowing
  // conversion performs the single rounding step.
  const double magnitude = std::ldexp(static_cast<double>(fraction), 4 * exponent - 24);
  return static_cast<float>(negative ? -magnitude : magnitude);
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(ErrorKind::Io, "read failed: " + path.string());
  return bytes;
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot create " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::Io, "write failed: " + path.string());
}

Dataset parse_segy(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kTextHeaderBytes + kBinaryHeaderBytes) {
    throw Error(ErrorKind::TruncatedFile, "file shorter than the SEG-Y file headers");
  }
  const std::size_t samples = be16(&bytes[kSamplesPerTraceOffset]);
  const int format = be16(&bytes[kFormatCodeOffset]);
  if (format != 1 && format != 5) {
    throw Error(ErrorKind::UnsupportedFormatCode, "sample format code " + std::to_string(format));
  }
  if (samples == 0) throw Error(ErrorKind::InconsistentTraceLength, "binary header gives zero samples per trace");
  const std::size_t trace_bytes = kTraceHeaderBytes + 4 * samples;
  const std::size_t body = bytes.size() - kTextHeaderBytes - kBinaryHeaderBytes;
  if (body % trace_bytes != 0) throw Error(ErrorKind::TruncatedFile, "partial trace at end of file");

  Dataset d;
  d.rows = body / trace_bytes;
  d.cols = samples;
  d.type = ElementType::Float32;
  d.source = "segy";
  d.values.resize(d.rows * d.cols);
  for (std::size_t t = 0; t < d.rows; ++t) {
    const std::uint8_t* trace = &bytes[kTextHeaderBytes + kBinaryHeaderBytes + t * trace_bytes];
    const std::size_t ns = be16(trace + kTraceSamplesOffset);
    if (ns != 0 && ns != samples) {
      throw Error(ErrorKind::InconsistentTraceLength,
                  "trace " + std::to_string(t) + " has " + std::to_string(ns) + " samples");
    }
    const std::uint8_t* s = trace + kTraceHeaderBytes;
    for (std::size_t k = 0; k < samples; ++k, s += 4) {
      const std::uint32_t word = be32(s);
      d.values[t * samples + k] = format == 1 ? ibm_to_ieee(word) : std::bit_cast<float>(word);
    }
  }
  check_finite(d);
  return d;
}

Dataset read_segy(const std::filesystem::path& path) {
  Dataset d = parse_segy(read_file(path));
  d.source = path.filename().string();
  return d;
}

Dataset read_raw(const std::filesystem::path& path, std::size_t rows, std::size_t cols, ElementType type,
                 Endian endian) {
  if (rows == 0 || cols == 0) throw Error(ErrorKind::EmptyDataset, "raw input needs non-zero dims");
  const auto bytes = read_file(path);
  const std::size_t width = element_width(type);
  if (bytes.size() != rows * cols * width) {
    throw Error(ErrorKind::SizeMismatch, path.string() + " holds " + std::to_string(bytes.size()) +
                                             " bytes, expected " + std::to_string(rows * cols * width));
  }
  Dataset d;
  d.rows = rows;
  d.cols = cols;
  d.type = type;
  d.source = path.filename().string();
  d.values.resize(rows * cols);
  for (std::size_t i = 0; i < d.values.size(); ++i) {
    std::uint64_t v = 0;
    for (std::size_t b = 0; b < width; ++b) {
      const std::size_t k = endian == Endian::Little ? b : width - 1 - b;
      v |= static_cast<std::uint64_t>(bytes[i * width + k]) << (8 * b);
    }
    d.values[i] = type == ElementType::Float32 ? std::bit_cast<float>(static_cast<std::uint32_t>(v))
                                               : std::bit_cast<double>(v);
  }
  check_finite(d);
  return d;
}

void write_raw(const std::filesystem::path& path, std::span<const double> values, ElementType type,
               Endian endian) {
  const std::size_t width = element_width(type);
  std::vector<std::uint8_t> bytes(values.size() * width);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const std::uint64_t v = type == ElementType::Float32
                                ? std::bit_cast<std::uint32_t>(static_cast<float>(values[i]))
                                : std::bit_cast<std::uint64_t>(values[i]);
    for (std::size_t b = 0; b < width; ++b) {
      const std::size_t k = endian == Endian::Little ? b : width - 1 - b;
      bytes[i * width + k] = static_cast<std::uint8_t>(v >> (8 * b));
    }
  }
  write_file(path, bytes);
}

FieldKind parse_field_kind(std::string_view name) {
  if (name == "sine2d") return FieldKind::Sine2d;
  if (name == "gaussian-field") return FieldKind::GaussianField;
  if (name == "white-noise") return FieldKind::WhiteNoise;
  if (name == "constant") return FieldKind::Constant;
  throw Error(ErrorKind::InvalidArgument, "unknown field kind '" + std::string(name) + "'");
}

std::string_view to_string(FieldKind kind) noexcept {
  switch (kind) {
    case FieldKind::Sine2d: return "sine2d";
    case FieldKind::GaussianField: return "gaussian-field";
    case FieldKind::WhiteNoise: return "white-noise";
    case FieldKind::Constant: return "constant";
  }
  return "?";
}

namespace {

// Uniform in [0, 1) from the top 53 bits; portable across standard libraries.
double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1p-53; }

std::vector<double> smoothed_noise(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<double> noise(rows * cols);
  for (std::size_t i = 0; i < noise.size(); i += 2) {
    // Box-Muller
    const double u1 = 1.0 - unit(rng);
    const double u2 = unit(rng);
    const double radius = std::sqrt(-2.0 * std::log(u1));
    noise[i] = radius * std::cos(2.0 * std::numbers::pi * u2);
    if (i + 1 < noise.size()) noise[i + 1] = radius * std::sin(2.0 * std::numbers::pi * u2);
  }
  constexpr int kRadius = 8;
  constexpr double kSigma = 4.0;
  std::vector<double> kernel(2 * kRadius + 1);
  for (int k = -kRadius; k <= kRadius; ++k) kernel[k + kRadius] = std::exp(-0.5 * k * k / (kSigma * kSigma));
  // Separable blur with periodic wrap-around.
  std::vector<double> tmp(noise.size(), 0.0);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) {
      double acc = 0.0;
      for (int k = -kRadius; k <= kRadius; ++k) {
        const std::size_t cc = (c + cols * kRadius + k) % cols;
        acc += kernel[k + kRadius] * noise[r * cols + cc];
      }
      tmp[r * cols + c] = acc;
    }
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) {
      double acc = 0.0;
      for (int k = -kRadius; k <= kRadius; ++k) {
        const std::size_t rr = (r + rows * kRadius + k) % rows;
        acc += kernel[k + kRadius] * tmp[rr * cols + c];
      }
      noise[r * cols + c] = acc;
    }
  double sum2 = 0.0;
  for (double v : noise) sum2 += v * v;
  const double scale = noise.empty() || sum2 == 0.0 ? 1.0 : 1.0 / std::sqrt(sum2 / static_cast<double>(noise.size()));
  for (double& v : noise) v *= scale;
  return noise;
}

}  // namespace

Dataset generate(FieldKind kind, std::size_t rows, std::size_t cols, std::uint64_t seed) {
  if (rows == 0 || cols == 0) throw Error(ErrorKind::InvalidArgument, "generated fields need non-zero dims");
  Dataset d;
  d.rows = rows;
  d.cols = cols;
  d.type = ElementType::Float32;
  d.source = std::string(to_string(kind));
  d.values.resize(rows * cols);
  switch (kind) {
    case FieldKind::Sine2d:
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c)
          d.values[r * cols + c] = std::sin(2.0 * std::numbers::pi * r / rows) *
                                       std::sin(2.0 * std::numbers::pi * c / cols) +
                                   2.0;
      break;
    case FieldKind::GaussianField:
      d.values = smoothed_noise(rows, cols, seed);
      break;
    case FieldKind::WhiteNoise: {
      std::mt19937_64 rng(seed);
      for (double& v : d.values) v = 2.0 * unit(rng) - 1.0;
      break;
    }
    case FieldKind::Constant:
      for (double& v : d.values) v = 3.5;
      break;
  }
  for (double& v : d.values) v = static_cast<float>(v);
  return d;
}

Metrics evaluate(const Dataset& original, std::span<const double> reconstructed, std::size_t container_bytes,
                 double compress_seconds, double decompress_seconds) {
  if (original.values.size() != reconstructed.size()) {
    throw Error(ErrorKind::DimensionMismatch, "reconstruction size differs from original");
  }
  Metrics m;
  const double bytes = static_cast<double>(original.byte_size());
  m.compression_ratio = bytes > 0 ? static_cast<double>(container_bytes) / bytes : 0.0;
  double sum = 0.0;
  std::size_t nonzero = 0;
  for (std::size_t i = 0; i < reconstructed.size(); ++i) {
    const double x = original.values[i];
    const double y = reconstructed[i];
    if (x == 0.0) {
      if (y != 0.0) m.zeros_exact = false;
      continue;
    }
    if ((x > 0) != (y > 0)) m.signs_preserved = false;
    const double e = std::fabs(y - x) / std::fabs(x);
    m.max_rel_error = std::max(m.max_rel_error, e);
    sum += e;
    ++nonzero;
  }
  m.mean_rel_error = nonzero ? sum / static_cast<double>(nonzero) : 0.0;
  const double mb = bytes / 1e6;
  m.compress_mbps = compress_seconds > 0 ? mb / compress_seconds : 0.0;
  m.decompress_mbps = decompress_seconds > 0 ? mb / decompress_seconds : 0.0;
  return m;
}

std::string metrics_csv_header() { return "dataset,b_r,CR,max_rel_err,mean_rel_err,c_MBps,d_MBps"; }

std::string metrics_csv_row(std::string_view dataset, double b_r, const Metrics& m) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%.*s,%g,%.6f,%.6e,%.6e,%.3f,%.3f", static_cast<int>(dataset.size()),
                dataset.data(), b_r, m.compression_ratio, m.max_rel_error, m.mean_rel_error, m.compress_mbps,
                m.decompress_mbps);
  return buf;
}

}  // namespace permez
