#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "permez/transform.hpp"

namespace permez {

struct Dataset {
  std::vector<double> values;  // row-major
  std::size_t rows = 0;
  std::size_t cols = 0;
  ElementType type = ElementType::Float32;
  std::string source;

  std::size_t byte_size() const noexcept { return values.size() * element_width(type); }
};

enum class Endian { Little, Big };

// IBM System/360 single precision to IEEE-754 binary32 (round to nearest).
float ibm_to_ieee(std::uint32_t word) noexcept;

// Fixed-length traces, one per row. Sample format 1 (IBM float) or 5 (IEEE
// float). Throws Io, UnsupportedFormatCode, TruncatedFile,
// InconsistentTraceLength, NonFiniteInput.
Dataset read_segy(const std::filesystem::path& path);
Dataset parse_segy(std::span<const std::uint8_t> bytes);

// Throws Io, EmptyDataset, SizeMismatch, NonFiniteInput.
Dataset read_raw(const std::filesystem::path& path, std::size_t rows, std::size_t cols, ElementType type,
                 Endian endian = Endian::Little);
void write_raw(const std::filesystem::path& path, std::span<const double> values, ElementType type,
               Endian endian = Endian::Little);

enum class FieldKind { Sine2d, GaussianField, WhiteNoise, Constant };

FieldKind parse_field_kind(std::string_view name);  // throws InvalidArgument
std::string_view to_string(FieldKind kind) noexcept;

// Synthetic float32 fields:
//   sine2d        sin(2 pi r / rows) * sin(2 pi c / cols) + 2
//   gaussian      white Gaussian noise smoothed by a separable Gaussian
//                 kernel, unit variance, both signs
//   white-noise   uniform in [-1, 1)
//   constant      every element 3.5
Dataset generate(FieldKind kind, std::size_t rows, std::size_t cols, std::uint64_t seed);

struct Metrics {
  double compression_ratio = 0.0;  // compressed bytes / original bytes
  double max_rel_error = 0.0;      // over nonzero originals
  double mean_rel_error = 0.0;
  bool zeros_exact = true;
  bool signs_preserved = true;
  double compress_mbps = 0.0;  // original MB / seconds
  double decompress_mbps = 0.0;
};

// Throws DimensionMismatch.
Metrics evaluate(const Dataset& original, std::span<const double> reconstructed, std::size_t container_bytes,
                 double compress_seconds, double decompress_seconds);

std::string metrics_csv_header();
std::string metrics_csv_row(std::string_view dataset, double b_r, const Metrics& m);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace permez
