#pragma once

// Block compression and decompression.
//
// A dataset is cut into blocks; each block is cut into row bands
// (partitions). Compression predicts every element from the true values of
// its causal neighbors inside the same partition, so partitions are coded
// independently and in parallel. Decompression predicts from reconstructed
// neighbors, sequentially within a partition and in parallel across them.
// The first element of every partition is stored raw as its anchor.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "permez/huffman.hpp"
#include "permez/predictor.hpp"
#include "permez/quantizer.hpp"
#include "permez/transform.hpp"

namespace permez {

// Reconstructions must satisfy |x' - x| <= kErrorTolerance * b_r * |x|.
inline constexpr double kErrorTolerance = 1.5;

struct BlockExtent {
  std::size_t row0 = 0;
  std::size_t col0 = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
};

struct BlockLayout {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t block_rows = 256;
  std::size_t block_cols = 256;
  std::size_t partition_rows = 32;

  std::size_t blocks_down() const noexcept { return (rows + block_rows - 1) / block_rows; }
  std::size_t blocks_across() const noexcept { return (cols + block_cols - 1) / block_cols; }
  std::size_t block_count() const noexcept { return rows && cols ? blocks_down() * blocks_across() : 0; }
  BlockExtent block(std::size_t index) const noexcept;
  std::size_t partition_count(std::size_t rows_in_block) const noexcept {
    return (rows_in_block + partition_rows - 1) / partition_rows;
  }

  // Throws InvalidArgument on zero block or partition sizes.
  void validate() const;
  friend bool operator==(const BlockLayout&, const BlockLayout&) = default;
};

// Copies a block out of a row-major dataset.
std::vector<double> extract_block(std::span<const double> data, const BlockLayout& layout, const BlockExtent& e);
void store_block(std::span<double> data, const BlockLayout& layout, const BlockExtent& e,
                 std::span<const double> block);

// Row-major block with its partitioning.
struct BlockView {
  std::span<const double> data;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t partition_rows = 0;

  std::size_t partition_count() const noexcept { return (rows + partition_rows - 1) / partition_rows; }
  std::size_t partition_begin(std::size_t p) const noexcept { return p * partition_rows; }
  std::size_t partition_end(std::size_t p) const noexcept { return std::min(rows, (p + 1) * partition_rows); }
};

// Everything needed to code a block besides the block itself. The codebook
// may be empty when only quantization codes are produced.
struct Codec {
  PerceptronModel model;
  QuantizerSpec quantizer;
  HuffmanCodebook codebook;
  double b_r = 0.0;
  ElementType type = ElementType::Float64;
};

struct PartitionRecord {
  std::uint64_t bit_offset = 0;
  std::uint64_t bit_len = 0;
  double anchor = 0.0;  // absolute-domain value of the partition's first element
  friend bool operator==(const PartitionRecord&, const PartitionRecord&) = default;
};

struct CompressedBlock {
  bool trivial = false;
  TransformParams params;
  std::vector<PartitionRecord> partitions;
  // Absolute-domain values for every code-0 symbol, in partition then raster order.
  std::vector<double> balance_values;
  std::vector<std::uint8_t> code_bits;
};

bool operator==(const CompressedBlock& a, const CompressedBlock& b);

// Transform parameters and prediction-space values of one block.
//
// The predictor sees absolute-domain values shifted by `origin`
// (= log2(abs_min * factor_pos) - 1), which places every nonzero value at
// >= 1 and keeps the Lorenzo-initialized network on its linear branch.
struct PreparedBlock {
  bool trivial = false;
  TransformParams params;
  double origin = 0.0;
  std::vector<double> mapped;     // absolute-domain values
  std::vector<double> predictor;  // mapped - origin
};

double prediction_origin(const TransformParams& p) noexcept;

// Throws NonFiniteInput.
PreparedBlock prepare_block(const BlockView& block, double b_r, ElementType type);

// Neighbor surface (west, north, northwest) of element (r, c) read from a
// row-major buffer; neighbors outside [row_begin, ...) or column 0 read as 0.
inline Surface gather_surface(std::span<const double> values, std::size_t cols, std::size_t row_begin,
                              std::size_t r, std::size_t c) noexcept {
  const std::size_t i = r * cols + c;
  const bool has_west = c > 0;
  const bool has_north = r > row_begin;
  return {has_west ? values[i - 1] : 0.0, has_north ? values[i - cols] : 0.0,
          has_west && has_north ? values[i - cols - 1] : 0.0};
}

// Quantization output of one partition before entropy coding.
struct PartitionCodes {
  double anchor = 0.0;
  std::vector<std::uint32_t> codes;  // one per element after the anchor
  std::vector<double> balance_values;
  std::size_t repairs = 0;
};

// Quantization codes from true-value prediction. With `repair`, decompression
// is simulated alongside and every element whose reconstruction would break
// the error bound becomes a balance point. Converting the earliest violation
// first and re-simulating is equivalent to this single pass because an
// element's reconstruction depends only on earlier elements.
PartitionCodes code_partition(const PreparedBlock& prepared, const BlockView& block, std::size_t partition,
                              const Codec& codec, bool repair);

// Reconstructed absolute-domain values of one partition (rows
// [partition_begin, partition_end) of the block), written into `out`.
// Throws BalanceUnderflow when the codes reference more balance values than given.
void reconstruct_partition(const PartitionCodes& pc, std::size_t cols, std::size_t row_begin,
                           std::size_t row_end, double origin, const Codec& codec, std::span<double> out);

// Rounds to the element type and inverse-maps.
double restore_value(double mapped, const TransformParams& p, ElementType type) noexcept;

// Whether reconstruction `recon` is acceptable for original `x`.
bool within_bound(double x, double recon, const TransformParams& p) noexcept;

CompressedBlock compress_block(const BlockView& block, const Codec& codec, int workers = 1);

// Decodes the code stream of each partition. Throws TruncatedStream, Corrupt
// or BalanceUnderflow for inconsistent input.
std::vector<PartitionCodes> decode_partitions(const CompressedBlock& cb, std::size_t rows, std::size_t cols,
                                              std::size_t partition_rows, const HuffmanCodebook& book);

// `order` optionally fixes the sequence in which partitions are processed
// (single-threaded); the output does not depend on it.
std::vector<double> decompress_block(const CompressedBlock& cb, std::size_t rows, std::size_t cols,
                                     std::size_t partition_rows, const Codec& codec, int workers = 1,
                                     std::span<const std::size_t> order = {});

// Re-simulates decompression of `cb` against the original block and turns
// violating elements into balance points.
CompressedBlock verify_and_repair(const BlockView& block, const CompressedBlock& cb, const Codec& codec);

// Entropy-codes partitions into a block record.
CompressedBlock assemble_block(const PreparedBlock& prepared, std::span<const PartitionCodes> parts,
                               const HuffmanCodebook& book);

// Maximum relative error over nonzero originals; +inf if a zero original
// reconstructs nonzero or a sign flips.
double max_relative_error(std::span<const double> original, std::span<const double> recon);

}  // namespace permez
