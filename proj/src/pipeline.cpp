#include "permez/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "permez/error.hpp"
#include "permez/parallel.hpp"

namespace permez {

BlockExtent BlockLayout::block(std::size_t index) const noexcept {
  const std::size_t br = index / blocks_across();
  const std::size_t bc = index % blocks_across();
  BlockExtent e;
  e.row0 = br * block_rows;
  e.col0 = bc * block_cols;
  e.rows = std::min(block_rows, rows - e.row0);
  e.cols = std::min(block_cols, cols - e.col0);
  return e;
}

void BlockLayout::validate() const {
  if (block_rows == 0 || block_cols == 0 || partition_rows == 0) {
    throw Error(ErrorKind::InvalidArgument, "block and partition sizes must be positive");
  }
}

std::vector<double> extract_block(std::span<const double> data, const BlockLayout& layout, const BlockExtent& e) {
  std::vector<double> out(e.rows * e.cols);
  for (std::size_t r = 0; r < e.rows; ++r) {
    const auto src = data.subspan((e.row0 + r) * layout.cols + e.col0, e.cols);
    std::copy(src.begin(), src.end(), out.begin() + static_cast<std::ptrdiff_t>(r * e.cols));
  }
  return out;
}

void store_block(std::span<double> data, const BlockLayout& layout, const BlockExtent& e,
                 std::span<const double> block) {
  for (std::size_t r = 0; r < e.rows; ++r) {
    const auto src = block.subspan(r * e.cols, e.cols);
    std::copy(src.begin(), src.end(), data.begin() + static_cast<std::ptrdiff_t>((e.row0 + r) * layout.cols + e.col0));
  }
}

bool operator==(const CompressedBlock& a, const CompressedBlock& b) {
  if (a.trivial != b.trivial) return false;
  if (a.trivial) return true;
  return a.params.factor_pos == b.params.factor_pos && a.params.factor_neg == b.params.factor_neg &&
         a.params.b_r == b.params.b_r && a.partitions == b.partitions && a.balance_values == b.balance_values &&
         a.code_bits == b.code_bits;
}

double prediction_origin(const TransformParams& p) noexcept { return 2.0 * p.log2_factor_pos - 1.0; }

PreparedBlock prepare_block(const BlockView& block, double b_r, ElementType type) {
  const double eps0 = epsilon0(type);
  const BlockStats stats = compute_block_stats(block.data, zero_floor(eps0, b_r));
  PreparedBlock out;
  if (stats.nonzero_count == 0) {
    out.trivial = true;
    return out;
  }
  out.params = make_transform_params(stats, b_r, eps0);
  out.origin = prediction_origin(out.params);
  out.mapped.resize(block.data.size());
  out.predictor.resize(block.data.size());
  for (std::size_t i = 0; i < block.data.size(); ++i) {
    out.mapped[i] = forward_map(block.data[i], out.params);
    out.predictor[i] = out.mapped[i] - out.origin;
  }
  return out;
}

double restore_value(double mapped, const TransformParams& p, ElementType type) noexcept {
  const double x = inverse_map(mapped, p);
  return type == ElementType::Float32 ? static_cast<double>(static_cast<float>(x)) : x;
}

bool within_bound(double x, double recon, const TransformParams& p) noexcept {
  if (std::fabs(x) <= p.zero_floor) return recon == 0.0;
  return std::fabs(recon - x) <= kErrorTolerance * p.b_r * std::fabs(x);
}

PartitionCodes code_partition(const PreparedBlock& prepared, const BlockView& block, std::size_t partition,
                              const Codec& codec, bool repair) {
  const std::size_t cols = block.cols;
  const std::size_t r0 = block.partition_begin(partition);
  const std::size_t r1 = block.partition_end(partition);
  const std::span<const double> truth = prepared.predictor;
  const std::size_t first = r0 * cols;

  PartitionCodes pc;
  pc.anchor = prepared.mapped[first];
  pc.codes.reserve((r1 - r0) * cols - 1);

  // Reconstructed prediction-space values, only tracked when repairing.
  std::vector<double> recon;
  if (repair) {
    recon.assign(prepared.predictor.size(), 0.0);
    recon[first] = truth[first];
  }

  for (std::size_t r = r0; r < r1; ++r) {
    for (std::size_t c = (r == r0 ? 1 : 0); c < cols; ++c) {
      const std::size_t i = r * cols + c;
      const double pred = predict(codec.model, gather_surface(truth, cols, r0, r, c));
      std::uint32_t code = quantize(truth[i] - pred, codec.quantizer);
      if (repair && code != kBalanceCode) {
        const double sim_pred = predict(codec.model, gather_surface(recon, cols, r0, r, c));
        const double sim = sim_pred + dequantize(code, codec.quantizer);
        const double restored = restore_value(sim + prepared.origin, prepared.params, codec.type);
        if (within_bound(block.data[i], restored, prepared.params)) {
          recon[i] = sim;
        } else {
          code = kBalanceCode;
          ++pc.repairs;
        }
      }
      if (code == kBalanceCode) {
        pc.balance_values.push_back(prepared.mapped[i]);
        if (repair) recon[i] = truth[i];
      }
      pc.codes.push_back(code);
    }
  }
  return pc;
}

void reconstruct_partition(const PartitionCodes& pc, std::size_t cols, std::size_t row_begin,
                           std::size_t row_end, double origin, const Codec& codec, std::span<double> out) {
  // `work` holds prediction-space values; `out` receives absolute-domain
  // values, with raw-stored elements copied bit-exactly.
  std::vector<double> work(row_end * cols, 0.0);
  const std::size_t first = row_begin * cols;
  work[first] = pc.anchor - origin;
  out[first] = pc.anchor;
  std::size_t next_code = 0;
  std::size_t next_balance = 0;
  for (std::size_t r = row_begin; r < row_end; ++r) {
    for (std::size_t c = (r == row_begin ? 1 : 0); c < cols; ++c) {
      const std::size_t i = r * cols + c;
      const std::uint32_t code = pc.codes[next_code++];
      if (code == kBalanceCode) {
        if (next_balance >= pc.balance_values.size()) {
          throw Error(ErrorKind::BalanceUnderflow, "more balance flags than stored values");
        }
        out[i] = pc.balance_values[next_balance++];
        work[i] = out[i] - origin;
      } else {
        work[i] = predict(codec.model, gather_surface(work, cols, row_begin, r, c)) +
                  dequantize(code, codec.quantizer);
        out[i] = work[i] + origin;
      }
    }
  }
}

CompressedBlock assemble_block(const PreparedBlock& prepared, std::span<const PartitionCodes> parts,
                               const HuffmanCodebook& book) {
  CompressedBlock cb;
  if (prepared.trivial) {
    cb.trivial = true;
    return cb;
  }
  cb.params = prepared.params;
  BitStream stream;
  for (const PartitionCodes& pc : parts) {
    PartitionRecord rec;
    rec.bit_offset = stream.bit_len();
    rec.anchor = pc.anchor;
    encode(pc.codes, book, stream);
    rec.bit_len = stream.bit_len() - rec.bit_offset;
    stream.align();
    cb.partitions.push_back(rec);
    cb.balance_values.insert(cb.balance_values.end(), pc.balance_values.begin(), pc.balance_values.end());
  }
  cb.code_bits = stream.bytes();
  cb.code_bits.resize(stream.bit_len() / 8);
  return cb;
}

CompressedBlock compress_block(const BlockView& block, const Codec& codec, int workers) {
  const PreparedBlock prepared = prepare_block(block, codec.b_r, codec.type);
  if (prepared.trivial) return assemble_block(prepared, {}, codec.codebook);
  std::vector<PartitionCodes> parts(block.partition_count());
  parallel_for(parts.size(), workers,
               [&](std::size_t p) { parts[p] = code_partition(prepared, block, p, codec, false); });
  return assemble_block(prepared, parts, codec.codebook);
}

std::vector<PartitionCodes> decode_partitions(const CompressedBlock& cb, std::size_t rows, std::size_t cols,
                                              std::size_t partition_rows, const HuffmanCodebook& book) {
  const std::size_t count = (rows + partition_rows - 1) / partition_rows;
  if (cb.partitions.size() != count) throw Error(ErrorKind::Corrupt, "partition table size mismatch");
  std::vector<PartitionCodes> parts(count);
  std::size_t balance_cursor = 0;
  for (std::size_t p = 0; p < count; ++p) {
    const PartitionRecord& rec = cb.partitions[p];
    if (rec.bit_offset % 8 != 0 || rec.bit_offset / 8 > cb.code_bits.size()) {
      throw Error(ErrorKind::Corrupt, "partition offset outside the code payload");
    }
    const auto bytes = std::span(cb.code_bits).subspan(rec.bit_offset / 8);
    BitReader reader(bytes, rec.bit_len);
    const std::size_t n = (std::min(rows, (p + 1) * partition_rows) - p * partition_rows) * cols - 1;
    PartitionCodes& pc = parts[p];
    pc.anchor = rec.anchor;
    pc.codes.resize(n);
    std::size_t zeros = 0;
    for (std::size_t k = 0; k < n; ++k) {
      pc.codes[k] = reader.decode_next(book);
      zeros += pc.codes[k] == kBalanceCode;
    }
    if (!reader.at_end()) throw Error(ErrorKind::Corrupt, "partition stream has trailing bits");
    if (balance_cursor + zeros > cb.balance_values.size()) {
      throw Error(ErrorKind::BalanceUnderflow, "more balance flags than stored values");
    }
    pc.balance_values.assign(cb.balance_values.begin() + static_cast<std::ptrdiff_t>(balance_cursor),
                             cb.balance_values.begin() + static_cast<std::ptrdiff_t>(balance_cursor + zeros));
    balance_cursor += zeros;
  }
  if (balance_cursor != cb.balance_values.size()) {
    throw Error(ErrorKind::Corrupt, "balance value count does not match balance flags");
  }
  return parts;
}

std::vector<double> decompress_block(const CompressedBlock& cb, std::size_t rows, std::size_t cols,
                                     std::size_t partition_rows, const Codec& codec, int workers,
                                     std::span<const std::size_t> order) {
  std::vector<double> out(rows * cols, 0.0);
  if (cb.trivial) return out;
  const std::vector<PartitionCodes> parts = decode_partitions(cb, rows, cols, partition_rows, codec.codebook);
  const double origin = prediction_origin(cb.params);
  std::vector<double> mapped(rows * cols, 0.0);
  auto run = [&](std::size_t p) {
    const std::size_t r0 = p * partition_rows;
    const std::size_t r1 = std::min(rows, r0 + partition_rows);
    reconstruct_partition(parts[p], cols, r0, r1, origin, codec, mapped);
  };
  if (!order.empty()) {
    if (order.size() != parts.size()) throw Error(ErrorKind::InvalidArgument, "partition order has wrong length");
    for (std::size_t p : order) run(p);
  } else {
    parallel_for(parts.size(), workers, run);
  }
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = restore_value(mapped[i], cb.params, codec.type);
  return out;
}

CompressedBlock verify_and_repair(const BlockView& block, const CompressedBlock& cb, const Codec& codec) {
  if (cb.trivial) return cb;
  PreparedBlock prepared = prepare_block(block, codec.b_r, codec.type);
  if (prepared.trivial) throw Error(ErrorKind::InvalidArgument, "block does not match its compressed record");
  // Keep the parameters the record was written with.
  prepared.params = cb.params;
  prepared.origin = prediction_origin(cb.params);
  for (std::size_t i = 0; i < block.data.size(); ++i) {
    prepared.mapped[i] = forward_map(block.data[i], cb.params);
    prepared.predictor[i] = prepared.mapped[i] - prepared.origin;
  }

  std::vector<PartitionCodes> parts = decode_partitions(cb, block.rows, block.cols, block.partition_rows, codec.codebook);
  bool changed = false;
  for (std::size_t p = 0; p < parts.size(); ++p) {
    PartitionCodes& pc = parts[p];
    const std::size_t r0 = block.partition_begin(p);
    const std::size_t r1 = block.partition_end(p);
    std::vector<double> recon(block.rows * block.cols, 0.0);
    std::vector<double> mapped(block.rows * block.cols, 0.0);
    std::vector<double> balance;
    balance.reserve(pc.balance_values.size());
    std::size_t next_balance = 0;
    const std::size_t first = r0 * block.cols;
    recon[first] = pc.anchor - prepared.origin;
    std::size_t k = 0;
    for (std::size_t r = r0; r < r1; ++r) {
      for (std::size_t c = (r == r0 ? 1 : 0); c < block.cols; ++c, ++k) {
        const std::size_t i = r * block.cols + c;
        std::uint32_t& code = pc.codes[k];
        if (code != kBalanceCode) {
          const double sim = predict(codec.model, gather_surface(recon, block.cols, r0, r, c)) +
                             dequantize(code, codec.quantizer);
          const double restored = restore_value(sim + prepared.origin, prepared.params, codec.type);
          if (within_bound(block.data[i], restored, prepared.params)) {
            recon[i] = sim;
            continue;
          }
          code = kBalanceCode;
          ++pc.repairs;
          changed = true;
          balance.push_back(prepared.mapped[i]);
        } else {
          balance.push_back(pc.balance_values[next_balance++]);
        }
        recon[i] = balance.back() - prepared.origin;
      }
    }
    pc.balance_values = std::move(balance);
  }
  if (!changed) return cb;
  return assemble_block(prepared, parts, codec.codebook);
}

double max_relative_error(std::span<const double> original, std::span<const double> recon) {
  if (original.size() != recon.size()) throw Error(ErrorKind::DimensionMismatch, "array sizes differ");
  double worst = 0.0;
  for (std::size_t i = 0; i < original.size(); ++i) {
    const double x = original[i];
    if (x == 0.0) {
      if (recon[i] != 0.0) return std::numeric_limits<double>::infinity();
      continue;
    }
    const double e = std::fabs(recon[i] - x) / std::fabs(x);
    if (!(e <= worst)) worst = std::isnan(e) ? std::numeric_limits<double>::infinity() : e;
  }
  return worst;
}

}  // namespace permez
