#pragma once

// Canonical Huffman coding over quantization codes.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace permez {

inline constexpr int kMaxCodeLength = 48;

// Non-negative weight per symbol, indexed by symbol.
using FrequencyTable = std::vector<double>;

class HuffmanCodebook {
 public:
  HuffmanCodebook() = default;

  // Builds the canonical code for the given lengths (0 = unassigned). Throws
  // InvalidArgument unless the assigned lengths satisfy Kraft equality.
  static HuffmanCodebook from_lengths(std::vector<std::uint8_t> lengths);

  std::size_t alphabet_size() const noexcept { return lengths_.size(); }
  const std::vector<std::uint8_t>& lengths() const noexcept { return lengths_; }
  std::uint8_t length(std::uint32_t symbol) const noexcept {
    return symbol < lengths_.size() ? lengths_[symbol] : 0;
  }
  std::uint64_t codeword(std::uint32_t symbol) const noexcept { return codewords_[symbol]; }
  bool empty() const noexcept { return lengths_.empty(); }

  friend bool operator==(const HuffmanCodebook& a, const HuffmanCodebook& b) { return a.lengths_ == b.lengths_; }

 private:
  friend class BitReader;

  std::vector<std::uint8_t> lengths_;
  std::vector<std::uint64_t> codewords_;
  // Canonical decoding tables, indexed by code length.
  std::vector<std::uint64_t> first_code_;
  std::vector<std::uint32_t> first_index_;
  std::vector<std::uint32_t> count_;
  std::vector<std::uint32_t> sorted_symbols_;
  int max_length_ = 0;
};

// Optimal prefix code, ties broken by symbol index. Zero-weight symbols stay
// unassigned. A table with a single weighted symbol yields a 1-bit code over
// that symbol and the lowest other index. Throws DegenerateAlphabet when fewer
// than two symbols exist or none has weight.
HuffmanCodebook build_codebook(const FrequencyTable& freqs);

std::vector<std::uint8_t> serialize_codebook(const HuffmanCodebook& book);
HuffmanCodebook deserialize_codebook(std::span<const std::uint8_t> bytes);

// MSB-first within each byte; pad bits are zero.
class BitStream {
 public:
  void write_bits(std::uint64_t bits, int count);
  // Pads with zero bits up to the next byte boundary.
  void align();

  const std::vector<std::uint8_t>& bytes() const noexcept { return bytes_; }
  std::uint64_t bit_len() const noexcept { return bit_len_; }

 private:
  std::vector<std::uint8_t> bytes_;
  std::uint64_t bit_len_ = 0;
};

// Throws UnassignedCode for symbols without a codeword.
void encode(std::span<const std::uint32_t> codes, const HuffmanCodebook& book, BitStream& sink);

class BitReader {
 public:
  // Throws TruncatedStream if bit_len exceeds the available bytes.
  BitReader(std::span<const std::uint8_t> bytes, std::uint64_t bit_len);

  // Throws TruncatedStream or InvalidPrefix.
  std::uint32_t decode_next(const HuffmanCodebook& book);
  std::uint64_t position() const noexcept { return pos_; }
  bool at_end() const noexcept { return pos_ == bit_len_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::uint64_t bit_len_;
  std::uint64_t pos_ = 0;
};

}  // namespace permez
