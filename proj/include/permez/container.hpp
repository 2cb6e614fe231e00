#pragma once

// Self-describing compressed file format. All multi-byte fields are
// little-endian:
//
//   "PMEZ" | version u16 | element type u8 | rows u64 | cols u64
//   | block rows u32 | block cols u32 | partition rows u32
//   | b_r f64 | coverage target f64 | m u8
//   | model length u64 | model bytes | codebook length u64 | codebook bytes
//   | block count u64 | block records...
//
// Block record: trivial u8 | factor_pos f64 | factor_neg f64, then for
// non-trivial blocks one (bit offset u64, bit length u64, anchor f64) entry
// per partition, balance count u64, balance values f64..., and the
// byte-aligned code payload whose size follows from the last partition entry.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "permez/huffman.hpp"
#include "permez/pipeline.hpp"
#include "permez/predictor.hpp"
#include "permez/transform.hpp"

namespace permez {

inline constexpr std::uint16_t kContainerVersion = 1;

struct Container {
  ElementType type = ElementType::Float32;
  BlockLayout layout;
  double b_r = 0.0;
  double coverage_target = 0.0;
  int m = kMinCodeBits;
  PerceptronModel model;
  HuffmanCodebook codebook;
  std::vector<CompressedBlock> blocks;

  Codec codec() const;
  friend bool operator==(const Container&, const Container&) = default;
};

std::vector<std::uint8_t> write_container(const Container& c);

// Throws BadMagic, UnsupportedVersion or Corrupt. Code streams are decoded
// during validation, so a container that reads cleanly also decodes cleanly.
Container read_container(std::span<const std::uint8_t> bytes);

// Serialized size of one block record.
std::size_t block_record_size(const CompressedBlock& cb);

}  // namespace permez
