#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "permez/container.hpp"
#include "permez/trainer.hpp"

namespace permez {

struct CompressConfig {
  BlockLayout layout;  // rows and cols are taken from the input
  TrainerConfig trainer;
};

struct CompressResult {
  Container container;
  TrainingOutcome training;
  std::size_t balance_points = 0;
  std::size_t repairs = 0;
};

// Trains inline, then codes every block with verification. The output is
// identical for any worker count.
CompressResult compress(std::span<const double> data, std::size_t rows, std::size_t cols, ElementType type,
                        const CompressConfig& config);

// Codes every block with a fixed codec (no training).
std::vector<CompressedBlock> compress_blocks(std::span<const double> data, const BlockLayout& layout,
                                             const Codec& codec, int workers, std::size_t* repairs = nullptr);

std::vector<double> decompress(const Container& container, int workers = 1);

}  // namespace permez
