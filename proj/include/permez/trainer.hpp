#pragma once

// Inline training of the predictor on a sample of the data being compressed.
//
// Training units are row tiles of the grid (partition_rows x block_cols),
// each treated as a one-partition block with its own transform parameters.
// Every hyperparameter configuration trains for one pass over the training
// tiles, then runs a simulated compress/decompress on the validation tiles.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "permez/error.hpp"
#include "permez/huffman.hpp"
#include "permez/pipeline.hpp"
#include "permez/predictor.hpp"
#include "permez/quantizer.hpp"

namespace permez {

inline constexpr double kDefaultSampleRate = 0.10;
inline constexpr double kDefaultCoverageTarget = 0.99;
inline constexpr std::size_t kTrainBatchSize = 1024;
inline constexpr std::size_t kMinTrainingTiles = 10;

struct HyperConfig {
  double lr = 1e-3;
  double l2 = 0.0;
  friend bool operator==(const HyperConfig&, const HyperConfig&) = default;
};

// {lr: 1e-3, 1e-4} x {l2: 0, 1e-4, 1e-2}
std::vector<HyperConfig> default_grid();

struct ValidationReport {
  double compression_ratio = 0.0;  // compressed bytes / original bytes
  double max_rel_error = 0.0;
  double coverage = 0.0;
  int chosen_m = 0;
};

// An owned block used for training or validation.
struct BlockSample {
  std::vector<double> data;
  std::size_t rows = 0;
  std::size_t cols = 0;

  BlockView view() const { return BlockView{data, rows, cols, rows}; }
};

// ceil(rate * n) indices, at least min(min_count, n). rate == 1 keeps the
// original order; otherwise a seeded shuffle picks the subset. Throws
// EmptyDataset and InvalidArgument.
std::vector<std::size_t> sample_training_blocks(std::size_t block_count, double rate, std::uint64_t seed,
                                                std::size_t min_count = 1);

// First ceil(0.8 k) train, the rest validate. Throws TooFewBlocks for k < 5.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_train_validation(
    std::span<const std::size_t> samples);

// Cuts the grid into row tiles of `tile_rows` x `tile_cols`.
std::vector<BlockSample> make_tiles(std::span<const double> data, std::size_t rows, std::size_t cols,
                                    std::size_t tile_rows, std::size_t tile_cols);

// One pass over every non-anchor element of the training blocks in
// mini-batches of kTrainBatchSize, starting from init_model().
PerceptronModel train_one_pass(std::span<const BlockSample> train, const HyperConfig& config, double b_r,
                               ElementType type);

// Prediction residuals (true-value prediction) over all non-anchor elements.
std::vector<double> validation_residuals(const PerceptronModel& model, std::span<const BlockSample> blocks,
                                         double b_r, ElementType type);

double coverage(std::span<const double> residuals, const QuantizerSpec& spec);

// Smallest m in [4, 16] whose coverage meets the target, else 16.
int select_m(std::span<const double> residuals, double b_a, double coverage_target);

// Averaged per-block code histograms (balance points included), floored at 1.
FrequencyTable code_frequencies(const PerceptronModel& model, std::span<const BlockSample> blocks,
                                const QuantizerSpec& quantizer, double b_r, ElementType type);

HuffmanCodebook estimate_codebook(const PerceptronModel& model, std::span<const BlockSample> blocks,
                                  const QuantizerSpec& quantizer, double b_r, ElementType type);

// Compresses and decompresses the blocks with a codebook estimated on them.
ValidationReport simulate_roundtrip(const PerceptronModel& model, std::span<const BlockSample> blocks, double b_r,
                                    int m, ElementType type);

struct SweepEntry {
  HyperConfig config;
  std::optional<PerceptronModel> model;  // empty when training diverged
  std::optional<ErrorKind> failure;
  ValidationReport report;
};

std::vector<SweepEntry> sweep(std::span<const BlockSample> train, std::span<const BlockSample> validation,
                              std::span<const HyperConfig> configs, double b_r, double coverage_target,
                              ElementType type, int workers = 1);

struct TrainingOutcome {
  PerceptronModel model;
  HuffmanCodebook codebook;
  QuantizerSpec quantizer;
  ValidationReport report;
  HyperConfig config;
  bool fallback = false;  // init model used because nothing else qualified
};

// Among entries with a model and max_rel_error <= 1.5 b_r: lowest
// compression ratio, then smaller l2, then smaller lr. Returns the index.
// Throws SweepExhausted.
std::size_t select_best(std::span<const SweepEntry> entries, double b_r);

struct TrainerConfig {
  double b_r = 1e-3;
  double sample_rate = kDefaultSampleRate;
  double coverage_target = kDefaultCoverageTarget;
  std::vector<HyperConfig> grid = default_grid();
  std::uint64_t seed = 0;
  int workers = 1;
  std::optional<PerceptronModel> preset_model;  // skip the sweep, fit m and codebook only
};

// Full training flow over a grid: tiles, sampling, split, sweep, selection,
// codebook. Falls back to init_model when no sweep entry qualifies or too few
// tiles exist to split.
TrainingOutcome train(std::span<const double> data, const BlockLayout& layout, ElementType type,
                      const TrainerConfig& config);

}  // namespace permez
