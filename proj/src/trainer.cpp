#include "permez/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "permez/container.hpp"
#include "permez/parallel.hpp"

namespace permez {

std::vector<HyperConfig> default_grid() {
  std::vector<HyperConfig> grid;
  for (double lr : {1e-3, 1e-4})
    for (double l2 : {0.0, 1e-4, 1e-2}) grid.push_back({lr, l2});
  return grid;
}

std::vector<std::size_t> sample_training_blocks(std::size_t block_count, double rate, std::uint64_t seed,
                                                std::size_t min_count) {
  if (block_count == 0) throw Error(ErrorKind::EmptyDataset, "no blocks to sample");
  if (!(rate > 0.0 && rate <= 1.0)) throw Error(ErrorKind::InvalidArgument, "sample rate must lie in (0, 1]");
  std::vector<std::size_t> idx(block_count);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  if (rate == 1.0) return idx;
  auto k = static_cast<std::size_t>(std::ceil(rate * static_cast<double>(block_count)));
  k = std::min(block_count, std::max(k, min_count));
  // Fisher-Yates on raw mt19937_64 output; the distribution adapters are not
  // portable across standard libraries.
  std::mt19937_64 rng(seed);
  for (std::size_t i = block_count - 1; i > 0; --i) {
    std::swap(idx[i], idx[rng() % (i + 1)]);
  }
  idx.resize(k);
  return idx;
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_train_validation(
    std::span<const std::size_t> samples) {
  if (samples.size() < 5) throw Error(ErrorKind::TooFewBlocks, "need at least 5 sampled blocks");
  const auto n_train = static_cast<std::size_t>(std::ceil(0.8 * static_cast<double>(samples.size())));
  return {{samples.begin(), samples.begin() + static_cast<std::ptrdiff_t>(n_train)},
          {samples.begin() + static_cast<std::ptrdiff_t>(n_train), samples.end()}};
}

std::vector<BlockSample> make_tiles(std::span<const double> data, std::size_t rows, std::size_t cols,
                                    std::size_t tile_rows, std::size_t tile_cols) {
  BlockLayout layout{rows, cols, tile_rows, tile_cols, tile_rows};
  std::vector<BlockSample> tiles;
  tiles.reserve(layout.block_count());
  for (std::size_t b = 0; b < layout.block_count(); ++b) {
    const BlockExtent e = layout.block(b);
    tiles.push_back({extract_block(data, layout, e), e.rows, e.cols});
  }
  return tiles;
}

namespace {

// Calls fn(surface, target) for every non-anchor element of a prepared
// one-partition block, in raster order.
template <typename Fn>
void for_each_sample(const PreparedBlock& prepared, const BlockSample& block, Fn&& fn) {
  const std::span<const double> u = prepared.predictor;
  for (std::size_t r = 0; r < block.rows; ++r) {
    for (std::size_t c = (r == 0 ? 1 : 0); c < block.cols; ++c) {
      fn(gather_surface(u, block.cols, 0, r, c), u[r * block.cols + c]);
    }
  }
}

}  // namespace

PerceptronModel train_one_pass(std::span<const BlockSample> train, const HyperConfig& config, double b_r,
                               ElementType type) {
  PerceptronModel model = init_model();
  TrainBatch batch;
  auto flush = [&] {
    if (batch.surfaces.empty()) return;
    model = train_step(model, batch, config.lr, config.l2).model;
    batch.surfaces.clear();
    batch.targets.clear();
  };
  for (const BlockSample& block : train) {
    const PreparedBlock prepared = prepare_block(block.view(), b_r, type);
    if (prepared.trivial) continue;
    for_each_sample(prepared, block, [&](const Surface& s, double target) {
      batch.surfaces.push_back(s);
      batch.targets.push_back(target);
      if (batch.surfaces.size() == kTrainBatchSize) flush();
    });
  }
  flush();
  return model;
}

std::vector<double> validation_residuals(const PerceptronModel& model, std::span<const BlockSample> blocks,
                                         double b_r, ElementType type) {
  std::vector<double> out;
  for (const BlockSample& block : blocks) {
    const PreparedBlock prepared = prepare_block(block.view(), b_r, type);
    if (prepared.trivial) continue;
    for_each_sample(prepared, block,
                    [&](const Surface& s, double target) { out.push_back(target - predict(model, s)); });
  }
  return out;
}

double coverage(std::span<const double> residuals, const QuantizerSpec& spec) {
  if (residuals.empty()) return 1.0;
  std::size_t covered = 0;
  for (double e : residuals) covered += quantize(e, spec) != kBalanceCode;
  return static_cast<double>(covered) / static_cast<double>(residuals.size());
}

int select_m(std::span<const double> residuals, double b_a, double coverage_target) {
  if (residuals.empty()) throw Error(ErrorKind::InvalidArgument, "no residuals to size the quantizer");
  for (int m = kMinCodeBits; m <= kMaxCodeBits; ++m) {
    if (coverage(residuals, make_quantizer(m, b_a)) >= coverage_target) return m;
  }
  return kMaxCodeBits;
}

namespace {

struct CodedBlock {
  PreparedBlock prepared;
  std::vector<PartitionCodes> parts;
};

std::vector<CodedBlock> code_blocks(const Codec& codec, std::span<const BlockSample> blocks) {
  std::vector<CodedBlock> out;
  out.reserve(blocks.size());
  for (const BlockSample& block : blocks) {
    CodedBlock cb{prepare_block(block.view(), codec.b_r, codec.type), {}};
    if (!cb.prepared.trivial) cb.parts.push_back(code_partition(cb.prepared, block.view(), 0, codec, true));
    out.push_back(std::move(cb));
  }
  return out;
}

FrequencyTable average_histogram(std::span<const CodedBlock> coded, const QuantizerSpec& quantizer) {
  FrequencyTable freqs(quantizer.code_count(), 0.0);
  for (const CodedBlock& cb : coded)
    for (const PartitionCodes& pc : cb.parts)
      for (auto code : pc.codes) freqs[code] += 1.0;
  const double n = coded.empty() ? 1.0 : static_cast<double>(coded.size());
  for (double& f : freqs) f = std::max(f / n, 1.0);
  return freqs;
}

}  // namespace

FrequencyTable code_frequencies(const PerceptronModel& model, std::span<const BlockSample> blocks,
                                const QuantizerSpec& quantizer, double b_r, ElementType type) {
  const Codec codec{model, quantizer, {}, b_r, type};
  return average_histogram(code_blocks(codec, blocks), quantizer);
}

HuffmanCodebook estimate_codebook(const PerceptronModel& model, std::span<const BlockSample> blocks,
                                  const QuantizerSpec& quantizer, double b_r, ElementType type) {
  return build_codebook(code_frequencies(model, blocks, quantizer, b_r, type));
}

ValidationReport simulate_roundtrip(const PerceptronModel& model, std::span<const BlockSample> blocks, double b_r,
                                    int m, ElementType type) {
  Codec codec{model, make_quantizer(m, std::log2(1.0 + b_r)), {}, b_r, type};
  const std::vector<CodedBlock> coded = code_blocks(codec, blocks);
  codec.codebook = build_codebook(average_histogram(coded, codec.quantizer));

  ValidationReport report;
  report.chosen_m = m;
  std::size_t compressed = 0;
  std::size_t original = 0;
  std::size_t codes = 0;
  std::size_t covered = 0;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const BlockSample& block = blocks[i];
    const CompressedBlock cb = assemble_block(coded[i].prepared, coded[i].parts, codec.codebook);
    compressed += block_record_size(cb);
    original += block.data.size() * element_width(type);
    for (const PartitionCodes& pc : coded[i].parts) {
      codes += pc.codes.size();
      // Repaired elements were quantizable; only the true-value residual counts.
      covered += pc.repairs;
      for (auto code : pc.codes) covered += code != kBalanceCode;
    }
    const auto recon = decompress_block(cb, block.rows, block.cols, block.rows, codec);
    report.max_rel_error = std::max(report.max_rel_error, max_relative_error(block.data, recon));
  }
  report.compression_ratio = original ? static_cast<double>(compressed) / static_cast<double>(original) : 0.0;
  report.coverage = codes ? static_cast<double>(covered) / static_cast<double>(codes) : 1.0;
  return report;
}

std::vector<SweepEntry> sweep(std::span<const BlockSample> train, std::span<const BlockSample> validation,
                              std::span<const HyperConfig> configs, double b_r, double coverage_target,
                              ElementType type, int workers) {
  if (configs.empty()) throw Error(ErrorKind::InvalidArgument, "hyperparameter grid is empty");
  std::vector<SweepEntry> entries(configs.size());
  parallel_for(configs.size(), workers, [&](std::size_t i) {
    SweepEntry& e = entries[i];
    e.config = configs[i];
    try {
      PerceptronModel model = train_one_pass(train, configs[i], b_r, type);
      const auto residuals = validation_residuals(model, validation, b_r, type);
      const int m = residuals.empty() ? kMinCodeBits : select_m(residuals, std::log2(1.0 + b_r), coverage_target);
      e.report = simulate_roundtrip(model, validation, b_r, m, type);
      e.model = model;
    } catch (const Error& err) {
      if (err.kind() != ErrorKind::DivergedTraining) throw;
      e.failure = err.kind();
    }
  });
  return entries;
}

std::size_t select_best(std::span<const SweepEntry> entries, double b_r) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const SweepEntry& e = entries[i];
    if (!e.model || !(e.report.max_rel_error <= kErrorTolerance * b_r)) continue;
    if (!best) {
      best = i;
      continue;
    }
    const SweepEntry& b = entries[*best];
    const auto key = [](const SweepEntry& x) {
      return std::tuple(x.report.compression_ratio, x.config.l2, x.config.lr);
    };
    if (key(e) < key(b)) best = i;
  }
  if (!best) throw Error(ErrorKind::SweepExhausted, "no configuration met the error bound");
  return *best;
}

TrainingOutcome train(std::span<const double> data, const BlockLayout& layout, ElementType type,
                      const TrainerConfig& config) {
  std::vector<BlockSample> tiles =
      make_tiles(data, layout.rows, layout.cols, layout.partition_rows, layout.block_cols);
  if (tiles.empty()) throw Error(ErrorKind::EmptyDataset, "nothing to train on");
  const auto sampled = sample_training_blocks(tiles.size(), config.sample_rate, config.seed, kMinTrainingTiles);

  auto pick = [&](std::span<const std::size_t> idx) {
    std::vector<BlockSample> out;
    for (auto i : idx) out.push_back(tiles[i]);
    return out;
  };

  const double b_a = std::log2(1.0 + config.b_r);
  auto finish = [&](const PerceptronModel& model, std::span<const BlockSample> validation, HyperConfig hc,
                    bool fallback) {
    TrainingOutcome out;
    out.model = model;
    out.config = hc;
    out.fallback = fallback;
    const auto residuals = validation_residuals(model, validation, config.b_r, type);
    const int m = residuals.empty() ? kMinCodeBits : select_m(residuals, b_a, config.coverage_target);
    out.quantizer = make_quantizer(m, b_a);
    out.codebook = estimate_codebook(model, validation, out.quantizer, config.b_r, type);
    out.report = simulate_roundtrip(model, validation, config.b_r, m, type);
    return out;
  };

  if (config.preset_model) return finish(*config.preset_model, pick(sampled), {0.0, 0.0}, false);

  std::vector<std::size_t> train_idx;
  std::vector<std::size_t> valid_idx;
  try {
    std::tie(train_idx, valid_idx) = split_train_validation(sampled);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::TooFewBlocks) throw;
    return finish(init_model(), pick(sampled), {0.0, 0.0}, true);
  }
  const auto train_set = pick(train_idx);
  const auto valid_set = pick(valid_idx);
  const auto entries =
      sweep(train_set, valid_set, config.grid, config.b_r, config.coverage_target, type, config.workers);
  try {
    const std::size_t best = select_best(entries, config.b_r);
    return finish(*entries[best].model, valid_set, entries[best].config, false);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::SweepExhausted) throw;
    return finish(init_model(), valid_set, {0.0, 0.0}, true);
  }
}

}  // namespace permez
