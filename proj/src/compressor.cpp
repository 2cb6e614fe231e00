#include "permez/compressor.hpp"

#include "permez/error.hpp"
#include "permez/parallel.hpp"

namespace permez {

std::vector<CompressedBlock> compress_blocks(std::span<const double> data, const BlockLayout& layout,
                                             const Codec& codec, int workers, std::size_t* repairs) {
  layout.validate();
  const std::size_t n_blocks = layout.block_count();
  std::vector<std::vector<double>> raw(n_blocks);
  std::vector<PreparedBlock> prepared(n_blocks);
  std::vector<BlockView> views(n_blocks);
  parallel_for(n_blocks, workers, [&](std::size_t b) {
    const BlockExtent e = layout.block(b);
    raw[b] = extract_block(data, layout, e);
    views[b] = BlockView{raw[b], e.rows, e.cols, layout.partition_rows};
    prepared[b] = prepare_block(views[b], codec.b_r, codec.type);
  });

  // One task per (block, partition) so small grids still spread across workers.
  std::vector<std::pair<std::size_t, std::size_t>> tasks;
  std::vector<std::vector<PartitionCodes>> parts(n_blocks);
  for (std::size_t b = 0; b < n_blocks; ++b) {
    if (prepared[b].trivial) continue;
    parts[b].resize(views[b].partition_count());
    for (std::size_t p = 0; p < parts[b].size(); ++p) tasks.emplace_back(b, p);
  }
  parallel_for(tasks.size(), workers, [&](std::size_t t) {
    const auto [b, p] = tasks[t];
    parts[b][p] = code_partition(prepared[b], views[b], p, codec, true);
  });

  std::vector<CompressedBlock> blocks(n_blocks);
  parallel_for(n_blocks, workers,
               [&](std::size_t b) { blocks[b] = assemble_block(prepared[b], parts[b], codec.codebook); });
  if (repairs) {
    *repairs = 0;
    for (const auto& block_parts : parts)
      for (const auto& pc : block_parts) *repairs += pc.repairs;
  }
  return blocks;
}

CompressResult compress(std::span<const double> data, std::size_t rows, std::size_t cols, ElementType type,
                        const CompressConfig& config) {
  if (data.size() != rows * cols) throw Error(ErrorKind::DimensionMismatch, "data size does not match dims");
  if (!(config.trainer.b_r > 0.0 && config.trainer.b_r < 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "relative error bound must lie in (0, 1)");
  }
  CompressResult result;
  Container& c = result.container;
  c.type = type;
  c.layout = config.layout;
  c.layout.rows = rows;
  c.layout.cols = cols;
  c.layout.validate();
  c.b_r = config.trainer.b_r;
  c.coverage_target = config.trainer.coverage_target;

  if (c.layout.block_count() == 0) {
    // Header-only container; any valid codebook will do.
    c.model = init_model();
    c.m = kMinCodeBits;
    c.codebook = build_codebook(FrequencyTable(std::size_t{1} << c.m, 1.0));
    return result;
  }

  result.training = train(data, c.layout, type, config.trainer);
  c.model = result.training.model;
  c.m = result.training.quantizer.m;
  c.codebook = result.training.codebook;
  c.blocks = compress_blocks(data, c.layout, c.codec(), config.trainer.workers, &result.repairs);
  for (const auto& b : c.blocks) result.balance_points += b.balance_values.size();
  return result;
}

std::vector<double> decompress(const Container& container, int workers) {
  const BlockLayout& layout = container.layout;
  std::vector<double> out(layout.rows * layout.cols, 0.0);
  if (container.blocks.size() != layout.block_count()) {
    throw Error(ErrorKind::Corrupt, "block count does not match grid");
  }
  const Codec codec = container.codec();
  std::vector<std::pair<std::size_t, std::size_t>> tasks;
  std::vector<std::vector<PartitionCodes>> parts(container.blocks.size());
  std::vector<std::vector<double>> mapped(container.blocks.size());
  for (std::size_t b = 0; b < container.blocks.size(); ++b) {
    if (container.blocks[b].trivial) continue;
    const BlockExtent e = layout.block(b);
    parts[b] = decode_partitions(container.blocks[b], e.rows, e.cols, layout.partition_rows, codec.codebook);
    mapped[b].assign(e.rows * e.cols, 0.0);
    for (std::size_t p = 0; p < parts[b].size(); ++p) tasks.emplace_back(b, p);
  }
  parallel_for(tasks.size(), workers, [&](std::size_t t) {
    const auto [b, p] = tasks[t];
    const BlockExtent e = layout.block(b);
    const std::size_t r0 = p * layout.partition_rows;
    const std::size_t r1 = std::min(e.rows, r0 + layout.partition_rows);
    reconstruct_partition(parts[b][p], e.cols, r0, r1, prediction_origin(container.blocks[b].params), codec,
                          mapped[b]);
  });
  parallel_for(container.blocks.size(), workers, [&](std::size_t b) {
    const BlockExtent e = layout.block(b);
    std::vector<double> block(e.rows * e.cols, 0.0);
    if (!container.blocks[b].trivial) {
      for (std::size_t i = 0; i < block.size(); ++i) {
        block[i] = restore_value(mapped[b][i], container.blocks[b].params, codec.type);
      }
    }
    store_block(out, layout, e, block);
  });
  return out;
}

}  // namespace permez
