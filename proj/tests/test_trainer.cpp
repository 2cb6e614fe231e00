#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "permez/container.hpp"
#include "permez/error.hpp"
#include "permez/ingest.hpp"
#include "permez/trainer.hpp"

using namespace permez;

namespace {

ErrorKind error_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::Corrupt;
}

SweepEntry entry(double cr, double err, double lr, double l2, bool has_model = true) {
  SweepEntry e;
  e.config = {lr, l2};
  if (has_model) e.model = init_model();
  e.report.compression_ratio = cr;
  e.report.max_rel_error = err;
  return e;
}

std::vector<BlockSample> field_tiles(FieldKind kind, std::size_t rows, std::size_t cols, std::size_t tile_rows) {
  const auto ds = generate(kind, rows, cols, 21);
  return make_tiles(ds.values, rows, cols, tile_rows, cols);
}

}  // namespace

TEST_CASE("sampling sizes, order and determinism") {
  const auto ten = sample_training_blocks(100, 0.1, 7);
  CHECK(ten.size() == 10);
  CHECK(std::set<std::size_t>(ten.begin(), ten.end()).size() == 10);
  for (auto i : ten) CHECK(i < 100);
  CHECK(sample_training_blocks(100, 0.1, 7) == ten);
  CHECK(sample_training_blocks(100, 0.1, 8) != ten);

  const auto all = sample_training_blocks(13, 1.0, 99);
  REQUIRE(all.size() == 13);
  for (std::size_t i = 0; i < 13; ++i) CHECK(all[i] == i);

  CHECK(sample_training_blocks(100, 0.01, 1, 10).size() == 10);
  CHECK(sample_training_blocks(4, 0.01, 1, 10).size() == 4);
  CHECK(error_of([] { sample_training_blocks(0, 0.5, 1); }) == ErrorKind::EmptyDataset);
  CHECK(error_of([] { sample_training_blocks(10, 0.0, 1); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("train and validation split") {
  auto sizes = [](std::size_t k) {
    std::vector<std::size_t> s(k);
    for (std::size_t i = 0; i < k; ++i) s[i] = i;
    const auto [t, v] = split_train_validation(s);
    return std::pair{t.size(), v.size()};
  };
  CHECK(sizes(10) == std::pair<std::size_t, std::size_t>{8, 2});
  CHECK(sizes(5) == std::pair<std::size_t, std::size_t>{4, 1});
  CHECK(sizes(11) == std::pair<std::size_t, std::size_t>{9, 2});
  CHECK(error_of([&] { sizes(4); }) == ErrorKind::TooFewBlocks);
}

TEST_CASE("default grid is the full cartesian product") {
  const auto grid = default_grid();
  CHECK(grid.size() == 6);
  for (double lr : {1e-3, 1e-4})
    for (double l2 : {0.0, 1e-4, 1e-2}) CHECK(std::count(grid.begin(), grid.end(), HyperConfig{lr, l2}) == 1);
}

TEST_CASE("tiles cover the grid") {
  const auto ds = generate(FieldKind::Sine2d, 50, 30, 0);
  const auto tiles = make_tiles(ds.values, 50, 30, 16, 16);
  CHECK(tiles.size() == 4 * 2);
  CHECK(tiles.back().rows == 2);
  CHECK(tiles.back().cols == 14);
  CHECK(tiles.back().data.back() == ds.values.back());
}

TEST_CASE("select_m") {
  const double b_a = 0.01;
  CHECK(select_m(std::vector<double>(100, 0.0), b_a, 0.99) == 4);

  std::vector<double> uniform;
  for (int k = -127; k <= 127; ++k) uniform.push_back(k * 2 * b_a);
  CHECK(coverage(uniform, make_quantizer(8, b_a)) == 1.0);
  CHECK(coverage(uniform, make_quantizer(7, b_a)) < 1.0);
  CHECK(select_m(uniform, b_a, 1.0) == 8);

  std::vector<double> outlier(10000, 0.0);
  outlier[5000] = 1e9;
  CHECK(select_m(outlier, b_a, 0.99) == 4);
  CHECK(select_m(outlier, b_a, 1.0) == 16);
}

TEST_CASE("select_best ordering") {
  const double b_r = 1e-3;
  CHECK(select_best(std::vector{entry(0.3, 1e-4, 1e-3, 0)}, b_r) == 0);
  CHECK(select_best(std::vector{entry(0.25, 1e-4, 1e-3, 0), entry(0.20, 1e-4, 1e-3, 1e-2)}, b_r) == 1);
  CHECK(select_best(std::vector{entry(0.2, 1e-4, 1e-3, 1e-2), entry(0.2, 1e-4, 1e-3, 0)}, b_r) == 1);
  CHECK(select_best(std::vector{entry(0.2, 1e-4, 1e-3, 0), entry(0.2, 1e-4, 1e-4, 0)}, b_r) == 1);
  CHECK(select_best(std::vector{entry(0.1, 1.0, 1e-3, 0), entry(0.2, 1e-4, 1e-3, 0, false), entry(0.3, 0, 1, 0)},
                    b_r) == 2);
  CHECK(error_of([&] { select_best(std::vector{entry(0.1, 1.0, 1e-3, 0)}, b_r); }) == ErrorKind::SweepExhausted);
  CHECK(error_of([&] { select_best(std::vector<SweepEntry>{}, b_r); }) == ErrorKind::SweepExhausted);
}

TEST_CASE("sweep is deterministic and reports one entry per config") {
  const auto tiles = field_tiles(FieldKind::GaussianField, 160, 64, 16);
  const std::span<const BlockSample> all(tiles);
  const auto train = all.first(8);
  const auto valid = all.subspan(8);
  const auto grid = default_grid();
  const auto a = sweep(train, valid, grid, 1e-3, 0.99, ElementType::Float32, 1);
  CHECK(a.size() == 6);

  const std::vector<HyperConfig> dup = {grid[1], grid[1]};
  const auto b = sweep(train, valid, dup, 1e-3, 0.99, ElementType::Float32, 2);
  REQUIRE(b.size() == 2);
  CHECK(b[0].model == b[1].model);
  CHECK(b[0].report.compression_ratio == b[1].report.compression_ratio);
  CHECK(b[0].report.max_rel_error == b[1].report.max_rel_error);
  CHECK(b[0].model == a[1].model);
  for (const auto& e : a) CHECK(e.report.max_rel_error <= kErrorTolerance * 1e-3);
}

TEST_CASE("constant block round trip cost matches the record layout") {
  // One 32x32 constant tile: every residual sits at the center, which gets a
  // 1-bit codeword against 15 floored neighbors when m = 4.
  BlockSample s{std::vector<double>(32 * 32, 3.5), 32, 32};
  const auto report = simulate_roundtrip(init_model(), std::span(&s, 1), 1e-3, 4, ElementType::Float32);
  const double record = 1 + 8 + 8 + 24 + 8 + std::ceil((32.0 * 32 - 1) / 8);
  CHECK(report.compression_ratio == doctest::Approx(record / (32 * 32 * 4)));
  CHECK(report.max_rel_error == 0.0);
  CHECK(report.coverage == 1.0);
}

TEST_CASE("estimated codebooks cover every code") {
  const auto tiles = field_tiles(FieldKind::WhiteNoise, 64, 64, 16);
  const auto q = make_quantizer(6, std::log2(1.001));
  const auto freqs = code_frequencies(init_model(), tiles, q, 1e-3, ElementType::Float32);
  REQUIRE(freqs.size() == 64);
  for (double f : freqs) CHECK(f >= 1.0);
  const auto book = estimate_codebook(init_model(), tiles, q, 1e-3, ElementType::Float32);
  for (std::uint32_t c = 0; c < 64; ++c) CHECK(book.length(c) > 0);

  const auto one = code_frequencies(init_model(), std::span(tiles).first(1), q, 1e-3, ElementType::Float32);
  const auto two = code_frequencies(init_model(), std::span(tiles).subspan(1, 1), q, 1e-3, ElementType::Float32);
  const auto both = code_frequencies(init_model(), std::span(tiles).first(2), q, 1e-3, ElementType::Float32);
  for (std::size_t c = 0; c < 64; ++c) {
    // Flooring only lifts entries that are below 1 in both histograms.
    if (one[c] > 1.0 && two[c] > 1.0) CHECK(both[c] == doctest::Approx((one[c] + two[c]) / 2));
  }
}

TEST_CASE("training falls back to the init model on tiny inputs") {
  const auto ds = generate(FieldKind::Sine2d, 8, 8, 0);
  BlockLayout layout{.rows = 8, .cols = 8, .block_rows = 8, .block_cols = 8, .partition_rows = 4};
  TrainerConfig tc;
  const auto out = train(ds.values, layout, ElementType::Float32, tc);
  CHECK(out.fallback);
  CHECK(out.model == init_model());
  CHECK(out.codebook.alphabet_size() == out.quantizer.code_count());
}

TEST_CASE("training is deterministic across worker counts") {
  const auto ds = generate(FieldKind::GaussianField, 256, 128, 4);
  BlockLayout layout{.rows = 256, .cols = 128, .block_rows = 128, .block_cols = 128, .partition_rows = 16};
  TrainerConfig tc;
  tc.seed = 3;
  tc.workers = 1;
  const auto a = train(ds.values, layout, ElementType::Float32, tc);
  tc.workers = 4;
  const auto b = train(ds.values, layout, ElementType::Float32, tc);
  CHECK(a.model == b.model);
  CHECK(a.codebook == b.codebook);
  CHECK(a.config == b.config);
}
