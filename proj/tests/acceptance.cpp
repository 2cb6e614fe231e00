// Acceptance suite: one PASS/FAIL line per criterion.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <functional>
#include <numeric>
#include <random>
#include <string>

#include "permez/compressor.hpp"
#include "permez/container.hpp"
#include "permez/error.hpp"
#include "permez/ingest.hpp"
#include "permez/parallel.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace permez;
namespace fs = std::filesystem;

namespace {

// Collects failure details for one criterion.
struct Check {
  bool ok = true;
  std::string detail;

  void expect(bool cond, const std::string& what) {
    if (!cond && ok) detail = what;
    ok = ok && cond;
  }
};

CompressConfig default_config(double b_r, int workers = 4) {
  CompressConfig cfg;
  cfg.trainer.b_r = b_r;
  cfg.trainer.workers = workers;
  return cfg;
}

CompressResult compress_dataset(const Dataset& ds, const CompressConfig& cfg) {
  return compress(ds.values, ds.rows, ds.cols, ds.type, cfg);
}

std::string fmt(const char* f, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

Check error_bound() {
  Check c;
  const std::vector<std::pair<FieldKind, std::size_t>> sets = {
      {FieldKind::Sine2d, 512}, {FieldKind::GaussianField, 512}, {FieldKind::WhiteNoise, 256}};
  for (const auto& [kind, n] : sets) {
    const auto ds = generate(kind, n, n, 1);
    for (double b_r : {1e-2, 1e-3, 1e-4}) {
      const auto res = compress_dataset(ds, default_config(b_r));
      const auto bytes = write_container(res.container);
      const auto recon = decompress(read_container(bytes), 4);
      const auto m = evaluate(ds, recon, bytes.size(), 0, 0);
      c.expect(m.max_rel_error <= kErrorTolerance * b_r && m.zeros_exact && m.signs_preserved,
               std::string(to_string(kind)) + fmt(" b_r=%g max_rel_err=%g", b_r, m.max_rel_error));
    }
  }
  return c;
}

Check transform_fidelity() {
  Check c;
  struct Regime {
    double lo_exp, hi_exp, negative_share, b_r;
  };
  const std::vector<Regime> regimes = {
      {0, 0, 0.0, 1e-3}, {-1, 1, 0.5, 1e-2}, {-5, 5, 0.3, 1e-4}, {-30, 30, 0.5, 1e-3}, {-150, 150, 0.7, 1e-2}};
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  constexpr std::size_t kValues = 1'000'000;
  for (const auto& r : regimes) {
    std::vector<double> block(kValues);
    for (double& x : block) {
      const double mag = std::pow(10.0, r.lo_exp + (r.hi_exp - r.lo_exp) * u(rng)) * (1.0 + u(rng));
      x = u(rng) < r.negative_share ? -mag : mag;
    }
    const auto p = make_transform_params(compute_block_stats(block), r.b_r, epsilon0(ElementType::Float64));
    double worst = 0.0;
    double pos_max = -INFINITY;
    double neg_min = INFINITY;
    for (double x : block) {
      const double v = forward_map(x, p);
      const double y = inverse_map(v, p);
      worst = std::max(worst, std::fabs(y - x) / std::fabs(x));
      (x > 0 ? pos_max : neg_min) = x > 0 ? std::max(pos_max, v) : std::min(neg_min, v);
    }
    c.expect(worst <= 1e-12, fmt("round trip rel err %g in regime 1e%g", worst, r.lo_exp));
    // Block extremes pushed by the full absolute bound keep their sign.
    const double slack = 1e-9;
    if (pos_max > -INFINITY) {
      c.expect(pos_max + p.b_a <= p.boundary + slack, fmt("positive extreme %g crosses boundary %g", pos_max, p.boundary));
      c.expect(inverse_map(pos_max + p.b_a * (1 - 1e-9), p) > 0, "positive extreme flips sign");
    }
    if (neg_min < INFINITY) {
      c.expect(neg_min - p.b_a >= p.boundary - slack, fmt("negative extreme %g crosses boundary %g", neg_min, p.boundary));
      c.expect(inverse_map(neg_min - p.b_a * (1 - 1e-9), p) < 0, "negative extreme flips sign");
    }
  }
  return c;
}

Check predictor_correctness() {
  Check c;
  std::mt19937_64 rng(103);
  std::uniform_real_distribution<double> u(-100, 100);
  const auto init = init_model();
  for (int n = 0; n < 10000;) {
    const Surface s{u(rng), u(rng), u(rng)};
    const double lorenzo = s[0] + s[1] - s[2];
    if (lorenzo < 0) continue;
    c.expect(predict(init, s) == lorenzo, fmt("init prediction differs from Lorenzo %g", lorenzo));
    ++n;
  }
  std::normal_distribution<double> g(0.0, 1.0);
  constexpr double h = 1e-6;
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    PerceptronModel m = init;
    for (auto& row : m.w1)
      for (double& w : row) w = g(rng);
    for (double& w : m.w2) w = g(rng);
    TrainBatch batch;
    for (int i = 0; i < 1 + t % 8; ++i) {
      batch.surfaces.push_back({2 * g(rng), 2 * g(rng), 2 * g(rng)});
      batch.targets.push_back(2 * g(rng));
    }
    const double l2 = t % 3 == 0 ? 1e-2 : 0.0;
    const Gradient grad = batch_gradient(m, batch, l2);
    auto compare = [&](double analytic, double& weight) {
      const double saved = weight;
      weight = saved + h;
      const double up = batch_loss(m, batch, l2);
      weight = saved - h;
      const double down = batch_loss(m, batch, l2);
      weight = saved;
      const double numeric = (up - down) / (2 * h);
      worst = std::max(worst, std::fabs(analytic - numeric) / std::max({std::fabs(analytic), std::fabs(numeric), 1.0}));
    };
    for (std::size_t i = 0; i <= kSurfaceSize; ++i)
      for (std::size_t j = 0; j < kHiddenSize; ++j) compare(grad.w1[i][j], m.w1[i][j]);
    for (std::size_t j = 0; j < kHiddenSize; ++j) compare(grad.w2[j], m.w2[j]);
  }
  c.expect(worst <= 1e-5, fmt("finite-difference discrepancy %g", worst));
  return c;
}

Check quantizer_oracle() {
  Check c;
  std::size_t raw_ties = 0;
  std::size_t total = 0;
  for (int m = kMinCodeBits; m <= kMaxCodeBits; ++m) {
    for (double b_a : {1e-7, std::log2(1.001), 0.5}) {
      const auto q = make_quantizer(m, b_a);
      const double limit = (q.center() - 1.0) * q.step();
      const long steps = 8L * q.code_count();
      for (long i = 0; i <= steps; ++i) {
        const double e = -limit + 2.0 * limit * static_cast<double>(i) / static_cast<double>(steps);
        const auto code = quantize(e, q);
        ++total;
        if (code == kBalanceCode) {
          // Allowed only at exact half-steps where both neighbors miss b_a by
          // an ulp; the element is then stored raw, with zero error.
          const double r = e / q.step();
          c.expect(std::fabs(std::fabs(r - std::trunc(r)) - 0.5) < 1e-9,
                   fmt("in-range error %g got the balance flag (m=%g)", e, m));
          ++raw_ties;
          continue;
        }
        c.expect(code < q.code_count() && std::fabs(dequantize(code, q) - e) <= b_a,
                 fmt("fidelity broken at %g (m=%g)", e, m));
      }
      for (int k = 0; k < 200; ++k) {
        const double beyond = (q.center() + 0.5 + k * 7.3) * q.step();
        c.expect(quantize(beyond, q) == kBalanceCode && quantize(-beyond, q) == kBalanceCode,
                 fmt("out-of-range %g not flagged (m=%g)", beyond, m));
      }
    }
  }
  if (c.ok) c.detail = fmt("%g grid points, %g half-step ties stored raw", static_cast<double>(total),
                           static_cast<double>(raw_ties));
  return c;
}

Check entropy_coding() {
  Check c;
  std::mt19937_64 rng(107);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t alphabet : {2u, 3u, 17u, 256u, 4096u, 65536u}) {
    FrequencyTable f(alphabet);
    for (double& w : f) w = std::pow(u(rng), 3.0) * 100.0 + (u(rng) < 0.1 ? 0.0 : 1e-3);
    const auto book = build_codebook(f);
    double total = 0.0;
    double cost = 0.0;
    for (std::size_t s = 0; s < alphabet; ++s) {
      total += f[s];
      cost += f[s] * book.length(static_cast<std::uint32_t>(s));
    }
    c.expect(cost / total <= testing::shannon_entropy_bits(f) + 1.0 + 1e-12,
             fmt("average length above entropy + 1 for alphabet %g", static_cast<double>(alphabet)));
    const double ref = testing::reference_huffman_cost(f);
    c.expect(std::fabs(cost - ref) <= 1e-9 * ref, fmt("cost %g differs from reference %g", cost, ref));

    std::discrete_distribution<std::uint32_t> pick(f.begin(), f.end());
    std::vector<std::uint32_t> codes(100'000);
    for (auto& s : codes) s = pick(rng);
    BitStream stream;
    encode(codes, book, stream);
    BitReader reader(stream.bytes(), stream.bit_len());
    bool same = true;
    for (auto s : codes) same = same && reader.decode_next(book) == s;
    c.expect(same && reader.at_end(), "stream did not round-trip");
  }
  return c;
}

Check parallel_determinism() {
  Check c;
  const auto ds = generate(FieldKind::GaussianField, 512, 512, 3);
  std::uint64_t reference = 0;
  Container container;
  for (int workers : {1, 2, 8}) {
    const auto res = compress_dataset(ds, default_config(1e-3, workers));
    const auto digest = testing::fnv1a(write_container(res.container));
    if (workers == 1) {
      reference = digest;
      container = res.container;
    }
    c.expect(digest == reference, fmt("digest differs with %g workers", workers));
  }
  const auto baseline = decompress(container, 1);
  c.expect(decompress(container, 8) == baseline, "8-worker decompression differs");

  const Codec codec = container.codec();
  std::mt19937_64 rng(109);
  for (std::size_t b = 0; b < container.blocks.size(); ++b) {
    const auto e = container.layout.block(b);
    const auto prows = container.layout.partition_rows;
    std::vector<std::size_t> order(container.layout.partition_count(e.rows));
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    const auto shuffled = decompress_block(container.blocks[b], e.rows, e.cols, prows, codec, 1, order);
    const auto expected = extract_block(baseline, container.layout, e);
    c.expect(shuffled == expected, fmt("block %g differs under permuted partition order", static_cast<double>(b)));
  }
  return c;
}

Check container_integrity() {
  Check c;
  auto ds = generate(FieldKind::GaussianField, 200, 160, 5);
  std::fill(ds.values.end() - 160 * 8, ds.values.end(), 0.0);
  CompressConfig cfg = default_config(1e-3);
  cfg.layout.block_rows = 64;
  cfg.layout.block_cols = 64;
  cfg.layout.partition_rows = 16;
  const Container original = compress_dataset(ds, cfg).container;
  const auto bytes = write_container(original);
  const Container back = read_container(bytes);
  c.expect(back == original, "read(write(c)) differs structurally");
  c.expect(write_container(back) == bytes, "rewrite is not byte-identical");

  // Field offsets follow the documented header layout.
  auto get_u64 = [&](std::size_t at) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | bytes[at + i];
    return static_cast<std::size_t>(v);
  };
  const std::size_t model_len = get_u64(52);
  const std::size_t book_at = 60 + model_len;
  const std::size_t book_len = get_u64(book_at);
  const std::size_t count_at = book_at + 8 + book_len;
  const std::size_t record_at = count_at + 8;
  const std::size_t part_at = record_at + 17;
  const std::size_t balance_count_at = part_at + 24 * original.layout.partition_count(64);

  auto put_u64 = [](std::vector<std::uint8_t>& b, std::size_t at, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) b[at + i] = static_cast<std::uint8_t>(v >> (8 * i));
  };
  auto put_f64 = [&](std::vector<std::uint8_t>& b, std::size_t at, double v) {
    std::uint64_t u;
    std::memcpy(&u, &v, 8);
    put_u64(b, at, u);
  };
  using Mutation = std::function<void(std::vector<std::uint8_t>&)>;
  const std::vector<std::pair<std::string, Mutation>> mutations = {
      {"magic", [](auto& b) { b[0] = 'X'; }},
      {"version", [](auto& b) { b[4] = 2; }},
      {"element type", [](auto& b) { b[6] = 9; }},
      {"rows", [&](auto& b) { put_u64(b, 7, 260); }},
      {"cols", [&](auto& b) { put_u64(b, 15, 159); }},
      {"grid shrink", [&](auto& b) { put_u64(b, 15, 1); }},
      {"block rows", [](auto& b) { std::fill_n(b.begin() + 23, 4, 0); }},
      {"partition rows", [](auto& b) { std::fill_n(b.begin() + 31, 4, 0); }},
      {"b_r", [&](auto& b) { put_f64(b, 35, -1.0); }},
      {"coverage", [&](auto& b) { put_f64(b, 43, 2.0); }},
      {"code width", [](auto& b) { b[51] = 40; }},
      {"model length", [&](auto& b) { put_u64(b, 52, 1u << 30); }},
      {"model weight", [&](auto& b) { put_f64(b, 60 + 16, NAN); }},
      {"codebook length", [&](auto& b) { put_u64(b, book_at, 3); }},
      {"block count", [&](auto& b) { put_u64(b, count_at, 1); }},
      {"trivial flag", [&](auto& b) { b[record_at] = 2; }},
      {"factor", [&](auto& b) { put_f64(b, record_at + 1, -4.0); }},
      {"partition offset", [&](auto& b) { put_u64(b, part_at, 8); }},
      {"partition length", [&](auto& b) { put_u64(b, part_at + 8, std::uint64_t{1} << 60); }},
      {"balance count", [&](auto& b) { put_u64(b, balance_count_at, std::uint64_t{1} << 40); }},
      {"truncated", [](auto& b) { b.resize(b.size() - 5); }},
      {"trailing", [](auto& b) { b.push_back(0); }},
  };
  int detected = 0;
  for (const auto& [name, mutate] : mutations) {
    auto bad = bytes;
    mutate(bad);
    bool caught = false;
    try {
      read_container(bad);
    } catch (const Error& e) {
      caught = e.kind() == ErrorKind::BadMagic || e.kind() == ErrorKind::UnsupportedVersion ||
               e.kind() == ErrorKind::Corrupt;
    }
    c.expect(caught, "mutation not detected: " + name);
    detected += caught;
  }
  c.expect(mutations.size() >= 20, "fewer than 20 fixtures");
  if (c.ok) c.detail = std::to_string(detected) + " mutations detected";
  return c;
}

Check compression_ratio_behavior() {
  Check c;
  const auto gauss = generate(FieldKind::GaussianField, 256, 256, 7);
  double prev = INFINITY;
  std::string trace;
  for (double b_r : {1e-5, 1e-4, 1e-3, 1e-2, 1e-1}) {
    const auto bytes = write_container(compress_dataset(gauss, default_config(b_r)).container);
    const double cr = static_cast<double>(bytes.size()) / static_cast<double>(gauss.byte_size());
    c.expect(cr <= prev, fmt("CR rose to %g at b_r=%g", cr, b_r));
    trace += fmt("%.3f ", cr);
    prev = cr;
  }
  const auto sine = generate(FieldKind::Sine2d, 512, 512, 1);
  const auto noise = generate(FieldKind::WhiteNoise, 512, 512, 1);
  const double cr_sine = static_cast<double>(write_container(compress_dataset(sine, default_config(1e-3)).container).size()) /
                         static_cast<double>(sine.byte_size());
  const double cr_noise =
      static_cast<double>(write_container(compress_dataset(noise, default_config(1e-3)).container).size()) /
      static_cast<double>(noise.byte_size());
  c.expect(cr_sine < cr_noise, fmt("CR(sine2d)=%g not below CR(white-noise)=%g", cr_sine, cr_noise));
  if (c.ok) c.detail = "gaussian CR " + trace + fmt("; sine %.3f < noise %.3f", cr_sine, cr_noise);
  return c;
}

Check repair_termination() {
  Check c;
  std::mt19937_64 rng(113);
  for (int t = 0; t < 50; ++t) {
    const std::size_t rows = 16 + t % 17;
    const std::size_t cols = 16 + (t * 7) % 29;
    const double b_r = t % 3 == 0 ? 1e-2 : t % 3 == 1 ? 1e-3 : 1e-4;
    const auto data = testing::adversarial_block(rng, rows * cols);
    const auto codec = testing::make_codec(b_r, 4 + t % 13);
    const BlockView view{data, rows, cols, 8};
    const auto cb = verify_and_repair(view, compress_block(view, codec), codec);
    const auto recon = decompress_block(cb, rows, cols, 8, codec);
    c.expect(max_relative_error(data, recon) <= kErrorTolerance * b_r, fmt("fuzz block %g breaks the bound", t));
    c.expect(cb.balance_values.size() <= data.size(), fmt("fuzz block %g has too many balance points", t));
  }
  return c;
}

Check segy_ingestion() {
  Check c;
  for (std::uint32_t w : testing::ibm_corpus()) {
    c.expect(testing::float_bits(ibm_to_ieee(w)) == testing::float_bits(testing::reference_ibm(w)),
             fmt("IBM word %g mismatches the oracle", static_cast<double>(w)));
  }
  const auto field = generate(FieldKind::GaussianField, 96, 250, 9);
  std::vector<std::vector<std::uint32_t>> traces(96, std::vector<std::uint32_t>(250));
  for (std::size_t r = 0; r < 96; ++r)
    for (std::size_t s = 0; s < 250; ++s) traces[r][s] = testing::float_bits(static_cast<float>(field.values[r * 250 + s]));
  const fs::path path = fs::temp_directory_path() / "permez_acceptance_fixture.sgy";
  write_file(path, testing::make_segy(traces, 5));
  const auto ds = read_segy(path);
  fs::remove(path);
  c.expect(ds.rows == 96 && ds.cols == 250 && ds.values == field.values, "fixture did not parse back to its samples");
  for (double b_r : {1e-2, 1e-3, 1e-4}) {
    const auto bytes = write_container(compress_dataset(ds, default_config(b_r)).container);
    const auto m = evaluate(ds, decompress(read_container(bytes), 2), bytes.size(), 0, 0);
    c.expect(m.max_rel_error <= kErrorTolerance * b_r && m.zeros_exact && m.signs_preserved,
             fmt("SEG-Y round trip max_rel_err %g at b_r=%g", m.max_rel_error, b_r));
  }
  return c;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Check()>>> criteria = {
      {"error bound on generated fields", error_bound},
      {"transform fidelity and sign separation", transform_fidelity},
      {"predictor init equivalence and gradients", predictor_correctness},
      {"quantizer grid oracle", quantizer_oracle},
      {"entropy coding", entropy_coding},
      {"parallel determinism", parallel_determinism},
      {"container round trip and corruption detection", container_integrity},
      {"compression ratio behavior", compression_ratio_behavior},
      {"repair termination on adversarial blocks", repair_termination},
      {"SEG-Y ingestion", segy_ingestion},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Check result;
    try {
      result = criteria[i].second();
    } catch (const std::exception& e) {
      result.ok = false;
      result.detail = std::string("exception: ") + e.what();
    }
    const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s %2zu %s (%.1fs)%s%s\n", result.ok ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), sec,
                result.detail.empty() ? "" : ": ", result.detail.c_str());
    std::fflush(stdout);
    failed += !result.ok;
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
