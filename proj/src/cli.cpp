#include "permez/cli.hpp"

#include <chrono>
#include <cstdlib>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "permez/compressor.hpp"
#include "permez/container.hpp"

namespace permez::cli {

int exit_code_for(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument:
      return kUsage;
    case ErrorKind::Io:
      return kIo;
    case ErrorKind::NonFiniteInput:
    case ErrorKind::EmptyDataset:
    case ErrorKind::UnsupportedFormatCode:
    case ErrorKind::TruncatedFile:
    case ErrorKind::InconsistentTraceLength:
    case ErrorKind::SizeMismatch:
    case ErrorKind::DimensionMismatch:
      return kInput;
    case ErrorKind::BadMagic:
    case ErrorKind::UnsupportedVersion:
    case ErrorKind::Corrupt:
    case ErrorKind::TruncatedStream:
    case ErrorKind::InvalidPrefix:
    case ErrorKind::BalanceUnderflow:
      return kContainer;
    case ErrorKind::DivergedTraining:
    case ErrorKind::SweepExhausted:
    case ErrorKind::TooFewBlocks:
      return kTraining;
    default:
      return kInternal;
  }
}

namespace {

double parse_number(const std::string& text) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) throw Error(ErrorKind::InvalidArgument, "bad number '" + text + "'");
  return v;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, sep);) {
    if (!item.empty()) parts.push_back(item);
  }
  return parts;
}

template <typename Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kInternal;
  }
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

CompressConfig compress_config(const RunConfig& cfg, double b_r) {
  CompressConfig cc;
  cc.layout.block_rows = cfg.block_rows;
  cc.layout.block_cols = cfg.block_cols;
  cc.layout.partition_rows = cfg.partition_rows;
  cc.trainer.b_r = b_r;
  cc.trainer.sample_rate = cfg.sample_rate;
  cc.trainer.coverage_target = cfg.coverage_target;
  cc.trainer.grid = cfg.grid;
  cc.trainer.seed = cfg.seed;
  cc.trainer.workers = cfg.threads;
  if (!cfg.load_model.empty()) cc.trainer.preset_model = deserialize_model(read_file(cfg.load_model));
  return cc;
}

}  // namespace

std::vector<HyperConfig> parse_grid(const std::string& text) {
  std::vector<double> lrs;
  std::vector<double> l2s;
  for (const auto& section : split(text, ';')) {
    const auto colon = section.find(':');
    if (colon == std::string::npos) throw Error(ErrorKind::InvalidArgument, "grid section needs 'name:values'");
    const std::string name = section.substr(0, colon);
    auto& target = name == "lr" ? lrs : name == "l2" ? l2s
                                                      : throw Error(ErrorKind::InvalidArgument, "unknown grid key '" + name + "'");
    for (const auto& v : split(section.substr(colon + 1), ',')) target.push_back(parse_number(v));
  }
  if (lrs.empty() || l2s.empty()) throw Error(ErrorKind::InvalidArgument, "grid needs both lr and l2 values");
  std::vector<HyperConfig> grid;
  for (double lr : lrs)
    for (double l2 : l2s) {
      if (!(lr > 0.0) || !(l2 >= 0.0)) throw Error(ErrorKind::InvalidArgument, "grid needs lr > 0 and l2 >= 0");
      grid.push_back({lr, l2});
    }
  return grid;
}

std::pair<std::size_t, std::size_t> parse_dims(const std::string& text) {
  const auto x = text.find_first_of("xX");
  if (x == std::string::npos) throw Error(ErrorKind::InvalidArgument, "dims must look like RxC");
  try {
    std::size_t used_r = 0;
    std::size_t used_c = 0;
    const std::string rs = text.substr(0, x);
    const std::string cs = text.substr(x + 1);
    const auto r = std::stoull(rs, &used_r);
    const auto c = std::stoull(cs, &used_c);
    if (used_r == rs.size() && used_c == cs.size()) return {r, c};
  } catch (const std::exception&) {
  }
  throw Error(ErrorKind::InvalidArgument, "dims must look like RxC");
}

std::vector<double> parse_bounds(const std::string& text) {
  std::vector<double> out;
  for (const auto& v : split(text, ',')) out.push_back(parse_number(v));
  if (out.empty()) throw Error(ErrorKind::InvalidArgument, "no error bounds given");
  return out;
}

void validate(const RunConfig& cfg) {
  auto fail = [](const char* what) { throw Error(ErrorKind::InvalidArgument, what); };
  if (!(cfg.rel_error > 0.0 && cfg.rel_error < 1.0)) fail("--rel-error must lie in (0, 1)");
  if (cfg.threads < 1) fail("--threads must be >= 1");
  if (cfg.block_rows == 0 || cfg.block_cols == 0) fail("--block-size must be positive");
  if (cfg.partition_rows == 0) fail("--partition-rows must be positive");
  if (!(cfg.sample_rate > 0.0 && cfg.sample_rate <= 1.0)) fail("--sample-rate must lie in (0, 1]");
  if (!(cfg.coverage_target >= 0.0 && cfg.coverage_target <= 1.0)) fail("--coverage-target must lie in [0, 1]");
  if (cfg.grid.empty()) fail("--grid is empty");
  for (double b : cfg.bench_bounds)
    if (!(b > 0.0 && b < 1.0)) fail("--bench-bounds values must lie in (0, 1)");
}

Dataset load_input(const RunConfig& cfg) {
  const std::string& f = cfg.spec.format;
  if (f.rfind("gen:", 0) == 0) {
    return generate(parse_field_kind(f.substr(4)), cfg.spec.rows, cfg.spec.cols, cfg.seed);
  }
  if (cfg.input.empty()) throw Error(ErrorKind::InvalidArgument, "--input is required for format " + f);
  if (f == "segy") return read_segy(cfg.input);
  if (f == "raw32" || f == "raw64") {
    return read_raw(cfg.input, cfg.spec.rows, cfg.spec.cols, f == "raw32" ? ElementType::Float32 : ElementType::Float64,
                    cfg.spec.endian);
  }
  throw Error(ErrorKind::InvalidArgument, "unknown format '" + f + "'");
}

int cmd_compress(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    validate(cfg);
    if (cfg.output.empty()) throw Error(ErrorKind::InvalidArgument, "--output is required");
    const Dataset data = load_input(cfg);
    const auto t0 = std::chrono::steady_clock::now();
    CompressResult result = compress(data.values, data.rows, data.cols, data.type, compress_config(cfg, cfg.rel_error));
    const auto bytes = write_container(result.container);
    const double c_sec = seconds_since(t0);
    write_file(cfg.output, bytes);
    if (!cfg.save_model.empty()) write_file(cfg.save_model, serialize_model(result.container.model));

    const auto t1 = std::chrono::steady_clock::now();
    const auto recon = decompress(read_container(bytes), cfg.threads);
    const double d_sec = seconds_since(t1);
    const Metrics m = evaluate(data, recon, bytes.size(), c_sec, d_sec);
    out << metrics_csv_header() << '\n' << metrics_csv_row(data.source, cfg.rel_error, m) << '\n';
    err << "m=" << result.container.m << " balance_points=" << result.balance_points
        << " repairs=" << result.repairs << (result.training.fallback ? " model=lorenzo-fallback" : "") << '\n';
    return static_cast<int>(kOk);
  });
}

int cmd_decompress(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (cfg.threads < 1) throw Error(ErrorKind::InvalidArgument, "--threads must be >= 1");
    if (cfg.input.empty() || cfg.output.empty()) throw Error(ErrorKind::InvalidArgument, "--input and --output are required");
    const auto bytes = read_file(cfg.input);
    const auto t0 = std::chrono::steady_clock::now();
    const Container c = read_container(bytes);
    const auto recon = decompress(c, cfg.threads);
    const double d_sec = seconds_since(t0);
    write_raw(cfg.output, recon, c.type);
    if (cfg.original.empty()) return static_cast<int>(kOk);

    RunConfig orig_cfg = cfg;
    orig_cfg.input = cfg.original;
    const Dataset original = load_input(orig_cfg);
    if (original.rows != c.layout.rows || original.cols != c.layout.cols) {
      throw Error(ErrorKind::DimensionMismatch, "original dims differ from container");
    }
    const Metrics m = evaluate(original, recon, bytes.size(), 0.0, d_sec);
    out << metrics_csv_header() << '\n' << metrics_csv_row(original.source, c.b_r, m) << '\n';
    const bool ok = m.max_rel_error <= 1.5 * c.b_r && m.zeros_exact && m.signs_preserved;
    if (!ok) err << "error bound violated: max_rel_err=" << m.max_rel_error << '\n';
    return static_cast<int>(ok ? kOk : kBoundViolated);
  });
}

int cmd_bench(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    validate(cfg);
    const Dataset data = load_input(cfg);
    out << metrics_csv_header() << '\n';
    for (double b_r : cfg.bench_bounds) {
      const auto t0 = std::chrono::steady_clock::now();
      const CompressResult result =
          compress(data.values, data.rows, data.cols, data.type, compress_config(cfg, b_r));
      const auto bytes = write_container(result.container);
      const double c_sec = seconds_since(t0);
      const auto t1 = std::chrono::steady_clock::now();
      const auto recon = decompress(read_container(bytes), cfg.threads);
      const double d_sec = seconds_since(t1);
      out << metrics_csv_row(data.source, b_r, evaluate(data, recon, bytes.size(), c_sec, d_sec)) << '\n';
    }
    return static_cast<int>(kOk);
  });
}

int run(int argc, char** argv) {
  CLI::App app{"permez: error-bounded lossy compressor for floating-point arrays"};
  app.require_subcommand(1);
  RunConfig cfg;
  if (const char* env = std::getenv("PERMEZ_THREADS")) {
    try {
      cfg.threads = std::stoi(env);
    } catch (const std::exception&) {
      std::cerr << "error: PERMEZ_THREADS must be an integer\n";
      return kUsage;
    }
  }
  std::string dims;
  std::string block_size;
  std::string grid;
  std::string bounds;
  std::string endian = "little";

  auto add_input = [&](CLI::App* sub) {
    sub->add_option("--input", cfg.input, "Input file");
    sub->add_option("--format", cfg.spec.format, "segy | raw32 | raw64 | gen:<kind>");
    sub->add_option("--dims", dims, "Grid dims RxC for raw and generated input");
    sub->add_option("--endian", endian, "Byte order of raw input")->check(CLI::IsMember({"little", "big"}));
    sub->add_option("--seed", cfg.seed, "Seed for sampling and generators");
    sub->add_option("--threads", cfg.threads, "Worker threads (env PERMEZ_THREADS)");
  };
  auto add_tuning = [&](CLI::App* sub) {
    sub->add_option("--rel-error", cfg.rel_error, "Pointwise relative error bound");
    sub->add_option("--block-size", block_size, "Block size RxC");
    sub->add_option("--partition-rows", cfg.partition_rows, "Rows per parallel partition");
    sub->add_option("--sample-rate", cfg.sample_rate, "Fraction of tiles sampled for training");
    sub->add_option("--coverage-target", cfg.coverage_target, "Coverage required when choosing m");
    sub->add_option("--grid", grid, "Hyperparameter grid, e.g. \"lr:1e-3,1e-4;l2:0,1e-4\"");
    sub->add_option("--load-model", cfg.load_model, "Reuse a saved model instead of training");
  };

  auto* compress_cmd = app.add_subcommand("compress", "Compress a dataset into a container");
  add_input(compress_cmd);
  add_tuning(compress_cmd);
  compress_cmd->add_option("--output", cfg.output, "Container path");
  compress_cmd->add_option("--save-model", cfg.save_model, "Write the trained model here");

  auto* decompress_cmd = app.add_subcommand("decompress", "Decompress a container to a raw array");
  add_input(decompress_cmd);
  decompress_cmd->add_option("--output", cfg.output, "Raw output path");
  decompress_cmd->add_option("--original", cfg.original, "Original data to verify against");

  auto* bench_cmd = app.add_subcommand("bench", "Sweep error bounds and print metrics");
  add_input(bench_cmd);
  add_tuning(bench_cmd);
  bench_cmd->add_option("--bench-bounds", bounds, "Comma-separated relative error bounds");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  return guarded(std::cerr, [&] {
    if (!dims.empty()) std::tie(cfg.spec.rows, cfg.spec.cols) = parse_dims(dims);
    if (!block_size.empty()) std::tie(cfg.block_rows, cfg.block_cols) = parse_dims(block_size);
    if (!grid.empty()) cfg.grid = parse_grid(grid);
    if (!bounds.empty()) cfg.bench_bounds = parse_bounds(bounds);
    cfg.spec.endian = endian == "big" ? Endian::Big : Endian::Little;
    if (compress_cmd->parsed()) return cmd_compress(cfg, std::cout, std::cerr);
    if (decompress_cmd->parsed()) return cmd_decompress(cfg, std::cout, std::cerr);
    return cmd_bench(cfg, std::cout, std::cerr);
  });
}

}  // namespace permez::cli
