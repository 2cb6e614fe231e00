#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "permez/error.hpp"
#include "permez/ingest.hpp"
#include "permez/trainer.hpp"

namespace permez::cli {

// Process exit codes, one per error family.
enum ExitCode : int {
  kOk = 0,
  kInternal = 1,
  kUsage = 2,         // bad flags or configuration values
  kIo = 3,            // files cannot be opened, read or written
  kInput = 4,         // malformed or unsupported input data
  kContainer = 5,     // bad magic, version, or corrupt container
  kTraining = 6,      // training could not produce a model
  kBoundViolated = 7  // verification against --original failed
};

int exit_code_for(ErrorKind kind) noexcept;

struct InputSpec {
  std::string format = "raw32";  // segy | raw32 | raw64 | gen:<kind>
  std::size_t rows = 0;
  std::size_t cols = 0;
  Endian endian = Endian::Little;
};

struct RunConfig {
  std::filesystem::path input;
  std::filesystem::path output;
  std::filesystem::path original;
  InputSpec spec;
  double rel_error = 1e-3;
  std::size_t block_rows = 256;
  std::size_t block_cols = 256;
  std::size_t partition_rows = 32;
  double sample_rate = kDefaultSampleRate;
  double coverage_target = kDefaultCoverageTarget;
  std::vector<HyperConfig> grid = default_grid();
  int threads = 1;
  std::uint64_t seed = 0;
  std::filesystem::path save_model;
  std::filesystem::path load_model;
  std::vector<double> bench_bounds = {1e-2, 1e-3, 1e-4};
};

// Throws InvalidArgument.
void validate(const RunConfig& cfg);
std::vector<HyperConfig> parse_grid(const std::string& text);
std::pair<std::size_t, std::size_t> parse_dims(const std::string& text);
std::vector<double> parse_bounds(const std::string& text);

Dataset load_input(const RunConfig& cfg);

// Each returns an exit code; results go to `out`, diagnostics to `err`.
int cmd_compress(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_decompress(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_bench(const RunConfig& cfg, std::ostream& out, std::ostream& err);

int run(int argc, char** argv);

}  // namespace permez::cli
