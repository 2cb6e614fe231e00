#pragma once

#include <stdexcept>
#include <string>

namespace permez {

enum class ErrorKind {
  // input validation
  NonFiniteInput,
  InvalidArgument,
  // transform
  DegenerateBlock,
  SubnormalMinimum,
  // predictor / trainer
  DivergedTraining,
  SweepExhausted,
  EmptyDataset,
  TooFewBlocks,
  // quantizer / entropy coder
  BalanceFlagNotDequantizable,
  DegenerateAlphabet,
  UnassignedCode,
  TruncatedStream,
  InvalidPrefix,
  BalanceUnderflow,
  // container
  BadMagic,
  UnsupportedVersion,
  Corrupt,
  // ingest
  Io,
  UnsupportedFormatCode,
  TruncatedFile,
  InconsistentTraceLength,
  SizeMismatch,
  DimensionMismatch,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace permez
