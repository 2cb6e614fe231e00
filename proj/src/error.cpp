#include "permez/error.hpp"

namespace permez {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::NonFiniteInput: return "NonFiniteInput";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::DegenerateBlock: return "DegenerateBlock";
    case ErrorKind::SubnormalMinimum: return "SubnormalMinimum";
    case ErrorKind::DivergedTraining: return "DivergedTraining";
    case ErrorKind::SweepExhausted: return "SweepExhausted";
    case ErrorKind::EmptyDataset: return "EmptyDataset";
    case ErrorKind::TooFewBlocks: return "TooFewBlocks";
    case ErrorKind::BalanceFlagNotDequantizable: return "BalanceFlagNotDequantizable";
    case ErrorKind::DegenerateAlphabet: return "DegenerateAlphabet";
    case ErrorKind::UnassignedCode: return "UnassignedCode";
    case ErrorKind::TruncatedStream: return "TruncatedStream";
    case ErrorKind::InvalidPrefix: return "InvalidPrefix";
    case ErrorKind::BalanceUnderflow: return "BalanceUnderflow";
    case ErrorKind::BadMagic: return "BadMagic";
    case ErrorKind::UnsupportedVersion: return "UnsupportedVersion";
    case ErrorKind::Corrupt: return "Corrupt";
    case ErrorKind::Io: return "Io";
    case ErrorKind::UnsupportedFormatCode: return "UnsupportedFormatCode";
    case ErrorKind::TruncatedFile: return "TruncatedFile";
    case ErrorKind::InconsistentTraceLength: return "InconsistentTraceLength";
    case ErrorKind::SizeMismatch: return "SizeMismatch";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
  }
  return "Unknown";
}

}  // namespace permez
