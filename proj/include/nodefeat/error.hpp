#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace nodefeat {

/// Failure categories surfaced by the library. The CLI prints the category
/// name as the first token of its one-line error report.
enum class ErrorKind {
  MissingFile,
  MalformedDataset,
  NoNodeLabels,
  EmptyPartition,
  IndexOutOfRange,
  EmptyInput,
  ShapeMismatch,
  UnsupportedPrimitive,
  DivergedTraining,
  EmptyMatrix,
  DegenerateCloud,
  NoDonorAvailable,
  EmptyNeighborSet,
  ZeroReference,
  EmptyTestSet,
  UnknownKey,
  InvalidValue,
  UnreadableFile,
  IoFailure,
  InvalidArgument,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MissingFile: return "MissingFile";
    case ErrorKind::MalformedDataset: return "MalformedDataset";
    case ErrorKind::NoNodeLabels: return "NoNodeLabels";
    case ErrorKind::EmptyPartition: return "EmptyPartition";
    case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::UnsupportedPrimitive: return "UnsupportedPrimitive";
    case ErrorKind::DivergedTraining: return "DivergedTraining";
    case ErrorKind::EmptyMatrix: return "EmptyMatrix";
    case ErrorKind::DegenerateCloud: return "DegenerateCloud";
    case ErrorKind::NoDonorAvailable: return "NoDonorAvailable";
    case ErrorKind::EmptyNeighborSet: return "EmptyNeighborSet";
    case ErrorKind::ZeroReference: return "ZeroReference";
    case ErrorKind::EmptyTestSet: return "EmptyTestSet";
    case ErrorKind::UnknownKey: return "UnknownKey";
    case ErrorKind::InvalidValue: return "InvalidValue";
    case ErrorKind::UnreadableFile: return "UnreadableFile";
    case ErrorKind::IoFailure: return "IoFailure";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace nodefeat
