#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace countfuse {

enum class ErrorKind {
  MissingFile,
  MalformedRow,
  UnknownLabel,
  DuplicateId,
  EmptyDataset,
  DegenerateSplit,
  MissingSidecarEntry,
  EmptyCorpus,
  BadMagic,
  DimMismatch,
  TruncatedFile,
  MissingEmbedding,
  EmptyBatch,
  EmptyTrainSet,
  NonFiniteLoss,
  VersionMismatch,
  CorruptPayload,
  LengthMismatch,
  EmptyGolds,
  AllZeroDifferences,
  LayoutMismatch,
  InvalidArgument,
  IoError,
};

std::string_view to_string(ErrorKind kind);

// Every failure raised by the library carries a kind so callers (and tests)
// can branch on the contract case without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Row-level parse failure; line numbers are 1-based physical lines.
class RowError : public Error {
 public:
  RowError(ErrorKind kind, std::size_t line_no, std::string value,
           const std::string& message);

  std::size_t line_no() const noexcept { return line_no_; }
  const std::string& value() const noexcept { return value_; }

 private:
  std::size_t line_no_;
  std::string value_;
};

}  // namespace countfuse
