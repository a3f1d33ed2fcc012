#include "countfuse/error.hpp"

namespace countfuse {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MissingFile: return "MissingFile";
    case ErrorKind::MalformedRow: return "MalformedRow";
    case ErrorKind::UnknownLabel: return "UnknownLabel";
    case ErrorKind::DuplicateId: return "DuplicateId";
    case ErrorKind::EmptyDataset: return "EmptyDataset";
    case ErrorKind::DegenerateSplit: return "DegenerateSplit";
    case ErrorKind::MissingSidecarEntry: return "MissingSidecarEntry";
    case ErrorKind::EmptyCorpus: return "EmptyCorpus";
    case ErrorKind::BadMagic: return "BadMagic";
    case ErrorKind::DimMismatch: return "DimMismatch";
    case ErrorKind::TruncatedFile: return "TruncatedFile";
    case ErrorKind::MissingEmbedding: return "MissingEmbedding";
    case ErrorKind::EmptyBatch: return "EmptyBatch";
    case ErrorKind::EmptyTrainSet: return "EmptyTrainSet";
    case ErrorKind::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorKind::VersionMismatch: return "VersionMismatch";
    case ErrorKind::CorruptPayload: return "CorruptPayload";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::EmptyGolds: return "EmptyGolds";
    case ErrorKind::AllZeroDifferences: return "AllZeroDifferences";
    case ErrorKind::LayoutMismatch: return "LayoutMismatch";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

RowError::RowError(ErrorKind kind, std::size_t line_no, std::string value,
                   const std::string& message)
    : Error(kind, "line " + std::to_string(line_no) + ": " + message),
      line_no_(line_no),
      value_(std::move(value)) {}

}  // namespace countfuse
