#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ndc {

enum class ErrorCode {
  InvalidKind,
  InvalidDims,
  NoConstraints,
  ShapeError,
  TooFewPoints,
  OpenMeshError,
  EmptyMesh,
  BadMagic,
  VersionMismatch,
  ShapeMismatch,
  TruncatedPayload,
  ParseError,
  InvalidTransform,
  InvalidConfig,
  TrainingDiverged,
  IoError,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so the
/// CLI can map it onto an exit status without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace ndc
