#pragma once

#include <stdexcept>
#include <string>

namespace cafbp {

enum class Errc {
  MalformedHeader,
  UnsupportedColorSpace,
  TruncatedFrame,
  SizeMismatch,
  DimensionMismatch,
  ThresholdOrderInvalid,
  BlockTooSmall,
  UnsupportedSize,
  NotPowerOfTwo,
  EmptyTrainingSet,
  ShapeMismatch,
  ReservedRunCollision,
  TruncatedStream,
  MalformedStream,
  EmptySequence,
  IoFailure,
  InvalidArgument,
};

const char* to_string(Errc code) noexcept;

// Every library failure surfaces as this exception; code() identifies the
// contract that was violated.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace cafbp
