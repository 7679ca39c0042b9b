#pragma once

#include <stdexcept>
#include <string>

namespace cftrack {

// Base error. `code()` is a short dotted identifier suitable for scripts;
// what() carries the human-readable message.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

class ShapeError : public Error {
 public:
  explicit ShapeError(const std::string& message) : Error("shape", message) {}
};

class DegenerateInputError : public Error {
 public:
  explicit DegenerateInputError(const std::string& message)
      : Error("degenerate_input", message) {}
};

class ParseError : public Error {
 public:
  explicit ParseError(const std::string& message) : Error("parse", message) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& message) : Error("config", message) {}
};

class SamplingError : public Error {
 public:
  explicit SamplingError(const std::string& message) : Error("sampling", message) {}
};

class NonFiniteGradientError : public Error {
 public:
  NonFiniteGradientError(std::string tensor, const std::string& message)
      : Error("optimizer.non_finite_gradient", message), tensor_(std::move(tensor)) {}

  const std::string& tensor() const noexcept { return tensor_; }

 private:
  std::string tensor_;
};

class TrainingError : public Error {
 public:
  TrainingError(long step, const std::string& message)
      : Error("training.non_finite_loss", message), step_(step) {}

  long step() const noexcept { return step_; }

 private:
  long step_;
};

enum class CheckpointErrorKind { kBadMagic, kUnsupportedVersion, kTruncated, kManifest, kChecksum, kIo };

class CheckpointError : public Error {
 public:
  CheckpointError(CheckpointErrorKind kind, const std::string& message)
      : Error(code_for(kind), message), kind_(kind) {}

  CheckpointErrorKind kind() const noexcept { return kind_; }

 private:
  static std::string code_for(CheckpointErrorKind kind) {
    switch (kind) {
      case CheckpointErrorKind::kBadMagic: return "checkpoint.bad_magic";
      case CheckpointErrorKind::kUnsupportedVersion: return "checkpoint.version";
      case CheckpointErrorKind::kTruncated: return "checkpoint.truncated";
      case CheckpointErrorKind::kManifest: return "checkpoint.manifest";
      case CheckpointErrorKind::kChecksum: return "checkpoint.checksum";
      case CheckpointErrorKind::kIo: return "checkpoint.io";
    }
    return "checkpoint";
  }

  CheckpointErrorKind kind_;
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& message) : Error("io", message) {}
};

}  // namespace cftrack
