#pragma once

#include <stdexcept>
#include <string>

namespace otas {

// Process exit codes used by the command-line tool.
enum class ExitCode : int {
  kOk = 0,
  kInternal = 1,
  kValidation = 2,
  kFormat = 3,
  kRefiner = 4,
};

class Error : public std::exception {
 public:
  Error(std::string message, ExitCode code);

  const char* what() const noexcept override { return full_.c_str(); }
  const std::string& message() const { return message_; }
  const std::string& stage() const { return stage_; }
  ExitCode exit_code() const { return code_; }

  // Tags the error with the pipeline stage it surfaced from. The first tag wins.
  void set_stage(std::string stage);

 private:
  void rebuild();

  std::string message_;
  std::string stage_;
  std::string full_;
  ExitCode code_;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(std::string message) : Error(std::move(message), ExitCode::kValidation) {}
};

// No usable geometry (e.g. a depth map without a single valid cell).
class EmptyGeometryError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Cross-references between containers do not line up (index out of range).
class IntegrityError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class FormatError : public Error {
 public:
  explicit FormatError(std::string message) : Error(std::move(message), ExitCode::kFormat) {}
};

class IoError : public FormatError {
 public:
  using FormatError::FormatError;
};

class RefinerError : public Error {
 public:
  RefinerError(std::string identifier, std::string message);
  const std::string& identifier() const { return identifier_; }

 private:
  std::string identifier_;
};

}  // namespace otas
