#pragma once

#include <stdexcept>
#include <string>

namespace berrypick {

// Invalid argument values (window sizes, empty clouds, mismatched dims).
struct ParameterError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Input violates a documented data contract (missing fields, mismatched ids).
struct ContractError : std::logic_error {
  using std::logic_error::logic_error;
};

struct InsufficientDataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RegistrationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GeometryError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// No ripe instance to target.
struct NoTargetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GenerationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed or missing input documents / artifacts.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  IoError(const std::string &path, const std::string &what)
      : std::runtime_error(path + ": " + what), path_(path) {}
  const std::string &path() const noexcept { return path_; }

private:
  std::string path_;
};

} // namespace berrypick
