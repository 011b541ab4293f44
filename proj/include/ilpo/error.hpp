#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace ilpo {

// Argument outside the mathematical domain of an operation (index or angle ranges).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Incompatible tensor shapes, channel counts or sizes.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Iterative numerical procedure failed to converge.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed voxel or filter file. Carries the offending field and, for binary
// files, the byte offset at which parsing stopped.
class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& field, std::int64_t offset, const std::string& what)
      : std::runtime_error(what), field_(field), offset_(offset) {}

  const std::string& field() const noexcept { return field_; }
  std::int64_t offset() const noexcept { return offset_; }

 private:
  std::string field_;
  std::int64_t offset_;
};

// File could not be opened, read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Backward called with a tape that was already consumed or does not match.
class TapeError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace ilpo
