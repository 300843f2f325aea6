#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dage {

// Every library failure derives from Error; kind() is the stable tag the CLI
// prints as `error: <kind>: <detail>`.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& detail)
      : std::runtime_error(detail), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& detail) : Error("IoError", detail) {}
};

class FormatError : public Error {
 public:
  FormatError(std::size_t line, const std::string& detail)
      : Error("FormatError", "line " + std::to_string(line) + ": " + detail), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class UnknownId : public Error {
 public:
  explicit UnknownId(const std::string& detail) : Error("UnknownId", detail) {}
};

class UnknownName : public Error {
 public:
  explicit UnknownName(const std::string& name)
      : Error("UnknownName", name), name_(name) {}
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t position, const std::string& expected)
      : Error("ParseError",
              "at offset " + std::to_string(position) + ": expected " + expected),
        position_(position),
        expected_(expected) {}
  std::size_t position() const noexcept { return position_; }
  const std::string& expected() const noexcept { return expected_; }

 private:
  std::size_t position_;
  std::string expected_;
};

class CycleError : public Error {
 public:
  explicit CycleError(const std::string& detail) : Error("CycleError", detail) {}
};

class ExhaustedRetries : public Error {
 public:
  explicit ExhaustedRetries(const std::string& detail) : Error("ExhaustedRetries", detail) {}
};

class ShapeMismatch : public Error {
 public:
  explicit ShapeMismatch(const std::string& detail) : Error("ShapeMismatch", detail) {}
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& detail) : Error("DomainError", detail) {}
};

class UnsupportedNegation : public Error {
 public:
  explicit UnsupportedNegation(const std::string& detail)
      : Error("UnsupportedNegation", detail) {}
};

class UnsupportedComposition : public Error {
 public:
  explicit UnsupportedComposition(const std::string& detail)
      : Error("UnsupportedComposition", detail) {}
};

class FewerThanTwo : public Error {
 public:
  explicit FewerThanTwo(const std::string& detail) : Error("FewerThanTwo", detail) {}
};

class TooFewEntities : public Error {
 public:
  explicit TooFewEntities(const std::string& detail) : Error("TooFewEntities", detail) {}
};

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& detail) : Error("UsageError", detail) {}
};

}  // namespace dage
