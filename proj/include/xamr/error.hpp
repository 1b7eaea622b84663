#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace xamr {

// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A malformed input record. Carries the 1-based line and the offending field.
class ParseError : public Error {
 public:
  ParseError(std::string source, std::size_t line, std::string field, const std::string& what)
      : Error(source + ":" + std::to_string(line) + ": field '" + field + "': " + what),
        source_(std::move(source)), line_(line), field_(std::move(field)) {}

  const std::string& source() const { return source_; }
  std::size_t line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  std::string source_;
  std::size_t line_;
  std::string field_;
};

// Two partitions (or a partition and a corpus) disagree on the mention set.
class CoverageError : public Error {
 public:
  using Error::Error;
};

}  // namespace xamr
