#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sctree {

// Base for every error the library reports. Callers that only care about
// "something went wrong in the pipeline" catch this.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input file. `line` is 1-based; 0 when the position is unknown.
class ParseError : public Error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : Error(source + (line ? ":" + std::to_string(line) : std::string()) + ": " + what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// A phone that is not in the feature table.
class UnknownPhoneError : public Error {
 public:
  explicit UnknownPhoneError(const std::string& phone)
      : Error("unknown phone '" + phone + "'"), phone_(phone) {}
  const std::string& phone() const { return phone_; }

 private:
  std::string phone_;
};

}  // namespace sctree
