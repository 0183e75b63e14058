#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace paracap {

/// Process exit codes shared by the library's error types and the CLI.
enum class ErrorCode : int {
  Ok = 0,
  Usage = 2,
  Parse = 3,
  DataMismatch = 4,
  Numeric = 5,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const { return code_; }

private:
  ErrorCode code_;
};

/// Syntax or semantic error in an input text, with a 1-based location.
class ParseError : public Error {
public:
  ParseError(const std::string& source, std::size_t line, std::size_t column,
             const std::string& message);

  const std::string& source() const { return source_; }
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }
  const std::string& message() const { return message_; }

private:
  std::string source_;
  std::size_t line_;
  std::size_t column_;
  std::string message_;
};

class DataError : public Error {
public:
  explicit DataError(const std::string& what) : Error(ErrorCode::DataMismatch, what) {}
};

class NumericError : public Error {
public:
  explicit NumericError(const std::string& what) : Error(ErrorCode::Numeric, what) {}
};

class UsageError : public Error {
public:
  explicit UsageError(const std::string& what) : Error(ErrorCode::Usage, what) {}
};

} // namespace paracap
