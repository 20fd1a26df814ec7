#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace exrec {

/// Base of every exception the library throws. `exit_code()` is the CLI
/// status the error maps to.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual int exit_code() const noexcept { return 1; }
};

class ArgumentError : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

class EmptyQueryError : public Error {
 public:
  EmptyQueryError() : Error("query contains no indexable terms") {}
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 2; }
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::int64_t byte_offset)
      : Error(what + " at byte offset " + std::to_string(byte_offset)),
        offset_(byte_offset) {}
  std::int64_t byte_offset() const noexcept { return offset_; }
  int exit_code() const noexcept override { return 3; }

 private:
  std::int64_t offset_;
};

class IntegrityError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 4; }
};

}  // namespace exrec
