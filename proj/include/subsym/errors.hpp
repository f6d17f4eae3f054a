#pragma once

#include <stdexcept>
#include <string>

namespace subsym {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& msg, std::size_t pos)
      : Error(msg + " at position " + std::to_string(pos)), pos_(pos) {}
  std::size_t position() const { return pos_; }

 private:
  std::size_t pos_;
};

// Malformed system-definition text; the message carries the source and line.
class FormatError : public Error {
 public:
  using Error::Error;
};

class UnknownSymbol : public Error {
 public:
  UnknownSymbol(const std::string& name, std::size_t pos)
      : Error("unknown symbol '" + name + "' at position " + std::to_string(pos)), name_(name) {}
  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

// Raised when a derivative would exceed a pinned truncation order.
class TruncationOverflow : public Error {
 public:
  using Error::Error;
};

class UnsupportedForm : public Error {
 public:
  using Error::Error;
};

class SingularJacobian : public Error {
 public:
  using Error::Error;
};

class RankDeficient : public Error {
 public:
  using Error::Error;
};

class NonFunctionFluxes : public Error {
 public:
  using Error::Error;
};

class NotAConservationLaw : public Error {
 public:
  NotAConservationLaw(const std::string& msg, std::string residual)
      : Error(msg), residual_(std::move(residual)) {}
  const std::string& residual() const { return residual_; }

 private:
  std::string residual_;
};

class PreconditionViolation : public Error {
 public:
  using Error::Error;
};

class NonlinearParameter : public Error {
 public:
  using Error::Error;
};

}  // namespace subsym
