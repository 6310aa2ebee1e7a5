#pragma once

#include <stdexcept>
#include <string>

namespace impg {

// Root of every error thrown by the library. The CLI maps subclasses onto
// distinct exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed encodings, corpora, tables, or other input data.
class DataError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration values or missing configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A caller broke an operation's documented precondition.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// Rejection sampling ran out of attempts without an accepted candidate.
class SamplingError : public Error {
 public:
  using Error::Error;
};

}  // namespace impg
