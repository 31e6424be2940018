#pragma once

#include <stdexcept>
#include <string>

namespace ae {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Precondition violated by the caller (bad dimension, non-finite input, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Configuration rejected at construction or load time.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Training diverged (non-finite loss or parameters).
class DivergenceError : public Error {
 public:
  using Error::Error;
};

namespace detail {
inline void require(bool cond, const std::string& what) {
  if (!cond) throw InvalidArgument(what);
}
}  // namespace detail

}  // namespace ae
