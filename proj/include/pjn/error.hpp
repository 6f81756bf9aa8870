#pragma once

#include <stdexcept>
#include <string>

namespace pjn {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A query box or rectangle leaves the field domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Zero-measure region, empty candidate set and similar.
class DegenerateInput : public Error {
 public:
  using Error::Error;
};

/// A parameter lies outside the admissible range of an operation.
class RangeError : public Error {
 public:
  using Error::Error;
};

/// Malformed file or header.
class FormatError : public Error {
 public:
  using Error::Error;
};

namespace detail {

inline void require(bool ok, const std::string& what) {
  if (!ok) throw RangeError(what);
}

}  // namespace detail
}  // namespace pjn
