#ifndef CHRONOGRAPH_ERRORS_H_
#define CHRONOGRAPH_ERRORS_H_

#include <cstdint>
#include <stdexcept>
#include <string>

namespace chronograph {

// Base for every error the library raises deliberately. Anything else that
// escapes (bad_alloc, filesystem_error, ...) is treated as internal.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad user input: unreadable files, schema violations, invalid flags.
class InputError : public Error {
 public:
  using Error::Error;
};

class EmptyCorpusError : public InputError {
 public:
  EmptyCorpusError() : InputError("empty corpus") {}
};

// Malformed XML in a dump. `offset` is the byte offset into the stream.
class XmlError : public InputError {
 public:
  XmlError(const std::string& what, std::uint64_t offset)
      : InputError(what + " at byte " + std::to_string(offset)),
        offset_(offset) {}
  std::uint64_t offset() const { return offset_; }

 private:
  std::uint64_t offset_;
};

// Year or index outside the valid domain.
class RangeError : public Error {
 public:
  using Error::Error;
};

class CorruptionError : public Error {
 public:
  using Error::Error;
};

class UnsupportedFormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace chronograph

#endif  // CHRONOGRAPH_ERRORS_H_
