#pragma once

#include <stdexcept>
#include <string>

namespace geopix {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input does not satisfy an operation's precondition.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

// Degenerate geometry (collinear hull, zero-size rectangle, ...).
class DegenerateGeometry : public Error {
 public:
  using Error::Error;
};

// Instance exceeds what an exact solver is allowed to handle.
class SizeLimitError : public Error {
 public:
  using Error::Error;
};

// A randomized generator ran out of retries.
class GenerationFailure : public Error {
 public:
  GenerationFailure(const std::string& what, unsigned long long seed)
      : Error(what + " (seed " + std::to_string(seed) + ")"), seed_(seed) {}
  unsigned long long seed() const noexcept { return seed_; }

 private:
  unsigned long long seed_;
};

// Image -> structure recovery failed.
class ExtractionFailure : public Error {
 public:
  using Error::Error;
};

// Dataset files missing, corrupt or inconsistent.
class DatasetError : public Error {
 public:
  using Error::Error;
};

}  // namespace geopix
