#pragma once

#include <stdexcept>
#include <string>

namespace pickopt {

// Invalid configuration values (bad ranges, non-positive dimensions, ...).
// CLI exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Unparseable or version-incompatible persisted data. CLI exit code 3.
class DataFormatError : public std::runtime_error {
 public:
  explicit DataFormatError(const std::string& what)
      : std::runtime_error(what) {}
};

// Degenerate geometry (too few points, collinear input, out-of-bounds query).
class GeometryError : public std::runtime_error {
 public:
  explicit GeometryError(const std::string& what) : std::runtime_error(what) {}
};

// Anything else that stops a run (divergence, missing segment, ...).
// CLI exit code 4.
class PipelineError : public std::runtime_error {
 public:
  explicit PipelineError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace pickopt
