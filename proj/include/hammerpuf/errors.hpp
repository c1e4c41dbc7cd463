#pragma once

#include <stdexcept>
#include <string>

namespace hammerpuf {

/// Invalid configuration, flags, or file contents. Maps to CLI exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace hammerpuf
