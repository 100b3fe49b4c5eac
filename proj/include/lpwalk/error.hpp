#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lpwalk {

/// Raised when a request would exceed the configured memory cap.
class ResourceLimitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Default engine memory cap, in count of doubles.
inline constexpr std::size_t kDefaultMemCap = 200'000'000;

/// Reads LPWALK_MEM_CAP from the environment, falling back to kDefaultMemCap.
std::size_t memory_cap();

}  // namespace lpwalk
