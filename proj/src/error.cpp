#include "lpwalk/error.hpp"

#include <charconv>
#include <cstdlib>
#include <cstring>
#include <stdexcept>

namespace lpwalk {

std::size_t memory_cap() {
  const char* env = std::getenv("LPWALK_MEM_CAP");
  if (env == nullptr || *env == '\0') return kDefaultMemCap;
  std::size_t cap = 0;
  const char* end = env + std::strlen(env);
  const auto [ptr, ec] = std::from_chars(env, end, cap);
  if (ec != std::errc{} || ptr != end || cap == 0) {
    throw std::invalid_argument(std::string("LPWALK_MEM_CAP must be a positive integer, got '") +
                                env + "'");
  }
  return cap;
}

}  // namespace lpwalk
