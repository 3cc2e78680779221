#pragma once

#include <charconv>
#include <string>

namespace evtag {

// Shortest round-trip decimal form, locale independent.
inline std::string format_double(double value) {
  char buf[64];
  const auto result = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, result.ptr);
}

}  // namespace evtag
