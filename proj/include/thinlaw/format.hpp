#pragma once

#include <charconv>
#include <cstdint>
#include <string>

namespace thinlaw {

/// Shortest round-trip decimal form of a double (std::to_chars). Used for
/// CSV cells, metric labels, and pattern files so output is byte-stable.
inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::string format_u64(std::uint64_t v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace thinlaw
