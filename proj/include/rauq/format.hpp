#pragma once

#include <charconv>
#include <string>
#include <system_error>

namespace rauq {

// Shortest decimal text that parses back to the identical value.
template <typename Float>
void append_number(std::string& out, Float value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc{}) end = buf;
  out.append(buf, end);
}

template <typename Float>
std::string format_number(Float value) {
  std::string s;
  append_number(s, value);
  return s;
}

}  // namespace rauq
