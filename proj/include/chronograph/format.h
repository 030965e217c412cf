#ifndef CHRONOGRAPH_FORMAT_H_
#define CHRONOGRAPH_FORMAT_H_

#include <charconv>
#include <string>
#include <system_error>

namespace chronograph {

// Shortest decimal form that round-trips to the same double.
inline std::string format_double(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) return "nan";
  return std::string(buf, end);
}

}  // namespace chronograph

#endif  // CHRONOGRAPH_FORMAT_H_
