#include "sr1track/format.hpp"

#include <charconv>

#include "sr1track/errors.hpp"

namespace sr1 {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

Format parse_format(const std::string& name) {
  if (name == "csv") return Format::csv;
  if (name == "json") return Format::json;
  fail(errc::invalid_argument, "unknown output format '" + name + "' (expected csv or json)");
}

}  // namespace sr1
