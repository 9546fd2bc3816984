#pragma once

#include <string>

namespace sr1 {

enum class Format { csv, json };

/// Shortest decimal that round-trips to the same double.
std::string format_double(double v);

/// Accepts "csv" or "json".
Format parse_format(const std::string& name);

}  // namespace sr1
