#pragma once

#include <charconv>
#include <string>

namespace hnoma {

// Locale-independent shortest round-trip decimal form.
inline std::string format_double(double v) {
    char buf[48];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

// Fixed-notation with six significant digits, used for rate columns.
// 0.0123456 -> "0.0123456", 1.0 -> "1.00000", 0 -> "0".
std::string format_rate(double v);

} // namespace hnoma
