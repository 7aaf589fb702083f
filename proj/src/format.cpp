#include "hnoma/format.hpp"

#include "hnoma/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>

namespace hnoma {
namespace {

std::string fixed_digits(double value, int decimals) {
    char buf[512];
    const auto res =
        std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::fixed, decimals);
    if (res.ec != std::errc{}) throw InternalError("rate formatting failed");
    return std::string(buf, res.ptr);
}

} // namespace

std::string format_rate(double value) {
    if (!(value >= 0.0) || !std::isfinite(value))
        throw InternalError("rates must be finite and non-negative");
    if (value == 0.0) return "0";

    // Fixed notation carrying six significant digits: the decimal count tracks
    // the magnitude so 0.5 prints as 0.500000 and 1e-4 as 0.000100000.
    auto decimals_for = [](double v) {
        int d = 5 - static_cast<int>(std::floor(std::log10(v)));
        return std::clamp(d, 0, 40);
    };

    int decimals = decimals_for(value);
    std::string out = fixed_digits(value, decimals);

    // Rounding can bump the magnitude (0.0999995 -> 0.100000 wants one fewer
    // decimal); reformat once against the rounded value.
    const double parsed = std::strtod(out.c_str(), nullptr);
    if (parsed > 0.0) {
        const int adjusted = decimals_for(parsed);
        if (adjusted != decimals) out = fixed_digits(value, adjusted);
    }
    return out;
}

} // namespace hnoma
