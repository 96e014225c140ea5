#pragma once
// Locale-independent floating-point formatting shared by the CSV writers and
// text reports: '.' decimal point always, significant-digit control.

#include <charconv>
#include <string>

namespace msfde {

// General (printf %g style) format with up to `precision` significant
// digits; never consults the global locale.
inline std::string format_double(double x, int precision = 17) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), x,
                                   std::chars_format::general, precision);
    return std::string(buf, res.ptr);
}

} // namespace msfde
