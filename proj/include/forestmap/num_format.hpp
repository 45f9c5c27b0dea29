#pragma once

#include <charconv>
#include <cstdio>
#include <string>

namespace forestmap {

// Shortest decimal representation that parses back to the same double.
inline std::string format_double_exact(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

// Fixed significant-digit formatting (plot CSV uses 9).
inline std::string format_double_sig(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*g", digits, v);
    return std::string(buf);
}

// Round a value to what it becomes after a 9-significant-digit text round
// trip. The synthetic generator quantizes rasters and plot values this way so
// CSV output reproduces the in-memory data exactly.
inline double quantize_sig9(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    double out = 0.0;
    std::from_chars(buf, buf + sizeof(buf), out);
    return out;
}

} // namespace forestmap
