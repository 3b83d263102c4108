#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>

namespace dcycle {

// Every number written to an artifact goes through these so that output
// bytes do not depend on last-bit floating differences.
inline constexpr int kSignificantDigits = 9;

inline std::string format_number(double x) {
    if (x == 0.0) return "0";  // folds -0
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.*g", kSignificantDigits, x);
    return buf;
}

inline double round_significant(double x) {
    if (!std::isfinite(x) || x == 0.0) return x == 0.0 ? 0.0 : x;
    return std::strtod(format_number(x).c_str(), nullptr);
}

}  // namespace dcycle
