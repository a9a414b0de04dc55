#pragma once

#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

namespace specpot::detail {

// 17 significant digits: enough to round-trip any double exactly.
inline std::string format_real(double x) {
    if (x == -std::numeric_limits<double>::infinity())
        return "-inf";
    if (x == std::numeric_limits<double>::infinity())
        return "inf";
    if (std::isnan(x))
        return "nan";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

}  // namespace specpot::detail
