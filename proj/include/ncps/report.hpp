#pragma once

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

namespace ncps {

/// One named numeric check. Reports are plain lists of these.
struct Check {
    std::string name;
    double expected = 0.0;
    double measured = 0.0;
    double tol = 0.0;
    bool pass = false;
};

inline Check make_check(std::string name, double expected, double measured, double tol) {
    const bool ok = std::isfinite(measured) && std::abs(measured - expected) <= tol;
    return Check{std::move(name), expected, measured, tol, ok};
}

inline std::string format_number(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

inline bool all_pass(const std::vector<Check>& checks) {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

inline void sort_by_name(std::vector<Check>& checks) {
    std::stable_sort(checks.begin(), checks.end(),
                     [](const Check& a, const Check& b) { return a.name < b.name; });
}

}  // namespace ncps
