#pragma once

#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace polyconf {

/* Error with a stable machine-readable code; the CLI renders these as JSON
 * diagnostics on stderr. */
struct Error : std::runtime_error {
    std::string code;
    Error(std::string c, const std::string& msg)
        : std::runtime_error(c + ": " + msg), code(std::move(c)) {}
};

[[noreturn]] inline void fail(const std::string& code, const std::string& msg) {
    throw Error(code, msg);
}

/* The i-th point of color j.  Both fields are 1-based.  Points are ordered
 * color-major: all color-1 points precede all color-2 points, etc. */
struct Point {
    int color = 0;
    int index = 0;
    auto operator<=>(const Point&) const = default;
};

inline std::string to_string(const Point& p) {
    return "x[" + std::to_string(p.color) + "," + std::to_string(p.index) + "]";
}

using Tuple = std::vector<int>;  // element of N^m

inline int tuple_sum(const Tuple& t) {
    int s = 0;
    for (int v : t) s += v;
    return s;
}

inline bool tuple_leq(const Tuple& a, const Tuple& b) {
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i)
        if (a[i] > b[i]) return false;
    return true;
}

/* Number of points per color.  counts[j-1] = n_j. */
struct ColorVector {
    Tuple counts;
    int total() const { return tuple_sum(counts); }
    int colors() const { return (int)counts.size(); }
};

/* All points of a color vector in canonical (color-major) order. */
inline std::vector<Point> all_points(const ColorVector& nvec) {
    std::vector<Point> pts;
    for (int c = 1; c <= nvec.colors(); ++c)
        for (int i = 1; i <= nvec.counts[c - 1]; ++i) pts.push_back({c, i});
    return pts;
}

/* Resource caps for the GM oracle (spec defaults, CLI-overridable). */
struct Budget {
    std::size_t max_lattice_elements = 2'000'000;
    std::size_t max_interval_simplices = 10'000'000;
};

}  // namespace polyconf
