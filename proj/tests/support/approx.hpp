#pragma once

#include <cmath>
#include <ostream>

namespace winstitch::testing {

// Absolute-tolerance comparand: CHECK(x == near(y, tol)).
struct Near {
    double value;
    double tolerance;
};

inline bool operator==(double lhs, const Near& rhs) {
    return std::abs(lhs - rhs.value) <= rhs.tolerance;
}
inline bool operator==(const Near& lhs, double rhs) { return rhs == lhs; }
inline std::ostream& operator<<(std::ostream& os, const Near& n) {
    return os << n.value << " +/- " << n.tolerance;
}

inline Near near(double value, double tolerance) { return {value, tolerance}; }

// Relative-tolerance comparand: CHECK(x == near_rel(y, rel)).
struct NearRel {
    double value;
    double relative;
};

inline bool operator==(double lhs, const NearRel& rhs) {
    return std::abs(lhs - rhs.value) <= rhs.relative * std::abs(rhs.value);
}
inline bool operator==(const NearRel& lhs, double rhs) { return rhs == lhs; }
inline std::ostream& operator<<(std::ostream& os, const NearRel& n) {
    return os << n.value << " (rel " << n.relative << ")";
}

inline NearRel near_rel(double value, double relative) { return {value, relative}; }

} // namespace winstitch::testing
