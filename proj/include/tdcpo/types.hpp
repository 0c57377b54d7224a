#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <limits>

namespace tdcpo {

// Clock time or duration in minutes since midnight.
using Minutes = double;
using NodeId = std::uint32_t;
using EdgeId = std::uint32_t;

inline constexpr NodeId kInvalidNode = std::numeric_limits<NodeId>::max();
inline constexpr EdgeId kInvalidEdge = std::numeric_limits<EdgeId>::max();

// Absolute tolerance for every time comparison.
inline constexpr Minutes kTimeTolerance = 1e-9;

inline constexpr Minutes kInfiniteTime = std::numeric_limits<Minutes>::infinity();

inline bool time_leq(Minutes a, Minutes b) { return a <= b + kTimeTolerance; }

/// Rounds to the nearest value with at most six fractional decimal digits, returning
/// the double a decimal parser would produce for that text. Serialized files store
/// times at this precision, so quantized values survive a save/load cycle unchanged.
inline double quantize_micro(double value) {
    char buffer[64];
    std::snprintf(buffer, sizeof buffer, "%.6f", value);
    double out = std::strtod(buffer, nullptr);
    return out == 0.0 ? 0.0 : out;  // drop negative zero
}

}  // namespace tdcpo
