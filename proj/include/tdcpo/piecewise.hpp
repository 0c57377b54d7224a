#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "tdcpo/types.hpp"

namespace tdcpo {

struct Breakpoint {
    Minutes departure = 0.0;
    Minutes arrival = 0.0;

    friend bool operator==(const Breakpoint&, const Breakpoint&) = default;
};

enum class FifoViolationKind {
    DepartureNotIncreasing,
    ArrivalDecreasing,
};

struct FifoViolation {
    FifoViolationKind kind;
    std::size_t first;   // index of the earlier breakpoint
    std::size_t second;  // index of the later breakpoint
    Breakpoint lhs;
    Breakpoint rhs;

    std::string describe() const {
        std::ostringstream out;
        out << (kind == FifoViolationKind::ArrivalDecreasing ? "arrival decreases"
                                                             : "departures not strictly increasing")
            << " between breakpoints " << first << " (" << lhs.departure << ", " << lhs.arrival
            << ") and " << second << " (" << rhs.departure << ", " << rhs.arrival << ")";
        return out.str();
    }
};

/// Reports the first adjacent pair that breaks FIFO: departures must be strictly
/// increasing and arrivals non-decreasing.
inline std::optional<FifoViolation> validate_fifo(std::span<const Breakpoint> points) {
    for (std::size_t i = 1; i < points.size(); ++i) {
        const auto& a = points[i - 1];
        const auto& b = points[i];
        if (!(b.departure > a.departure)) {
            return FifoViolation{FifoViolationKind::DepartureNotIncreasing, i - 1, i, a, b};
        }
        if (b.arrival < a.arrival) {
            return FifoViolation{FifoViolationKind::ArrivalDecreasing, i - 1, i, a, b};
        }
    }
    return std::nullopt;
}

class InvalidFunction : public std::invalid_argument {
public:
    explicit InvalidFunction(const std::string& what, std::optional<FifoViolation> violation = {})
        : std::invalid_argument(what), violation_(violation) {}

    const std::optional<FifoViolation>& violation() const noexcept { return violation_; }

private:
    std::optional<FifoViolation> violation_;
};

/// Piecewise-linear, non-decreasing departure -> arrival map of one edge.
///
/// Between breakpoints the arrival time is interpolated linearly. Outside the
/// breakpoint range the travel time of the nearest breakpoint is held constant,
/// so a single breakpoint describes a static edge.
class ArrivalTimeFunction {
public:
    ArrivalTimeFunction() : points_{{0.0, 0.0}} {}

    explicit ArrivalTimeFunction(std::vector<Breakpoint> points) : points_(std::move(points)) {
        if (points_.empty()) throw InvalidFunction("arrival function needs at least one breakpoint");
        for (std::size_t i = 0; i < points_.size(); ++i) {
            const auto& p = points_[i];
            if (!std::isfinite(p.departure) || !std::isfinite(p.arrival)) {
                throw InvalidFunction("breakpoint " + std::to_string(i) + " is not finite");
            }
            if (p.departure < 0.0) {
                throw InvalidFunction("breakpoint " + std::to_string(i) + " has negative departure");
            }
            if (p.arrival < p.departure) {
                throw InvalidFunction("breakpoint " + std::to_string(i) + " arrives before it departs");
            }
        }
        if (auto violation = validate_fifo(points_)) {
            throw InvalidFunction("FIFO violation: " + violation->describe(), violation);
        }
    }

    static ArrivalTimeFunction constant(Minutes travel_time) {
        return ArrivalTimeFunction({{0.0, travel_time}});
    }

    std::span<const Breakpoint> breakpoints() const noexcept { return points_; }
    bool is_static() const noexcept { return points_.size() == 1; }

    Minutes arrival(Minutes departure) const {
        const auto& front = points_.front();
        const auto& back = points_.back();
        if (departure < front.departure) return departure + (front.arrival - front.departure);
        if (departure > back.departure) return departure + (back.arrival - back.departure);

        auto it = std::upper_bound(points_.begin(), points_.end(), departure,
                                   [](Minutes t, const Breakpoint& p) { return t < p.departure; });
        // it points past the last breakpoint with departure <= t
        const auto& lo = *(it - 1);
        if (lo.departure == departure || it == points_.end()) return lo.arrival;
        const auto& hi = *it;
        return (hi.arrival - lo.arrival) * ((departure - lo.departure) / (hi.departure - lo.departure)) +
               lo.arrival;
    }

    Minutes travel_time(Minutes departure) const { return arrival(departure) - departure; }

    /// Latest departure whose arrival is no later than `arrival_bound`, or nullopt
    /// when even a departure at time zero arrives too late.
    std::optional<Minutes> latest_departure(Minutes arrival_bound) const {
        const auto& front = points_.front();
        const auto& back = points_.back();
        Minutes result;
        if (arrival_bound >= back.arrival) {
            result = arrival_bound - (back.arrival - back.departure);
        } else if (arrival_bound < front.arrival) {
            result = arrival_bound - (front.arrival - front.departure);
        } else {
            // last breakpoint whose arrival is <= the bound; flat runs resolve to their right end
            auto it = std::upper_bound(points_.begin(), points_.end(), arrival_bound,
                                       [](Minutes t, const Breakpoint& p) { return t < p.arrival; });
            const auto& lo = *(it - 1);
            const auto& hi = *it;  // exists: bound < back.arrival
            result = (hi.departure - lo.departure) * ((arrival_bound - lo.arrival) / (hi.arrival - lo.arrival)) +
                     lo.departure;
        }
        if (result < 0.0) {
            if (arrival(0.0) > arrival_bound + kTimeTolerance) return std::nullopt;
            result = 0.0;
        }
        return result;
    }

    friend bool operator==(const ArrivalTimeFunction&, const ArrivalTimeFunction&) = default;

private:
    std::vector<Breakpoint> points_;
};

/// Piecewise-constant departure -> score map. Interval i is [boundaries[i], boundaries[i+1]);
/// departures outside every interval get the default score.
class ScoreFunction {
public:
    explicit ScoreFunction(double constant_score = 0.0) : default_score_(constant_score) {
        if (!(constant_score >= 0.0) || !std::isfinite(constant_score)) {
            throw InvalidFunction("score must be finite and non-negative");
        }
    }

    ScoreFunction(std::vector<Minutes> boundaries, std::vector<double> values, double default_score)
        : boundaries_(std::move(boundaries)), values_(std::move(values)), default_score_(default_score) {
        if (boundaries_.empty() != values_.empty() ||
            (!boundaries_.empty() && values_.size() + 1 != boundaries_.size())) {
            throw InvalidFunction("score function needs exactly one value per interval (boundaries - 1)");
        }
        for (std::size_t i = 0; i < boundaries_.size(); ++i) {
            if (!std::isfinite(boundaries_[i])) throw InvalidFunction("score boundary is not finite");
            if (i > 0 && !(boundaries_[i] > boundaries_[i - 1])) {
                throw InvalidFunction("score boundaries must be strictly increasing (index " +
                                      std::to_string(i) + ")");
            }
        }
        auto bad = [](double s) { return !(s >= 0.0) || !std::isfinite(s); };
        if (bad(default_score_) || std::any_of(values_.begin(), values_.end(), bad)) {
            throw InvalidFunction("scores must be finite and non-negative");
        }
    }

    double at(Minutes departure) const {
        if (boundaries_.empty() || departure < boundaries_.front() || departure >= boundaries_.back()) {
            return default_score_;
        }
        auto it = std::upper_bound(boundaries_.begin(), boundaries_.end(), departure);
        return values_[static_cast<std::size_t>(it - boundaries_.begin()) - 1];
    }

    std::span<const Minutes> boundaries() const noexcept { return boundaries_; }
    std::span<const double> values() const noexcept { return values_; }
    double default_score() const noexcept { return default_score_; }

    bool is_zero() const noexcept {
        return default_score_ == 0.0 && std::all_of(values_.begin(), values_.end(), [](double s) { return s == 0.0; });
    }

    friend bool operator==(const ScoreFunction&, const ScoreFunction&) = default;

private:
    std::vector<Minutes> boundaries_;
    std::vector<double> values_;
    double default_score_ = 0.0;
};

}  // namespace tdcpo
