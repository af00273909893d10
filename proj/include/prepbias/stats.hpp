#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace prepbias {

/// Streaming count / mean / sum of squared deviations with a pairwise merge
/// (Chan et al.). merge is commutative up to floating-point rounding and exact
/// in the count.
struct AggregateStats {
    std::int64_t count = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void push(double x) noexcept {
        ++count;
        const double delta = x - mean;
        mean += delta / static_cast<double>(count);
        m2 += delta * (x - mean);
    }

    void merge(const AggregateStats& other) noexcept {
        if (other.count == 0) return;
        if (count == 0) {
            *this = other;
            return;
        }
        const double na = static_cast<double>(count);
        const double nb = static_cast<double>(other.count);
        const double total = na + nb;
        const double delta = other.mean - mean;
        mean += delta * (nb / total);
        m2 += other.m2 + delta * delta * (na * nb / total);
        count += other.count;
    }

    /// Sample variance (divisor count - 1); NaN below two observations.
    double variance() const noexcept {
        return count > 1 ? m2 / static_cast<double>(count - 1) : std::numeric_limits<double>::quiet_NaN();
    }

    /// sqrt(m2 / (count (count - 1)))
    double standard_error() const noexcept {
        return count > 1 ? std::sqrt(m2 / (static_cast<double>(count) * static_cast<double>(count - 1)))
                         : std::numeric_limits<double>::quiet_NaN();
    }
};

inline AggregateStats merge_stats(AggregateStats a, const AggregateStats& b) noexcept {
    a.merge(b);
    return a;
}

}  // namespace prepbias
