#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include "wtperf/error.hpp"

namespace wtperf::stats {

inline double mean(std::span<const double> v)
{
    if (v.empty()) return 0.0;
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

/// Sample (n-1) standard deviation; zero for fewer than two values.
inline double sample_sd(std::span<const double> v)
{
    if (v.size() < 2) return 0.0;
    const double m = mean(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

inline double deg2rad(double d) { return d * std::numbers::pi / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / std::numbers::pi; }

/// Wraps an angle into [0, 360).
inline double wrap360(double deg)
{
    double w = std::fmod(deg, 360.0);
    if (w < 0.0) w += 360.0;
    if (w >= 360.0) w -= 360.0;
    return w;
}

/// Shortest angular separation, in [0, 180].
inline double angular_difference(double a, double b)
{
    double d = std::fabs(wrap360(a) - wrap360(b));
    return std::min(d, 360.0 - d);
}

struct CircularSummary {
    double mean_deg = 0.0;
    double sd_deg = 0.0;
    double resultant_length = 0.0; ///< mean resultant length R-bar
};

/// Directional-statistics mean atan2(sum sin, sum cos) and sd sqrt(-2 ln R-bar).
inline CircularSummary circular_summary(std::span<const double> deg)
{
    CircularSummary out;
    if (deg.empty()) return out;
    double s = 0.0, c = 0.0;
    for (double d : deg) {
        s += std::sin(deg2rad(d));
        c += std::cos(deg2rad(d));
    }
    const double n = static_cast<double>(deg.size());
    out.resultant_length = std::min(1.0, std::hypot(s, c) / n);
    double m = rad2deg(std::atan2(s, c));
    // Snap float residue so exactly-symmetric samples land on a clean angle.
    if (std::fabs(m) < 1e-9) m = 0.0;
    out.mean_deg = wrap360(m);
    out.sd_deg = out.resultant_length > 0.0
        ? rad2deg(std::sqrt(std::max(0.0, -2.0 * std::log(out.resultant_length))))
        : std::numeric_limits<double>::infinity();
    return out;
}

/// Linear-interpolation quantile (R type 7) of an unsorted sample.
inline double quantile(std::vector<double> v, double q)
{
    if (v.empty()) throw Error("quantile of empty sample");
    std::sort(v.begin(), v.end());
    const double h = (static_cast<double>(v.size()) - 1.0) * q;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

/// Two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b|.
inline double ks_statistic(std::vector<double> a, std::vector<double> b)
{
    if (a.empty() || b.empty()) return a.empty() && b.empty() ? 0.0 : 1.0;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double best = 0.0;
    while (i < a.size() && j < b.size()) {
        const double v = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= v) ++i;
        while (j < b.size() && b[j] <= v) ++j;
        best = std::max(best, std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return best;
}

struct FiveNumber {
    double min = 0, q1 = 0, median = 0, q3 = 0, max = 0, mean = 0;
    std::size_t count = 0;
};

inline FiveNumber five_number(const std::vector<double>& v)
{
    FiveNumber f;
    f.count = v.size();
    if (v.empty()) return f;
    f.min = *std::min_element(v.begin(), v.end());
    f.max = *std::max_element(v.begin(), v.end());
    f.q1 = quantile(v, 0.25);
    f.median = quantile(v, 0.5);
    f.q3 = quantile(v, 0.75);
    f.mean = mean(v);
    return f;
}

} // namespace wtperf::stats
