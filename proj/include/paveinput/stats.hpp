#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "paveinput/error.hpp"

namespace paveinput::stats {

inline double mean(std::span<const double> xs) {
    require(!xs.empty(), "mean of empty sample");
    // Shifted by the first value: exact for constant samples.
    const double x0 = xs.front();
    double s = 0.0;
    for (double x : xs) s += x - x0;
    return x0 + s / static_cast<double>(xs.size());
}

/// Divide-by-n variance.
inline double population_variance(std::span<const double> xs) {
    const double m = mean(xs);
    double s = 0.0;
    for (double x : xs) s += (x - m) * (x - m);
    return s / static_cast<double>(xs.size());
}

inline double population_stddev(std::span<const double> xs) {
    return std::sqrt(population_variance(xs));
}

/// Quantile of an ascending-sorted sample, linearly interpolated between the
/// order statistics around zero-based position (n-1)*q.
inline double quantile_sorted(std::span<const double> sorted, double q) {
    require(!sorted.empty(), "quantile of empty sample");
    require(q >= 0.0 && q <= 1.0, "quantile level outside [0, 1]");
    const double pos = static_cast<double>(sorted.size() - 1) * q;
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

inline double quantile(std::vector<double> xs, double q) {
    std::sort(xs.begin(), xs.end());
    return quantile_sorted(xs, q);
}

inline double median(std::vector<double> xs) { return quantile(std::move(xs), 0.5); }

inline double pearson(std::span<const double> a, std::span<const double> b) {
    require(a.size() == b.size() && a.size() >= 2, "pearson needs two equal-length samples");
    const double ma = mean(a), mb = mean(b);
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

inline double rmse(std::span<const double> a, std::span<const double> b) {
    require(a.size() == b.size() && !a.empty(), "rmse needs two equal-length samples");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s / static_cast<double>(a.size()));
}

} // namespace paveinput::stats
