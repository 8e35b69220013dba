// oracles.hpp - direct two-pass formulas used to check the incremental code.
#pragma once
#include <cmath>
#include <span>

namespace oracle {

inline double batch_mean(std::span<const double> xs) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

inline double batch_variance(std::span<const double> xs) {
    const double m = batch_mean(xs);
    double s = 0.0;
    for (double x : xs) s += (x - m) * (x - m);
    return s / static_cast<double>(xs.size());
}

inline double batch_sigma(std::span<const double> xs) { return std::sqrt(batch_variance(xs)); }

} // namespace oracle
