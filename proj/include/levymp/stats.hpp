#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "errors.hpp"

namespace levymp {

// Welford accumulator; merge() is Chan's pairwise update.
struct RunningStats {
    std::size_t count = 0;
    double mean = 0.0;
    double m2 = 0.0;
    double max = 0.0;

    void add(double x) noexcept {
        ++count;
        double delta = x - mean;
        mean += delta / static_cast<double>(count);
        m2 += delta * (x - mean);
        if (x > max) max = x;
    }

    static RunningStats merge(const RunningStats& a, const RunningStats& b) noexcept {
        if (a.count == 0) return b;
        if (b.count == 0) return a;
        RunningStats r;
        r.count = a.count + b.count;
        double na = static_cast<double>(a.count), nb = static_cast<double>(b.count);
        double delta = b.mean - a.mean;
        r.mean = a.mean + delta * nb / static_cast<double>(r.count);
        r.m2 = a.m2 + b.m2 + delta * delta * na * nb / static_cast<double>(r.count);
        r.max = std::max(a.max, b.max);
        return r;
    }

    double variance() const noexcept { return count > 1 ? m2 / static_cast<double>(count - 1) : 0.0; }
    double std_error() const noexcept {
        return count > 1 ? std::sqrt(variance() / static_cast<double>(count)) : 0.0;
    }
};

// Neumaier compensated sum
struct CompensatedSum {
    double sum = 0.0;
    double carry = 0.0;
    void add(double x) noexcept {
        double t = sum + x;
        if (std::abs(sum) >= std::abs(x))
            carry += (sum - t) + x;
        else
            carry += (x - t) + sum;
        sum = t;
    }
    double value() const noexcept { return sum + carry; }
};

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    double slope_std_error = 0.0;
};

inline LinearFit least_squares(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw DomainError("least_squares: need at least two (x, y) pairs");
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx <= 0) throw DomainError("least_squares: abscissae are all equal");
    LinearFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double sse = std::max(0.0, syy - f.slope * sxy);
    f.r_squared = syy > 0 ? 1.0 - sse / syy : 1.0;
    f.slope_std_error = x.size() > 2 ? std::sqrt(sse / (n - 2.0) / sxx) : 0.0;
    return f;
}

// P(K > lambda) for the Kolmogorov distribution
inline double kolmogorov_survival(double lambda) {
    if (lambda <= 0.0) return 1.0;
    if (lambda < 0.2) return 1.0;
    double sum = 0.0;
    for (int j = 1; j <= 200; ++j) {
        double term = std::exp(-2.0 * j * j * lambda * lambda);
        sum += (j % 2 == 1 ? term : -term);
        if (term < 1e-17) break;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

struct KsResult {
    double statistic = 0.0;
    double p_value = 1.0;
};

// Two-sample Kolmogorov-Smirnov with the asymptotic p-value, using the
// effective size nm/(n+m) and Stephens' small-sample correction.
inline KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw DomainError("ks_two_sample: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        double v = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= v) ++i;
        while (j < b.size() && b[j] <= v) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    double ne = na * nb / (na + nb);
    double sq = std::sqrt(ne);
    KsResult r;
    r.statistic = d;
    r.p_value = kolmogorov_survival((sq + 0.12 + 0.11 / sq) * d);
    return r;
}

}  // namespace levymp
