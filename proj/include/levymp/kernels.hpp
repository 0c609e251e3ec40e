#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace levymp {

enum class KernelVariant { anisotropic, log_corrected, true_exponent };

inline std::string_view to_string(KernelVariant v) {
    switch (v) {
        case KernelVariant::anisotropic: return "anisotropic";
        case KernelVariant::log_corrected: return "log_corrected";
        case KernelVariant::true_exponent: return "true_exponent";
    }
    return "?";
}

inline KernelVariant kernel_variant_from_string(std::string_view s) {
    for (auto v : {KernelVariant::anisotropic, KernelVariant::log_corrected, KernelVariant::true_exponent})
        if (to_string(v) == s) return v;
    throw DomainError("unknown kernel variant '" + std::string(s) + "'");
}

// anisotropic:   kappa(x) = sum |x_j|^alpha_j
// log_corrected: kappa(x) = |x1|^a + |x2|^a (ln|x|)^a, only for |x| >= e
// true_exponent: kappa(x) = sum c_j |x_j|^alpha_j
struct KernelSpec {
    KernelVariant variant = KernelVariant::anisotropic;
    std::vector<double> alphas;
    double cutoff_radius = 1.0;
    std::vector<double> coefficients;

    int dim() const { return static_cast<int>(alphas.size()); }

    void validate() const {
        if (alphas.empty() || alphas.size() > 3) throw DomainError("kernel needs 1 to 3 alphas");
        for (double a : alphas)
            if (!(a > 0.0) || a > 2.0) throw DomainError("kernel alpha outside (0, 2]");
        if (!(cutoff_radius > 0.0)) throw DomainError("kernel cutoff radius must be positive");
        if (variant == KernelVariant::log_corrected) {
            if (alphas.size() != 2 || alphas[0] != alphas[1])
                throw DomainError("log-corrected kernel needs two equal alphas");
        }
        if (variant == KernelVariant::true_exponent) {
            if (coefficients.size() != alphas.size()) throw DomainError("true_exponent kernel needs one coefficient per alpha");
            for (double c : coefficients)
                if (!(c > 0.0)) throw DomainError("kernel coefficients must be positive");
        }
    }

    static KernelSpec anisotropic_kernel(std::vector<double> a) {
        KernelSpec k;
        k.alphas = std::move(a);
        k.validate();
        return k;
    }
    static KernelSpec log_kernel(double alpha) {
        KernelSpec k;
        k.variant = KernelVariant::log_corrected;
        k.alphas = {alpha, alpha};
        k.cutoff_radius = std::numbers::e;
        k.validate();
        return k;
    }
};

inline double euclidean_norm(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return std::sqrt(s);
}

inline double kernel_eval(const KernelSpec& k, std::span<const double> x) {
    if (static_cast<int>(x.size()) != k.dim()) throw DomainError("kernel_eval: point has the wrong dimension");
    switch (k.variant) {
        case KernelVariant::anisotropic: {
            double s = 0.0;
            for (std::size_t j = 0; j < x.size(); ++j) s += std::pow(std::abs(x[j]), k.alphas[j]);
            return s;
        }
        case KernelVariant::true_exponent: {
            double s = 0.0;
            for (std::size_t j = 0; j < x.size(); ++j) s += k.coefficients[j] * std::pow(std::abs(x[j]), k.alphas[j]);
            return s;
        }
        case KernelVariant::log_corrected: {
            double n = euclidean_norm(x);
            if (!(n >= std::numbers::e)) throw DomainError("log-corrected kernel needs |x| >= e");
            const double a = k.alphas[0];
            return std::pow(std::abs(x[0]), a) + std::pow(std::abs(x[1]), a) * std::pow(std::log(n), a);
        }
    }
    return 0.0;
}

// Per-point factor integrated over A_k(q, r).  For the log variant this is
// (|x1| + |x2| ln|x|)^(-alpha), which is comparable to 1/kappa but is the
// form whose asymptotics are known.
struct AnisotropicFactor {
    double a1, a2;
    double x_part(double x) const { return std::pow(std::abs(x), a1); }
    double y_part(double y) const { return std::pow(std::abs(y), a2); }
    double combine(double px, double py, double, double) const { return 1.0 / (px + py); }
    double operator()(double x, double y) const { return 1.0 / (x_part(x) + y_part(y)); }
};

struct TrueExponentFactor {
    double a1, a2, c1, c2;
    double x_part(double x) const { return c1 * std::pow(std::abs(x), a1); }
    double y_part(double y) const { return c2 * std::pow(std::abs(y), a2); }
    double combine(double px, double py, double, double) const { return 1.0 / (px + py); }
    double operator()(double x, double y) const { return 1.0 / (x_part(x) + y_part(y)); }
};

struct LogFactor {
    double alpha;
    double x_part(double x) const { return std::abs(x); }
    double y_part(double y) const { return std::abs(y); }
    double combine(double ax, double ay, double x, double y) const {
        double ln = 0.5 * std::log(x * x + y * y);
        return std::pow(ax + ay * ln, -alpha);
    }
    double operator()(double x, double y) const { return combine(std::abs(x), std::abs(y), x, y); }
};

inline double region_factor(const KernelSpec& k, double x, double y) {
    switch (k.variant) {
        case KernelVariant::anisotropic: return AnisotropicFactor{k.alphas[0], k.alphas[1]}(x, y);
        case KernelVariant::true_exponent:
            return TrueExponentFactor{k.alphas[0], k.alphas[1], k.coefficients[0], k.coefficients[1]}(x, y);
        case KernelVariant::log_corrected: return LogFactor{k.alphas[0]}(x, y);
    }
    return 0.0;
}

// A_k(q, r): k points with |x_i| > floor (1, or e for the log variant) whose
// coordinate sums satisfy q-1 <= |sum x_i1| < q and r-1 <= |sum x_i2| < r.
// A subregion (i, j) pins x_k to the positive quadrant and splits the
// constraint on each coordinate into one of four cases.
struct RegionSpec {
    int k = 1;
    double q = 1.0;
    double r = 1.0;
    std::optional<std::pair<int, int>> subregion;
    bool log_variant = false;

    double floor_radius() const { return log_variant ? std::numbers::e : 1.0; }

    void validate() const {
        if (k < 1) throw DomainError("region needs k >= 1");
        if (!std::isfinite(q) || !std::isfinite(r)) throw DomainError("region q, r must be finite");
        double lo = log_variant ? 3.0 : 1.0;
        if (q < lo || r < lo) throw DomainError(log_variant ? "log-variant region needs q, r >= 3" : "region needs q, r >= 1");
        if (subregion) {
            auto [i, j] = *subregion;
            if (i < 1 || i > 4 || j < 1 || j > 4) throw DomainError("subregion indices must be in 1..4");
        }
    }
};

namespace detail {

// case c of the split of q-1 <= |s + y| < q with y >= 1 (s = sum of the other points)
inline bool subregion_case(int c, double s, double y, double q) {
    double as = std::abs(s);
    switch (c) {
        case 1: return y >= 1.0 && as >= q + y - 1.0 && as <= q + y;
        case 2: return y >= 1.0 && y <= q - 1.0 && as >= q - y - 1.0 && as <= q - y;
        case 3: return as <= 2.0 && y >= q - 1.0 && y <= q + 1.0;
        case 4: return y >= q + 1.0 && as >= y - q && as <= y - q + 1.0;
    }
    return false;
}

}  // namespace detail

// xs holds k planar points
inline bool region_membership(const RegionSpec& region, std::span<const std::array<double, 2>> xs) {
    region.validate();
    if (static_cast<int>(xs.size()) != region.k) throw DomainError("region_membership: expected k points");
    const double fl = region.floor_radius();
    for (const auto& x : xs)
        if (!(std::hypot(x[0], x[1]) > fl)) return false;
    if (!region.subregion) {
        double s1 = 0, s2 = 0;
        for (const auto& x : xs) {
            s1 += x[0];
            s2 += x[1];
        }
        double a1 = std::abs(s1), a2 = std::abs(s2);
        return a1 >= region.q - 1.0 && a1 < region.q && a2 >= region.r - 1.0 && a2 < region.r;
    }
    const auto& last = xs.back();
    double s1 = 0, s2 = 0;
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
        if (std::abs(xs[i][0]) < 1.0 || std::abs(xs[i][1]) < 1.0) return false;
        s1 += xs[i][0];
        s2 += xs[i][1];
    }
    if (last[0] < 1.0 || last[1] < 1.0) return false;
    auto [ci, cj] = *region.subregion;
    return detail::subregion_case(ci, s1, last[0], region.q) && detail::subregion_case(cj, s2, last[1], region.r);
}

enum class FirstFactor { euclidean_norm, coordinate_sum };

// (1 + |sum xi|^beta)^-1 * prod (1 + kappa(xi_j))^-1; with coordinate_sum the
// first factor uses |sum xi_1|^beta + |sum xi_2|^beta instead of the norm.
inline double multipoint_integrand(const KernelSpec& k, double beta, std::span<const std::vector<double>> xis,
                                   FirstFactor form = FirstFactor::euclidean_norm) {
    if (xis.empty()) throw DomainError("multipoint_integrand needs at least one point");
    if (!(beta >= 0.0)) throw DomainError("beta must be >= 0");
    const std::size_t d = static_cast<std::size_t>(k.dim());
    std::vector<double> sum(d, 0.0);
    double prod = 1.0;
    for (const auto& xi : xis) {
        if (xi.size() != d) throw DomainError("multipoint_integrand: point has the wrong dimension");
        for (std::size_t j = 0; j < d; ++j) sum[j] += xi[j];
        prod /= 1.0 + kernel_eval(k, xi);
    }
    double first = 0.0;
    if (form == FirstFactor::euclidean_norm) {
        first = std::pow(euclidean_norm(sum), beta);
    } else {
        for (double s : sum) first += std::pow(std::abs(s), beta);
    }
    return prod / (1.0 + first);
}

}  // namespace levymp
