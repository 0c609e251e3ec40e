#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include "errors.hpp"
#include "numbers.hpp"
#include "spectral.hpp"

namespace levymp {

enum class ResultSource {
    planar_double_points,       // d = 2, k = 2
    planar_diagonalizable,      // d = 2, k >= 3, cases A1
    planar_nilpotent,           // d = 2, k >= 3, case A2
    spatial_double_points,      // d = 3, k = 2, cases B1/B2
    spatial_nilpotent,          // d = 3, k = 2, case B3
    spatial_no_triple_points,   // d = 3, k >= 3
    high_dimension_no_points,   // d >= 4
};

inline std::string_view to_string(ResultSource s) {
    switch (s) {
        case ResultSource::planar_double_points: return "planar_double_points";
        case ResultSource::planar_diagonalizable: return "planar_diagonalizable";
        case ResultSource::planar_nilpotent: return "planar_nilpotent";
        case ResultSource::spatial_double_points: return "spatial_double_points";
        case ResultSource::spatial_nilpotent: return "spatial_nilpotent";
        case ResultSource::spatial_no_triple_points: return "spatial_no_triple_points";
        case ResultSource::high_dimension_no_points: return "high_dimension_no_points";
    }
    return "?";
}

inline ResultSource result_source_from_string(std::string_view s) {
    for (auto v : {ResultSource::planar_double_points, ResultSource::planar_diagonalizable,
                   ResultSource::planar_nilpotent, ResultSource::spatial_double_points,
                   ResultSource::spatial_nilpotent, ResultSource::spatial_no_triple_points,
                   ResultSource::high_dimension_no_points})
        if (to_string(v) == s) return v;
    throw DomainError("unknown result source '" + std::string(s) + "'");
}

struct DimensionReport {
    int k = 2;
    int dim = 2;
    std::optional<double> dim_value;    // only known in the plane
    std::optional<double> dim_clamped;  // max(dim_value, 0) if points exist, else 0
    bool exists = false;
    bool boundary_case = false;
    std::optional<std::pair<double, double>> formula_terms;
    ResultSource source = ResultSource::planar_double_points;
};

namespace detail {

inline void check_planar_alphas(double a1, double a2, int k) {
    if (!std::isfinite(a1) || !std::isfinite(a2) || !(a2 > 0.0) || a1 < a2 || a1 > 2.0)
        throw DomainError("need 2 >= alpha1 >= alpha2 > 0");
    if (k < 2) throw DomainError("multiplicity k must be >= 2");
}

// the two competing terms of the dimension formula
inline std::pair<double, double> dimension_terms(double a1, double a2, int k) {
    const double h = 1.0 / a1 + 1.0 / a2;
    return {a1 * (k - (k - 1) * h), 2.0 - k * a2 * (h - 1.0)};
}

}  // namespace detail

inline double hausdorff_dim_R2(double a1, double a2, int k) {
    detail::check_planar_alphas(a1, a2, k);
    auto [t1, t2] = detail::dimension_terms(a1, a2, k);
    return std::min(t1, t2);
}

// Smallest beta for which the multipoint energy integral converges.
inline double beta_threshold_R2(double a1, double a2, int k) {
    detail::check_planar_alphas(a1, a2, k);
    const double h = 1.0 / a1 + 1.0 / a2;
    return std::max(2.0 - a1 * (k - (k - 1) * h), k * a2 * (h - 1.0));
}

namespace detail {

// sign of a quantity that is zero at a boundary; exact when possible
struct SignedQuantity {
    double approx;
    std::optional<Rational> exact;
    int sign(double tol) const {
        if (exact) return *exact > Rational(0) ? 1 : (*exact < Rational(0) ? -1 : 0);
        if (std::abs(approx) < tol) return 0;
        return approx > 0 ? 1 : -1;
    }
};

}  // namespace detail

inline DimensionReport exists_multiple(const SpectralProfile& prof, int k, double boundary_tol = 1e-12) {
    if (k < 2) throw DomainError("multiplicity k must be >= 2");
    const int d = prof.dim();
    if (d == 1) throw Unsupported("multiple points of one-dimensional processes are not covered");
    DimensionReport r;
    r.k = k;
    r.dim = d;

    const auto& al = prof.alphas;
    std::optional<std::vector<Rational>> ex = prof.exact_alphas;
    auto inv_sum = [&](int n) {
        detail::SignedQuantity q{0.0, std::nullopt};
        for (int i = 0; i < n; ++i) q.approx += 1.0 / al[static_cast<std::size_t>(i)];
        if (ex) {
            Rational s = 0;
            for (int i = 0; i < n; ++i) s += Rational(1) / (*ex)[static_cast<std::size_t>(i)];
            q.exact = s;
        }
        return q;
    };

    if (d >= 4) {
        r.exists = false;
        r.dim_clamped = 0.0;
        r.source = ResultSource::high_dimension_no_points;
        return r;
    }

    if (d == 3) {
        if (k >= 3) {
            r.exists = false;
            r.dim_clamped = 0.0;
            r.source = ResultSource::spatial_no_triple_points;
            return r;
        }
        if (prof.case_label == CaseLabel::B3) {
            r.source = ResultSource::spatial_nilpotent;
            detail::SignedQuantity q{al[0] - 1.5, std::nullopt};
            if (ex) q.exact = (*ex)[0] - Rational(3, 2);
            int s = q.sign(boundary_tol);
            r.exists = s >= 0;
            r.boundary_case = s == 0;
            if (!r.exists || r.boundary_case) r.dim_clamped = 0.0;
            return r;
        }
        r.source = ResultSource::spatial_double_points;
        auto h = inv_sum(3);
        detail::SignedQuantity q{2.0 - h.approx, std::nullopt};
        if (h.exact) q.exact = Rational(2) - *h.exact;
        r.exists = q.sign(boundary_tol) > 0;
        if (!r.exists) r.dim_clamped = 0.0;
        return r;
    }

    // d == 2
    const double a1 = al[0], a2 = al[1];
    auto terms = detail::dimension_terms(a1, a2, k);
    r.formula_terms = terms;
    r.dim_value = std::min(terms.first, terms.second);
    auto h = inv_sum(2);
    if (k == 2) {
        r.source = ResultSource::planar_double_points;
        detail::SignedQuantity q{2.0 - h.approx, std::nullopt};
        if (h.exact) q.exact = Rational(2) - *h.exact;
        r.exists = q.sign(boundary_tol) > 0;
    } else if (prof.case_label == CaseLabel::A2) {
        r.source = ResultSource::planar_nilpotent;
        detail::SignedQuantity q{a1 - 2.0 * (k - 1) / k, std::nullopt};
        if (ex) q.exact = (*ex)[0] - Rational(2 * (k - 1), k);
        int s = q.sign(boundary_tol);
        r.exists = s >= 0;
        r.boundary_case = s == 0;
    } else {
        r.source = ResultSource::planar_diagonalizable;
        detail::SignedQuantity q{k - (k - 1) * h.approx, std::nullopt};
        if (h.exact) q.exact = Rational(k) - Rational(k - 1) * *h.exact;
        r.exists = q.sign(boundary_tol) > 0;
    }
    if (r.boundary_case)
        r.dim_clamped = 0.0;
    else
        r.dim_clamped = r.exists ? std::max(*r.dim_value, 0.0) : 0.0;
    return r;
}

}  // namespace levymp
