#pragma once

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <array>
#include <cmath>

namespace levymp::quad {

struct GaussLegendre16 {
    std::array<double, 16> x{};
    std::array<double, 16> w{};
    GaussLegendre16() {
        using rule = boost::math::quadrature::gauss<double, 16>;
        const auto& a = rule::abscissa();
        const auto& wt = rule::weights();
        for (std::size_t i = 0; i < 8; ++i) {
            x[7 - i] = -a[i];
            w[7 - i] = wt[i];
            x[8 + i] = a[i];
            w[8 + i] = wt[i];
        }
    }
};

inline const GaussLegendre16& gl16() {
    static const GaussLegendre16 rule;
    return rule;
}

inline constexpr int grade_levels = 6;

// Fixed-capacity 1D rule; avoids allocation in the inner sampling loop.
struct Rule1D {
    static constexpr int capacity = 2 * (grade_levels + 1) * 16;
    std::array<double, capacity> node{};
    std::array<double, capacity> weight{};
    int size = 0;

    void clear() { size = 0; }

    void add_gauss(double a, double b) {
        const auto& g = gl16();
        const double h = 0.5 * (b - a), m = 0.5 * (a + b);
        for (int i = 0; i < 16; ++i) {
            node[size] = m + h * g.x[i];
            weight[size] = h * g.w[i];
            ++size;
        }
    }

    // 0 <= lo < hi: pieces shrinking geometrically toward 0, clipped to [lo, hi]
    void add_graded_positive(double lo, double hi, double sign) {
        double right = hi;
        for (int j = 1; j <= grade_levels; ++j) {
            double left = hi * std::ldexp(1.0, -j);
            if (left <= lo) break;
            if (sign > 0) add_gauss(left, right);
            else add_gauss(-right, -left);
            right = left;
        }
        if (right > lo) {
            if (sign > 0) add_gauss(lo, right);
            else add_gauss(-right, -lo);
        }
    }

    // [a, b] split at 0; graded toward 0 when the piece reaches close to it
    void add_interval(double a, double b) {
        if (!(b > a)) return;
        if (a < 0.0 && b > 0.0) {
            add_graded_positive(0.0, -a, -1.0);
            add_graded_positive(0.0, b, 1.0);
            return;
        }
        if (a >= 0.0) {
            if (a < 0.5 * b) add_graded_positive(a, b, 1.0);
            else add_gauss(a, b);
        } else {
            if (-b < 0.5 * (-a)) add_graded_positive(-b, -a, -1.0);
            else add_gauss(a, b);
        }
    }
};

inline bool rect_clear_of_disk(double x0, double x1, double y0, double y1, double radius) {
    double dx = x0 > 0 ? x0 : (x1 < 0 ? -x1 : 0.0);
    double dy = y0 > 0 ? y0 : (y1 < 0 ? -y1 : 0.0);
    return dx * dx + dy * dy >= radius * radius;
}

// Integral of f over [x0,x1] x [y0,y1] minus the open disk |(x,y)| < radius.
// Iterated: outer in y with pieces split where the inner range changes shape,
// |y| = R - u^2 on pieces with |y| in [R/2, R] to absorb the square-root edge.
template <class F>
double integrate_rect_outside_disk(const F& f, double x0, double x1, double y0, double y1, double radius) {
    if (!(x1 > x0) || !(y1 > y0)) return 0.0;
    const double rr = radius * radius;
    std::array<double, 16> cuts{};
    int nc = 0;
    auto add_cut = [&](double v) {
        if (v > y0 && v < y1) cuts[nc++] = v;
    };
    add_cut(-radius);
    add_cut(-0.5 * radius);
    add_cut(0.0);
    add_cut(0.5 * radius);
    add_cut(radius);
    for (double xe : {x0, x1}) {
        if (std::abs(xe) < radius) {
            double h = std::sqrt(rr - xe * xe);
            add_cut(h);
            add_cut(-h);
        }
    }
    cuts[nc++] = y0;
    cuts[nc++] = y1;
    std::sort(cuts.begin(), cuts.begin() + nc);
    nc = static_cast<int>(std::unique(cuts.begin(), cuts.begin() + nc) - cuts.begin());

    Rule1D inner;
    auto inner_integral = [&](double y) {
        inner.clear();
        if (std::abs(y) >= radius) {
            inner.add_interval(x0, x1);
        } else {
            double w = std::sqrt(rr - y * y);
            if (x0 < -w) inner.add_interval(x0, std::min(x1, -w));
            if (x1 > w) inner.add_interval(std::max(x0, w), x1);
        }
        double s = 0.0;
        for (int i = 0; i < inner.size; ++i) s += inner.weight[i] * f(inner.node[i], y);
        return s;
    };

    const auto& g = gl16();
    Rule1D outer;
    double total = 0.0;
    for (int p = 0; p + 1 < nc; ++p) {
        const double ya = cuts[p], yb = cuts[p + 1];
        const double mid = 0.5 * (ya + yb);
        const bool in_strip = std::abs(mid) < radius;
        if (in_strip && std::min(std::abs(ya), std::abs(yb)) >= 0.5 * radius) {
            // |y| = R - u^2 makes the inner limit sqrt(R^2 - y^2) = u sqrt(2R - u^2) analytic
            const double sgn = mid > 0 ? 1.0 : -1.0;
            const double ta = std::min(std::abs(ya), std::abs(yb)), tb = std::max(std::abs(ya), std::abs(yb));
            const double ul = std::sqrt(radius - tb), uh = std::sqrt(radius - ta);
            const double hu = 0.5 * (uh - ul), mu = 0.5 * (uh + ul);
            for (int i = 0; i < 16; ++i) {
                double u = mu + hu * g.x[i];
                double y = sgn * (radius - u * u);
                total += hu * g.w[i] * 2.0 * u * inner_integral(y);
            }
        } else {
            outer.clear();
            outer.add_interval(ya, yb);
            for (int i = 0; i < outer.size; ++i) total += outer.weight[i] * inner_integral(outer.node[i]);
        }
    }
    return total;
}

// Integral of the per-point factor over the set of x with
// q-1 <= |s1 + x1| < q, r-1 <= |s2 + x2| < r and |x| > radius.
// The set is four unit squares; factors split into x_part/y_part so that on
// squares away from the disk the expensive powers are taken once per node.
template <class Factor>
double band_integral(const Factor& f, double s1, double s2, double q, double r, double radius) {
    const double xs[2][2] = {{q - 1.0 - s1, q - s1}, {-q - s1, -q + 1.0 - s1}};
    const double ys[2][2] = {{r - 1.0 - s2, r - s2}, {-r - s2, -r + 1.0 - s2}};
    Rule1D rx[2], ry[2];
    std::array<double, Rule1D::capacity> px[2], py[2];
    bool built_x[2] = {false, false}, built_y[2] = {false, false};
    auto build_x = [&](int i) {
        if (built_x[i]) return;
        rx[i].add_interval(xs[i][0], xs[i][1]);
        for (int n = 0; n < rx[i].size; ++n) px[i][n] = f.x_part(rx[i].node[n]);
        built_x[i] = true;
    };
    auto build_y = [&](int j) {
        if (built_y[j]) return;
        ry[j].add_interval(ys[j][0], ys[j][1]);
        for (int n = 0; n < ry[j].size; ++n) py[j][n] = f.y_part(ry[j].node[n]);
        built_y[j] = true;
    };
    double total = 0.0;
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            if (rect_clear_of_disk(xs[i][0], xs[i][1], ys[j][0], ys[j][1], radius)) {
                build_x(i);
                build_y(j);
                double s = 0.0;
                for (int a = 0; a < rx[i].size; ++a) {
                    double row = 0.0;
                    for (int b = 0; b < ry[j].size; ++b)
                        row += ry[j].weight[b] * f.combine(px[i][a], py[j][b], rx[i].node[a], ry[j].node[b]);
                    s += rx[i].weight[a] * row;
                }
                total += s;
            } else {
                total += integrate_rect_outside_disk(f, xs[i][0], xs[i][1], ys[j][0], ys[j][1], radius);
            }
        }
    }
    return total;
}

}  // namespace levymp::quad
