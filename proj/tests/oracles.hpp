#pragma once
// Reference computations used only by the tests.  They share no numerical
// code with the library estimators.

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <set>
#include <vector>

namespace oracle {

struct Value {
    double value = 0.0;
    double error = 0.0;
};

// Integral of f over the unit squares of A_1(q, r) outside the disk of the
// given radius: tanh-sinh outside, adaptive Gauss-Kronrod inside, both split at
// every kink of the integrand or the domain.
inline Value region_k1(const std::function<double(double, double)>& f, double q, double r, double radius) {
    using boost::math::quadrature::gauss_kronrod;
    using boost::math::quadrature::tanh_sinh;
    tanh_sinh<double> ts(12);
    Value total;
    const double xs[2][2] = {{q - 1.0, q}, {-q, -q + 1.0}};
    const double ys[2][2] = {{r - 1.0, r}, {-r, -r + 1.0}};
    const double rr = radius * radius;
    for (auto& xr : xs) {
        for (auto& yr : ys) {
            const double x0 = xr[0], x1 = xr[1], y0 = yr[0], y1 = yr[1];
            auto inner = [&](double y) {
                std::vector<std::pair<double, double>> pieces;
                if (std::abs(y) >= radius) {
                    pieces.emplace_back(x0, x1);
                } else {
                    double w = std::sqrt(rr - y * y);
                    if (x0 < -w) pieces.emplace_back(x0, std::min(x1, -w));
                    if (x1 > w) pieces.emplace_back(std::max(x0, w), x1);
                }
                double s = 0.0;
                for (auto [a, b] : pieces) {
                    std::vector<double> cut{a, b};
                    if (a < 0 && b > 0) cut = {a, 0.0, b};
                    for (std::size_t i = 0; i + 1 < cut.size(); ++i)
                        s += gauss_kronrod<double, 31>::integrate([&](double x) { return f(x, y); }, cut[i], cut[i + 1],
                                                                  15, 1e-13);
                }
                return s;
            };
            std::set<double> cuts{y0, y1};
            for (double v : {-radius, 0.0, radius}) cuts.insert(v);
            for (double xe : {x0, x1})
                if (std::abs(xe) < radius) {
                    cuts.insert(std::sqrt(rr - xe * xe));
                    cuts.insert(-std::sqrt(rr - xe * xe));
                }
            std::vector<double> c;
            for (double v : cuts)
                if (v >= y0 && v <= y1) c.push_back(v);
            for (std::size_t i = 0; i + 1 < c.size(); ++i) {
                double err = 0.0;
                total.value += ts.integrate(inner, c[i], c[i + 1], 1e-12, &err);
                total.error += err;
            }
        }
    }
    total.error = std::max(total.error, 1e-10 * std::abs(total.value));
    return total;
}

// I_2(q, r) for the anisotropic factor 1/(|x1|^a1 + |x2|^a2), as an iterated
// product rule: outer x on a mesh (uniform cells of width h around the bands,
// geometric cells out to `reach`), 2-point Gauss per cell and axis; the inner
// band integral by the same 2-point rule on cells of width 1/m, split at 0.  Cells cut by the
// unit circle are integrated over the exact cut region.
class MeshK2 {
public:
    MeshK2(double a1, double a2, double q, double r) : a1_(a1), a2_(a2), q_(q), r_(r) {}

    // cell edges covering [a, b] with about m cells per unit, one edge at 0
    static std::vector<double> cell_edges(double a, double b, int m) {
        std::vector<double> cuts{a};
        if (a < 0.0 && b > 0.0) cuts.push_back(0.0);
        cuts.push_back(b);
        std::vector<double> e{a};
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
            int n = std::max(1, static_cast<int>(std::ceil((cuts[i + 1] - cuts[i]) * m - 1e-9)));
            for (int j = 1; j <= n; ++j) e.push_back(cuts[i] + (cuts[i + 1] - cuts[i]) * j / n);
        }
        return e;
    }

    double inner_band(double x1, double x2, int m) const {
        const double xs[2][2] = {{q_ - 1.0 - x1, q_ - x1}, {-q_ - x1, -q_ + 1.0 - x1}};
        const double ys[2][2] = {{r_ - 1.0 - x2, r_ - x2}, {-r_ - x2, -r_ + 1.0 - x2}};
        const double g = 1.0 / std::sqrt(3.0);
        auto f = [&](double px, double py) { return 1.0 / (std::pow(std::abs(px), a1_) + std::pow(std::abs(py), a2_)); };
        double total = 0.0;
        for (auto& xr : xs) {
            auto ex = cell_edges(xr[0], xr[1], m);
            std::vector<double> nx, px;
            for (std::size_t i = 0; i + 1 < ex.size(); ++i)
                for (double s : {-g, g}) {
                    nx.push_back(0.5 * (ex[i] + ex[i + 1]) + 0.5 * (ex[i + 1] - ex[i]) * s);
                    px.push_back(std::pow(std::abs(nx.back()), a1_));
                }
            for (auto& yr : ys) {
                auto ey = cell_edges(yr[0], yr[1], m);
                std::vector<double> ny, py;
                for (std::size_t j = 0; j + 1 < ey.size(); ++j)
                    for (double s : {-g, g}) {
                        ny.push_back(0.5 * (ey[j] + ey[j + 1]) + 0.5 * (ey[j + 1] - ey[j]) * s);
                        py.push_back(std::pow(std::abs(ny.back()), a2_));
                    }
                for (std::size_t i = 0; i + 1 < ex.size(); ++i) {
                    for (std::size_t j = 0; j + 1 < ey.size(); ++j) {
                        const double x0 = ex[i], x1c = ex[i + 1], y0 = ey[j], y1c = ey[j + 1];
                        double dmin = std::pow(x0 > 0 ? x0 : (x1c < 0 ? -x1c : 0.0), 2) +
                                      std::pow(y0 > 0 ? y0 : (y1c < 0 ? -y1c : 0.0), 2);
                        if (dmin >= 1.0) {
                            double s = 0.0;
                            for (std::size_t u = 2 * i; u < 2 * i + 2; ++u)
                                for (std::size_t v = 2 * j; v < 2 * j + 2; ++v) s += 1.0 / (px[u] + py[v]);
                            total += 0.25 * (x1c - x0) * (y1c - y0) * s;
                            continue;
                        }
                        double dmax = std::max(x0 * x0, x1c * x1c) + std::max(y0 * y0, y1c * y1c);
                        if (dmax <= 1.0) continue;
                        total += cut_cell(f, x0, x1c, y0, y1c);
                    }
                }
            }
        }
        return total;
    }

    // nodes/weights along one axis: core [-core, core] with cells of width h
    static std::vector<std::pair<double, double>> axis_rule(double core, double h, double reach, double ratio) {
        std::vector<double> edges;
        for (double x = -core; x <= core + 1e-12; x += h) edges.push_back(x);
        double w = h;
        std::vector<double> right;
        for (double x = core; x < reach;) {
            w *= ratio;
            x += w;
            right.push_back(x);
        }
        std::vector<double> all;
        for (auto it = right.rbegin(); it != right.rend(); ++it) all.push_back(-*it);
        all.insert(all.end(), edges.begin(), edges.end());
        all.insert(all.end(), right.begin(), right.end());
        const double g = 1.0 / std::sqrt(3.0);
        std::vector<std::pair<double, double>> rule;
        for (std::size_t i = 0; i + 1 < all.size(); ++i) {
            double m = 0.5 * (all[i] + all[i + 1]), hl = 0.5 * (all[i + 1] - all[i]);
            rule.emplace_back(m - hl * g, hl);
            rule.emplace_back(m + hl * g, hl);
        }
        return rule;
    }

    double integrate(double h, int m, double reach = 1e7, double ratio = 1.1) const {
        auto rx = axis_rule(std::ceil(q_) + 3.0, h, reach, ratio);
        auto ry = axis_rule(std::ceil(r_) + 3.0, h, reach, ratio);
        double total = 0.0;
        for (auto [x, wx] : rx) {
            double row = 0.0;
            const double px = std::pow(std::abs(x), a1_);
            for (auto [y, wy] : ry) {
                double n2 = x * x + y * y;
                if (n2 <= 1.0) continue;
                row += wy * inner_band(x, y, m) / (px + std::pow(std::abs(y), a2_));
            }
            total += wx * row;
        }
        // cells of the outer mesh cut by the unit circle: add back the part the
        // 2-point rule misplaces by integrating them again with a fine midpoint rule
        total += circle_correction(h, m);
        return total;
    }

    // value at (h, m) with the difference to (h/2, 2m) as the error
    Value converged(double h = 0.25, int m = 12) const {
        double coarse = integrate(h, m);
        double fine = integrate(h / 2, 2 * m);
        return {fine, std::abs(fine - coarse)};
    }

private:
    // integral over a small rectangle minus the unit disk: Gauss in x, and in y
    // on the exact pieces outside the disk
    template <class F>
    static double cut_cell(const F& f, double x0, double x1, double y0, double y1) {
        using rule = boost::math::quadrature::gauss<double, 10>;
        double total = 0.0;
        auto along_y = [&](double x) {
            std::vector<std::pair<double, double>> pieces;
            if (std::abs(x) >= 1.0) {
                pieces.emplace_back(y0, y1);
            } else {
                double w = std::sqrt(1.0 - x * x);
                if (y0 < -w) pieces.emplace_back(y0, std::min(y1, -w));
                if (y1 > w) pieces.emplace_back(std::max(y0, w), y1);
            }
            double s = 0.0;
            for (auto [a, b] : pieces)
                if (b > a) s += rule::integrate([&](double y) { return f(x, y); }, a, b);
            return s;
        };
        std::vector<double> cuts{x0};
        for (double v : {-1.0, 1.0})
            if (v > x0 && v < x1) cuts.push_back(v);
        cuts.push_back(x1);
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i) total += rule::integrate(along_y, cuts[i], cuts[i + 1]);
        return total;
    }

    double circle_correction(double h, int m) const {
        // On cells meeting the circle replace the 2x2 Gauss sum (which
        // dropped nodes inside the disk) by an integral over the exact cut
        // region; cells are aligned with the core mesh.
        const double g = 1.0 / std::sqrt(3.0);
        double corr = 0.0;
        for (double x0 = -2.0; x0 < 2.0 - 1e-12; x0 += h) {
            for (double y0 = -2.0; y0 < 2.0 - 1e-12; y0 += h) {
                double x1 = x0 + h, y1 = y0 + h;
                double dmin = std::pow(x0 > 0 ? x0 : (x1 < 0 ? -x1 : 0.0), 2) + std::pow(y0 > 0 ? y0 : (y1 < 0 ? -y1 : 0.0), 2);
                double dmax = std::max(x0 * x0, x1 * x1) + std::max(y0 * y0, y1 * y1);
                if (!(dmin < 1.0 && dmax > 1.0)) continue;
                auto f = [&](double x, double y) {
                    return inner_band(x, y, m) / (std::pow(std::abs(x), a1_) + std::pow(std::abs(y), a2_));
                };
                double gauss = 0.0;
                for (double sx : {-g, g})
                    for (double sy : {-g, g}) {
                        double x = 0.5 * (x0 + x1) + 0.5 * h * sx, y = 0.5 * (y0 + y1) + 0.5 * h * sy;
                        if (x * x + y * y > 1.0) gauss += 0.25 * h * h * f(x, y);
                    }
                double fine = cut_cell(f, x0, x1, y0, y1);
                corr += fine - gauss;
            }
        }
        return corr;
    }

    double a1_, a2_, q_, r_;
};

// all k-subsets of path indices, pairwise sup-distance <= eps and time gap >= min_sep
template <class Path>
std::vector<std::vector<std::size_t>> brute_force_tuples(const Path& p, int k, double eps, double min_sep) {
    const std::size_t n = p.values.size();
    const double sep = min_sep * (1.0 - 1e-12);
    auto ok = [&](std::size_t a, std::size_t b) {
        if (p.times[b] - p.times[a] < sep) return false;
        for (std::size_t j = 0; j < p.values[a].size(); ++j)
            if (std::abs(p.values[a][j] - p.values[b][j]) > eps) return false;
        return true;
    };
    std::vector<std::vector<std::size_t>> out;
    std::vector<std::size_t> cur;
    auto rec = [&](auto&& self, std::size_t start) -> void {
        if (static_cast<int>(cur.size()) == k) {
            out.push_back(cur);
            return;
        }
        for (std::size_t i = start; i < n; ++i) {
            bool good = true;
            for (std::size_t c : cur) good = good && ok(c, i);
            if (!good) continue;
            cur.push_back(i);
            self(self, i + 1);
            cur.pop_back();
        }
    };
    rec(rec, 0);
    return out;
}

}  // namespace oracle
