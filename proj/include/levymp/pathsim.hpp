#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <iterator>
#include <limits>
#include <numbers>
#include <span>
#include <unordered_map>
#include <vector>

#include "errors.hpp"
#include "numbers.hpp"
#include "parallel.hpp"
#include "rng.hpp"
#include "spectral.hpp"
#include "stats.hpp"

namespace levymp {

// Standard symmetric alpha-stable variate, E exp(i xi X) = exp(-|xi|^alpha),
// by Chambers-Mallows-Stuck.  alpha = 2 is drawn as N(0, 2) directly.
inline double symmetric_stable(double alpha, CounterRng& rng) {
    if (alpha == 2.0) return std::numbers::sqrt2 * rng.normal();
    const double v = std::numbers::pi * (rng.uniform() - 0.5);
    const double w = rng.exponential();
    if (alpha == 1.0) return std::tan(v);
    return std::sin(alpha * v) / std::pow(std::cos(v), 1.0 / alpha) *
           std::pow(std::cos((1.0 - alpha) * v) / w, (1.0 - alpha) / alpha);
}

struct PathSample {
    std::vector<double> times;
    std::vector<std::vector<double>> values;  // values[i] is X(times[i]); values[0] = 0
    SpectralProfile profile;
    std::uint64_t seed = 0;
    std::vector<double> coordinate_alphas;  // alpha of each coordinate, in coordinate order
    bool approximate = false;               // true for truncated semistable paths

    int dim() const { return static_cast<int>(coordinate_alphas.size()); }
};

namespace detail {

inline void check_path_args(std::span<const double> alphas, double t_end, std::size_t n_steps) {
    if (alphas.empty() || alphas.size() > 3) throw DomainError("paths need 1 to 3 coordinates");
    for (double a : alphas)
        if (!(a > 0.0) || a > 2.0) throw DomainError("stable index must be in (0, 2]");
    if (!(t_end > 0.0) || !std::isfinite(t_end)) throw DomainError("path horizon T must be positive");
    if (n_steps < 1) throw DomainError("need at least one step");
}

inline constexpr std::size_t path_block = 4096;

// Fills values by summing increments produced blockwise from keyed streams.
template <class IncrementFn>
PathSample build_path(std::span<const double> alphas, double t_end, std::size_t n_steps, std::uint64_t seed,
                      unsigned workers, IncrementFn&& increment) {
    const std::size_t d = alphas.size();
    PathSample p;
    p.seed = seed;
    p.coordinate_alphas.assign(alphas.begin(), alphas.end());
    std::vector<ExactNumber> ex;
    for (double a : alphas) ex.emplace_back(a);
    p.profile = profile_from_alphas(ex);
    const double dt = t_end / static_cast<double>(n_steps);
    p.times.resize(n_steps + 1);
    for (std::size_t i = 0; i <= n_steps; ++i) p.times[i] = static_cast<double>(i) * dt;
    p.times[n_steps] = t_end;
    const std::size_t nblocks = (n_steps + path_block - 1) / path_block;
    std::vector<std::vector<double>> inc(d, std::vector<double>(n_steps));
    parallel_for(
        nblocks * d,
        [&](std::size_t job) {
            const std::size_t j = job % d, b = job / d;
            CounterRng rng(seed, j, b);
            const std::size_t i1 = std::min(n_steps, (b + 1) * path_block);
            for (std::size_t i = b * path_block; i < i1; ++i) inc[j][i] = increment(j, dt, rng);
        },
        workers);
    p.values.assign(n_steps + 1, std::vector<double>(d, 0.0));
    for (std::size_t i = 1; i <= n_steps; ++i)
        for (std::size_t j = 0; j < d; ++j) p.values[i][j] = p.values[i - 1][j] + inc[j][i - 1];
    return p;
}

}  // namespace detail

// Independent symmetric stable coordinates; the exponent is diag(1/alpha_j).
inline PathSample simulate_diagonal_stable(std::span<const double> alphas, double t_end, std::size_t n_steps,
                                           std::uint64_t seed, unsigned workers = 0) {
    detail::check_path_args(alphas, t_end, n_steps);
    return detail::build_path(alphas, t_end, n_steps, seed, workers,
                              [&](std::size_t j, double dt, CounterRng& rng) {
                                  return std::pow(dt, 1.0 / alphas[j]) * symmetric_stable(alphas[j], rng);
                              });
}

// Approximate semistable example with discrete scale span c: the Levy measure
// puts mass c^-n on each of +-c^(n/alpha), n in [n_min, n_max].  The full
// measure (n over all integers) satisfies c L = L o (c^(1/alpha) .)^-1; the
// truncation keeps the simulation a finite compound Poisson process, so the
// paths only approximate the semistable law.
inline PathSample simulate_discrete_scale_semistable(std::span<const double> alphas, double c, double t_end,
                                                     std::size_t n_steps, std::uint64_t seed, int n_min = -12,
                                                     int n_max = 12, unsigned workers = 0) {
    detail::check_path_args(alphas, t_end, n_steps);
    if (!(c > 1.0)) throw DomainError("scale span c must be > 1");
    if (n_min > n_max) throw DomainError("need n_min <= n_max");
    for (double a : alphas)
        if (a >= 2.0) throw DomainError("semistable jumps need alpha < 2");
    struct Atoms {
        std::vector<double> size, cdf;
        double rate = 0.0;
    };
    std::vector<Atoms> atoms(alphas.size());
    for (std::size_t j = 0; j < alphas.size(); ++j) {
        for (int n = n_min; n <= n_max; ++n) {
            double mass = 2.0 * std::pow(c, -n);
            atoms[j].size.push_back(std::pow(c, n / alphas[j]));
            atoms[j].rate += mass;
            atoms[j].cdf.push_back(atoms[j].rate);
        }
        for (double& v : atoms[j].cdf) v /= atoms[j].rate;
    }
    PathSample p = detail::build_path(alphas, t_end, n_steps, seed, workers,
                                      [&](std::size_t j, double dt, CounterRng& rng) {
                                          const Atoms& at = atoms[j];
                                          // Poisson count by inversion of exponential gaps
                                          double t = rng.exponential() / at.rate, x = 0.0;
                                          while (t <= dt) {
                                              double u = rng.uniform();
                                              auto it = std::lower_bound(at.cdf.begin(), at.cdf.end(), u);
                                              std::size_t idx = std::min<std::size_t>(
                                                  static_cast<std::size_t>(it - at.cdf.begin()), at.size.size() - 1);
                                              x += ((rng() >> 63) ? -1.0 : 1.0) * at.size[idx];
                                              t += rng.exponential() / at.rate;
                                          }
                                          return x;
                                      });
    p.approximate = true;
    return p;
}

struct KsEntry {
    double time = 0.0;
    int coordinate = 0;
    double statistic = 0.0;
    double p_value = 1.0;
};

struct ScalingReport {
    double c = 2.0;
    std::uint64_t n_paths = 0;
    std::uint64_t seed = 0;
    std::vector<KsEntry> entries;
    // samples[t][path] holds (X(ct), c^B X(t)) concatenated, for export
    std::vector<double> times;
    std::vector<std::vector<std::vector<double>>> lhs, rhs;

    double min_p_value() const {
        double m = 1.0;
        for (const auto& e : entries) m = std::min(m, e.p_value);
        return m;
    }
};

// Checks X(ct) =d c^B X(t) at t = T/4, T/2, T with coordinatewise
// two-sample KS tests.  The process is the diagonal stable process with the
// profile's alphas (coordinate j gets alphas[j]); B comes from exp, so a
// perturbed exponent can be used as a negative control.
inline ScalingReport scaling_check(const SpectralProfile& profile, const StabilityExponent& exp, double c, double t_end,
                                   std::size_t n_paths, std::uint64_t seed, unsigned workers = 0) {
    exp.validate();
    const std::size_t d = profile.alphas.size();
    if (static_cast<int>(d) != exp.dim()) throw DomainError("profile and exponent dimensions differ");
    if (!(c > 0.0)) throw DomainError("scale factor c must be positive");
    if (n_paths < 10) throw DomainError("need at least 10 paths");
    const Eigen::MatrixXd cb = matrix_power_cB(exp, c);
    constexpr std::size_t steps = 4;
    ScalingReport rep;
    rep.c = c;
    rep.n_paths = n_paths;
    rep.seed = seed;
    rep.times = {t_end / 4.0, t_end / 2.0, t_end};
    const std::size_t grid_idx[3] = {1, 2, 4};
    rep.lhs.assign(3, std::vector<std::vector<double>>(n_paths, std::vector<double>(d)));
    rep.rhs = rep.lhs;
    parallel_for(
        n_paths,
        [&](std::size_t i) {
            PathSample a = simulate_diagonal_stable(profile.alphas, c * t_end, steps, stream_key(seed, 0, i), 1);
            PathSample b = simulate_diagonal_stable(profile.alphas, t_end, steps, stream_key(seed, 1, i), 1);
            for (std::size_t t = 0; t < 3; ++t) {
                Eigen::VectorXd xb(static_cast<Eigen::Index>(d));
                for (std::size_t j = 0; j < d; ++j) xb[static_cast<Eigen::Index>(j)] = b.values[grid_idx[t]][j];
                Eigen::VectorXd mapped = cb * xb;
                for (std::size_t j = 0; j < d; ++j) {
                    rep.lhs[t][i][j] = a.values[grid_idx[t]][j];
                    rep.rhs[t][i][j] = mapped[static_cast<Eigen::Index>(j)];
                }
            }
        },
        workers);
    for (std::size_t t = 0; t < 3; ++t) {
        for (std::size_t j = 0; j < d; ++j) {
            std::vector<double> l(n_paths), r(n_paths);
            for (std::size_t i = 0; i < n_paths; ++i) {
                l[i] = rep.lhs[t][i][j];
                r[i] = rep.rhs[t][i][j];
            }
            KsResult ks = ks_two_sample(std::move(l), std::move(r));
            rep.entries.push_back({rep.times[t], static_cast<int>(j), ks.statistic, ks.p_value});
        }
    }
    return rep;
}

struct CandidateTuple {
    std::vector<std::size_t> indices;
    std::vector<double> times;
};

// k-tuples of grid times, pairwise at least min_sep apart, whose path values
// fit in a common axis-parallel box of side eps (all pairwise sup-distances
// <= eps).  Points are hashed to an eps-grid; only neighbouring cells are
// compared.
inline std::vector<CandidateTuple> close_approach_scan(const PathSample& path, int k, double eps, double min_sep,
                                                       std::size_t max_results = std::numeric_limits<std::size_t>::max()) {
    if (k < 2) throw DomainError("close approaches need k >= 2");
    if (!(eps > 0.0)) throw DomainError("eps must be positive");
    if (!(min_sep >= 0.0)) throw DomainError("min_sep must be non-negative");
    const std::size_t n = path.values.size(), d = static_cast<std::size_t>(path.dim());
    if (path.times.size() != n) throw DomainError("path times and values differ in length");
    if (d == 0 || d > 3) throw DomainError("paths need 1 to 3 coordinates");
    auto cell_of = [&](const std::vector<double>& x, std::array<long long, 3>& c) {
        for (std::size_t j = 0; j < 3; ++j) c[j] = j < d ? static_cast<long long>(std::floor(x[j] / eps)) : 0;
    };
    auto key_of = [](const std::array<long long, 3>& c) {
        std::uint64_t h = 0x9e3779b97f4a7c15ULL;
        for (long long v : c) h = mix64(h ^ static_cast<std::uint64_t>(v));
        return h;
    };
    std::unordered_map<std::uint64_t, std::vector<std::size_t>> grid;
    std::vector<std::array<long long, 3>> cells(n);
    for (std::size_t i = 0; i < n; ++i) {
        cell_of(path.values[i], cells[i]);
        grid[key_of(cells[i])].push_back(i);
    }
    const double sep = min_sep * (1.0 - 1e-12);
    auto close = [&](std::size_t a, std::size_t b) {
        for (std::size_t j = 0; j < d; ++j)
            if (std::abs(path.values[a][j] - path.values[b][j]) > eps) return false;
        return true;
    };
    // forward neighbours: j > i, close in space and separated in time
    std::vector<std::vector<std::size_t>> fwd(n);
    const int reach[3] = {1, d > 1 ? 1 : 0, d > 2 ? 1 : 0};
    for (std::size_t i = 0; i < n; ++i) {
        std::array<long long, 3> c = cells[i];
        for (int a = -reach[0]; a <= reach[0]; ++a)
            for (int b = -reach[1]; b <= reach[1]; ++b)
                for (int e = -reach[2]; e <= reach[2]; ++e) {
                    std::array<long long, 3> nc{c[0] + a, c[1] + b, c[2] + e};
                    auto it = grid.find(key_of(nc));
                    if (it == grid.end()) continue;
                    for (std::size_t j : it->second)
                        if (j > i && path.times[j] - path.times[i] >= sep && close(i, j)) fwd[i].push_back(j);
                }
        std::sort(fwd[i].begin(), fwd[i].end());
    }
    std::vector<CandidateTuple> out;
    std::vector<std::size_t> stack;
    auto extend = [&](auto&& self, const std::vector<std::size_t>& cand) -> void {
        if (out.size() >= max_results) return;
        if (static_cast<int>(stack.size()) == k) {
            CandidateTuple t;
            t.indices = stack;
            for (std::size_t i : stack) t.times.push_back(path.times[i]);
            out.push_back(std::move(t));
            return;
        }
        for (std::size_t j : cand) {
            std::vector<std::size_t> next;
            std::set_intersection(cand.begin(), cand.end(), fwd[j].begin(), fwd[j].end(), std::back_inserter(next));
            if (static_cast<int>(stack.size()) + 1 + static_cast<int>(next.size()) < k) continue;
            stack.push_back(j);
            self(self, next);
            stack.pop_back();
            if (out.size() >= max_results) return;
        }
    };
    for (std::size_t i = 0; i < n && out.size() < max_results; ++i) {
        stack.assign(1, i);
        extend(extend, fwd[i]);
    }
    return out;
}

}  // namespace levymp
