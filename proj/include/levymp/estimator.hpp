#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "closedform.hpp"
#include "errors.hpp"
#include "kernels.hpp"
#include "parallel.hpp"
#include "proposal.hpp"
#include "quadrature.hpp"
#include "rng.hpp"
#include "stats.hpp"

namespace levymp {

struct EstimatorOptions {
    double proposal_gamma = 0.15;
    double weight_ratio_limit = 1e6;
    std::size_t block_size = 4096;
    unsigned workers = 0;      // 0: LEVY_MP_THREADS / hardware
    std::uint64_t stream = 0;  // e.g. ladder index; keys the random streams
};

struct IntegralEstimate {
    double value = 0.0;
    double std_error = 0.0;
    std::uint64_t n_samples = 0;  // 0 when the value came from quadrature alone
    std::uint64_t seed = 0;
    RegionSpec region;
    KernelSpec kernel;
    double max_weight_ratio = 0.0;
};

namespace detail {

inline void check_region_kernel(const KernelSpec& kernel, const RegionSpec& region) {
    kernel.validate();
    region.validate();
    if (kernel.dim() != 2) throw DomainError("region integrals are planar; kernel needs two alphas");
    if (region.subregion) throw Unsupported("region integrals over subregions are not estimated");
    bool log_kernel = kernel.variant == KernelVariant::log_corrected;
    if (log_kernel != region.log_variant)
        throw DomainError("log-corrected kernel and log-variant region go together");
}

template <class Factor>
IntegralEstimate region_mc(const Factor& factor, const KernelSpec& kernel, const RegionSpec& region,
                           std::uint64_t n, std::uint64_t seed, const EstimatorOptions& opt) {
    IntegralEstimate est;
    est.seed = seed;
    est.region = region;
    est.kernel = kernel;
    const double floor_r = region.floor_radius();
    if (region.k == 1) {
        est.value = quad::band_integral(factor, 0.0, 0.0, region.q, region.r, floor_r);
        return est;
    }
    if (n < 2) throw DomainError("need at least two samples");
    const RadialProposal proposal(kernel.alphas, opt.proposal_gamma);
    const std::size_t bs = std::max<std::size_t>(opt.block_size, 1);
    const std::size_t nblocks = static_cast<std::size_t>((n + bs - 1) / bs);
    std::vector<RunningStats> blocks(nblocks);
    const int pts = region.k - 1;
    parallel_for(
        nblocks,
        [&](std::size_t b) {
            CounterRng rng(seed, opt.stream, b);
            const std::size_t count = std::min<std::size_t>(bs, static_cast<std::size_t>(n) - b * bs);
            RunningStats st;
            for (std::size_t s = 0; s < count; ++s) {
                double w = 1.0, s1 = 0.0, s2 = 0.0;
                for (int i = 0; i < pts; ++i) {
                    double x[2];
                    double dens = proposal.sample(rng, x);
                    if (x[0] * x[0] + x[1] * x[1] <= floor_r * floor_r) w = 0.0;
                    if (w != 0.0) w *= factor(x[0], x[1]) / dens;
                    s1 += x[0];
                    s2 += x[1];
                }
                if (w != 0.0) w *= quad::band_integral(factor, s1, s2, region.q, region.r, floor_r);
                st.add(w);
            }
            blocks[b] = st;
        },
        opt.workers);
    RunningStats all = pairwise_reduce(std::move(blocks), RunningStats::merge);
    est.n_samples = n;
    est.value = all.mean;
    est.std_error = all.std_error();
    est.max_weight_ratio = all.mean > 0.0 ? all.max / all.mean : 0.0;
    if (est.max_weight_ratio > opt.weight_ratio_limit)
        throw ProposalMismatch("largest importance weight is " + std::to_string(est.max_weight_ratio) +
                                   " times the mean; proposal does not match the integrand",
                               est.value, est.max_weight_ratio);
    return est;
}

}  // namespace detail

// Integral over A_k(q, r) of prod_i factor(x_i).  The last point is
// integrated by quadrature over the four unit squares its position is
// confined to; the other k-1 points are importance sampled.
inline IntegralEstimate mc_region_integral(const KernelSpec& kernel, const RegionSpec& region, std::uint64_t n,
                                           std::uint64_t seed, const EstimatorOptions& opt = {}) {
    detail::check_region_kernel(kernel, region);
    switch (kernel.variant) {
        case KernelVariant::anisotropic:
            return detail::region_mc(AnisotropicFactor{kernel.alphas[0], kernel.alphas[1]}, kernel, region, n, seed, opt);
        case KernelVariant::true_exponent:
            return detail::region_mc(TrueExponentFactor{kernel.alphas[0], kernel.alphas[1], kernel.coefficients[0],
                                                        kernel.coefficients[1]},
                                     kernel, region, n, seed, opt);
        case KernelVariant::log_corrected:
            return detail::region_mc(LogFactor{kernel.alphas[0]}, kernel, region, n, seed, opt);
    }
    throw DomainError("unknown kernel");
}

// ---------------------------------------------------------------- power laws

enum class FitMode { anisotropic_power_law, log_corrected_power_law };
enum class Direction { q_axis, r_axis, diagonal };

inline std::string_view to_string(FitMode m) {
    return m == FitMode::anisotropic_power_law ? "anisotropic_power_law" : "log_corrected_power_law";
}
inline FitMode fit_mode_from_string(std::string_view s) {
    if (s == "anisotropic_power_law") return FitMode::anisotropic_power_law;
    if (s == "log_corrected_power_law") return FitMode::log_corrected_power_law;
    throw DomainError("unknown fit mode '" + std::string(s) + "'");
}
inline std::string_view to_string(Direction d) {
    switch (d) {
        case Direction::q_axis: return "q_axis";
        case Direction::r_axis: return "r_axis";
        case Direction::diagonal: return "diagonal";
    }
    return "?";
}
inline Direction direction_from_string(std::string_view s) {
    for (auto d : {Direction::q_axis, Direction::r_axis, Direction::diagonal})
        if (to_string(d) == s) return d;
    throw DomainError("unknown direction '" + std::string(s) + "'");
}

struct PowerLawFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    double slope_std_error = 0.0;
    std::vector<std::pair<double, double>> points;  // (abscissa, ordinate) in log scale
};

struct ExponentFit {
    FitMode mode = FitMode::anisotropic_power_law;
    Direction direction = Direction::diagonal;
    int k = 1;
    PowerLawFit fit;
    double expected_slope = 0.0;
    std::vector<IntegralEstimate> estimates;
};

inline PowerLawFit fit_power_law(std::vector<std::pair<double, double>> points) {
    std::vector<double> x, y;
    for (auto& [a, b] : points) {
        x.push_back(a);
        y.push_back(b);
    }
    LinearFit lf = least_squares(x, y);
    return PowerLawFit{lf.slope, lf.intercept, lf.r_squared, lf.slope_std_error, std::move(points)};
}

// Ladder (q, r) along a direction: values v give (v, fixed), (fixed, v) or (v, v).
inline std::vector<std::pair<double, double>> make_ladder(Direction dir, std::span<const double> values,
                                                          double fixed = 1.0) {
    std::vector<std::pair<double, double>> out;
    for (double v : values) {
        switch (dir) {
            case Direction::q_axis: out.emplace_back(v, fixed); break;
            case Direction::r_axis: out.emplace_back(fixed, v); break;
            case Direction::diagonal: out.emplace_back(v, v); break;
        }
    }
    return out;
}

namespace detail {

inline void check_ladder(Direction dir, const std::vector<std::pair<double, double>>& ladder) {
    if (ladder.size() < 5) throw DomainError("exponent fit needs at least 5 ladder points");
    std::vector<double> v;
    for (std::size_t i = 0; i < ladder.size(); ++i) {
        auto [q, r] = ladder[i];
        switch (dir) {
            case Direction::q_axis:
                if (r != ladder[0].second) throw DomainError("q_axis ladder must keep r fixed");
                v.push_back(q);
                break;
            case Direction::r_axis:
                if (q != ladder[0].first) throw DomainError("r_axis ladder must keep q fixed");
                v.push_back(r);
                break;
            case Direction::diagonal:
                if (q != r) throw DomainError("diagonal ladder needs q == r");
                v.push_back(q);
                break;
        }
    }
    const double ratio = v[1] / v[0];
    if (!(ratio > 1.0)) throw DomainError("ladder must increase");
    for (std::size_t i = 1; i < v.size(); ++i)
        if (std::abs(v[i] / v[i - 1] - ratio) > 0.01 * ratio) throw DomainError("ladder must be geometrically spaced");
}

}  // namespace detail

// Fits log I_k(q, r) against the log of the natural scale of (q, r).
//  anisotropic kernel: x = ln(q^a1 + r^a2), expected slope (k-1)H - k
//  log-corrected:      x = ln max(q, r ln r), y = ln I + (k-1) ln ln max(q, r),
//                      expected slope k(2 - alpha) - 2
inline ExponentFit asymptotic_exponent_fit(const KernelSpec& kernel, int k, Direction dir,
                                           const std::vector<std::pair<double, double>>& ladder,
                                           std::uint64_t n_per_point, std::uint64_t seed,
                                           const EstimatorOptions& opt = {}) {
    kernel.validate();
    if (kernel.dim() != 2) throw DomainError("exponent fits are planar");
    if (k < 1) throw DomainError("k must be >= 1");
    detail::check_ladder(dir, ladder);
    ExponentFit out;
    out.k = k;
    out.direction = dir;
    const bool log_mode = kernel.variant == KernelVariant::log_corrected;
    out.mode = log_mode ? FitMode::log_corrected_power_law : FitMode::anisotropic_power_law;
    const double a1 = kernel.alphas[0], a2 = kernel.alphas[1];
    if (log_mode) {
        const double a = a1;
        if (!(a > 2.0 * (k - 1) / k) || !(a < 2.0))
            throw ValidityError("log-corrected power law needs 2(k-1)/k < alpha < 2");
        out.expected_slope = k * (2.0 - a) - 2.0;
    } else {
        const double h = 1.0 / a1 + 1.0 / a2;
        if (!(k - (k - 1) * h > 0.0)) throw ValidityError("power law needs k - (k-1)(1/a1 + 1/a2) > 0");
        if (!(a2 < 2.0)) throw ValidityError("power law needs alpha2 < 2");
        if (a1 == 2.0 && a2 == 1.0) throw ValidityError("alpha = (2, 1) is an excluded corner case");
        out.expected_slope = (k - 1) * h - k;
    }
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < ladder.size(); ++i) {
        RegionSpec reg;
        reg.k = k;
        reg.q = ladder[i].first;
        reg.r = ladder[i].second;
        reg.log_variant = log_mode;
        EstimatorOptions o = opt;
        o.stream = opt.stream * 1000003ULL + i;
        IntegralEstimate e = mc_region_integral(kernel, reg, n_per_point, seed, o);
        if (!(e.value > 0.0)) throw DomainError("non-positive integral estimate; cannot fit a power law");
        double x, y;
        if (log_mode) {
            double m = std::max(reg.q, reg.r * std::log(reg.r));
            x = std::log(m);
            y = std::log(e.value) + (k - 1) * std::log(std::log(std::max(reg.q, reg.r)));
        } else {
            x = std::log(std::pow(reg.q, a1) + std::pow(reg.r, a2));
            y = std::log(e.value);
        }
        pts.emplace_back(x, y);
        out.estimates.push_back(std::move(e));
    }
    out.fit = fit_power_law(std::move(pts));
    return out;
}

// ------------------------------------------------------------- convergence

enum class Verdict { convergent, divergent, inconclusive };

inline std::string_view to_string(Verdict v) {
    switch (v) {
        case Verdict::convergent: return "convergent";
        case Verdict::divergent: return "divergent";
        case Verdict::inconclusive: return "inconclusive";
    }
    return "?";
}
inline Verdict verdict_from_string(std::string_view s) {
    for (auto v : {Verdict::convergent, Verdict::divergent, Verdict::inconclusive})
        if (to_string(v) == s) return v;
    throw DomainError("unknown verdict '" + std::string(s) + "'");
}

struct ConvergenceRules {
    double convergent_below = -0.1;  // increment slope below this: convergent
    double divergent_above = -0.05;  // increment slope above this: divergent
    double growth_fraction = 0.05;   // ... or partial values growing this much
    int growth_rungs = 3;            // ... on each of the top rungs
};

struct ConvergenceVerdict {
    Verdict verdict = Verdict::inconclusive;
    double tail_exponent = 0.0;  // slope of log increment vs log rung
    std::vector<std::pair<double, double>> ladder;  // (rung, partial value)
    std::vector<double> std_errors;                 // per rung, Monte Carlo only
};

// increments[j] = partial[j] - partial[j-1] for j >= 1 (increments[0] unused);
// passed separately so shell sums are used without cancellation.
inline ConvergenceVerdict classify_ladder(std::span<const double> rungs, std::span<const double> partial,
                                          std::span<const double> increments, const ConvergenceRules& rules = {}) {
    if (rungs.size() != partial.size() || rungs.size() != increments.size() || rungs.size() < 3)
        throw DomainError("convergence ladder needs at least 3 rungs");
    ConvergenceVerdict v;
    for (std::size_t i = 0; i < rungs.size(); ++i) v.ladder.emplace_back(rungs[i], partial[i]);
    std::vector<double> x, y;
    for (std::size_t i = 1; i < rungs.size(); ++i) {
        if (increments[i] > 0.0) {
            x.push_back(std::log(rungs[i]));
            y.push_back(std::log(increments[i]));
        }
    }
    if (x.size() < 2) {
        v.verdict = Verdict::inconclusive;
        v.tail_exponent = -std::numeric_limits<double>::infinity();
        return v;
    }
    v.tail_exponent = least_squares(x, y).slope;
    bool growing = static_cast<int>(rungs.size()) > rules.growth_rungs;
    for (int t = 0; growing && t < rules.growth_rungs; ++t) {
        std::size_t i = rungs.size() - 1 - static_cast<std::size_t>(t);
        if (!(partial[i - 1] > 0.0) || !(increments[i] / partial[i - 1] > rules.growth_fraction)) growing = false;
    }
    if (v.tail_exponent < rules.convergent_below)
        v.verdict = Verdict::convergent;
    else if (v.tail_exponent > rules.divergent_above || growing)
        v.verdict = Verdict::divergent;
    else
        v.verdict = Verdict::inconclusive;
    return v;
}

struct ThresholdScanEntry {
    double beta = 0.0;
    ConvergenceVerdict verdict;
};

// rungs m_max / 2^j down to 64
inline std::vector<std::size_t> series_ladder(std::size_t m_max) {
    if (m_max < 1000) throw DomainError("series scan needs m_max >= 1000");
    std::vector<std::size_t> r;
    for (std::size_t m = m_max; m >= 64; m /= 2) r.push_back(m);
    std::reverse(r.begin(), r.end());
    return r;
}

// Partial sums over m, n <= M of
//   (m^beta + n^beta)^-1 (m^a1 + n^a2)^-(k - (k-1)H),
// a lattice surrogate of the multipoint energy integral, on the ladder of M.
inline std::vector<ThresholdScanEntry> series_threshold_scan(double a1, double a2, int k,
                                                             std::span<const double> beta_grid,
                                                             std::size_t m_max = 4096,
                                                             const ConvergenceRules& rules = {}, unsigned workers = 0) {
    detail::check_planar_alphas(a1, a2, k);
    for (double b : beta_grid)
        if (!(b > 0.0) || !std::isfinite(b)) throw DomainError("beta values must be positive");
    const auto rungs = series_ladder(m_max);
    const std::size_t ns = rungs.size(), nb = beta_grid.size();
    const double e = k - (k - 1) * (1.0 / a1 + 1.0 / a2);
    std::vector<std::uint8_t> shell(m_max + 1, 0);
    for (std::size_t v = 1, s = 0; v <= m_max; ++v) {
        while (v > rungs[s]) ++s;
        shell[v] = static_cast<std::uint8_t>(s);
    }
    std::vector<double> p1(m_max + 1), p2(m_max + 1);
    std::vector<std::vector<double>> pb(nb, std::vector<double>(m_max + 1));
    for (std::size_t m = 1; m <= m_max; ++m) {
        p1[m] = std::pow(static_cast<double>(m), a1);
        p2[m] = std::pow(static_cast<double>(m), a2);
        for (std::size_t b = 0; b < nb; ++b) pb[b][m] = std::pow(static_cast<double>(m), beta_grid[b]);
    }
    constexpr std::size_t rows_per_block = 64;
    const std::size_t nblocks = (m_max + rows_per_block - 1) / rows_per_block;
    std::vector<std::vector<CompensatedSum>> acc(nblocks, std::vector<CompensatedSum>(nb * ns));
    parallel_for(
        nblocks,
        [&](std::size_t blk) {
            auto& a = acc[blk];
            std::vector<double> row(nb * ns);
            const std::size_t m0 = blk * rows_per_block + 1, m1 = std::min(m_max, m0 + rows_per_block - 1);
            for (std::size_t m = m0; m <= m1; ++m) {
                std::fill(row.begin(), row.end(), 0.0);
                for (std::size_t n = 1; n <= m_max; ++n) {
                    const std::size_t s = shell[std::max(m, n)];
                    const double g = std::exp(-e * std::log(p1[m] + p2[n]));
                    for (std::size_t b = 0; b < nb; ++b) row[b * ns + s] += g / (pb[b][m] + pb[b][n]);
                }
                for (std::size_t i = 0; i < row.size(); ++i) a[i].add(row[i]);
            }
        },
        workers);
    std::vector<ThresholdScanEntry> out;
    for (std::size_t b = 0; b < nb; ++b) {
        std::vector<double> inc(ns), part(ns), x(ns);
        CompensatedSum run;
        for (std::size_t s = 0; s < ns; ++s) {
            CompensatedSum shell_sum;
            for (std::size_t blk = 0; blk < nblocks; ++blk) shell_sum.add(acc[blk][b * ns + s].value());
            inc[s] = shell_sum.value();
            run.add(inc[s]);
            part[s] = run.value();
            x[s] = static_cast<double>(rungs[s]);
        }
        out.push_back({beta_grid[b], classify_ladder(x, part, inc, rules)});
    }
    return out;
}

struct ThresholdEstimate {
    double estimate = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    double closed_form = 0.0;
    bool saturated = false;
    std::vector<ThresholdScanEntry> evaluations;  // in evaluation order
};

// Bisection on the verdicts.  With increments ~ M^(beta* - beta) the rules
// switch off "divergent" at beta* - divergent_above and switch on
// "convergent" at beta* - convergent_below, so both switch points are
// located and shifted back by those margins.
inline ThresholdEstimate estimate_beta_threshold(double a1, double a2, int k, double tol = 0.05,
                                                 std::size_t m_max = 4096, const ConvergenceRules& rules = {},
                                                 unsigned workers = 0) {
    detail::check_planar_alphas(a1, a2, k);
    if (!(tol >= 0.05)) throw DomainError("threshold tolerance must be >= 0.05");
    ThresholdEstimate out;
    out.closed_form = beta_threshold_R2(a1, a2, k);
    std::map<double, Verdict> memo;
    auto eval = [&](double beta) {
        if (auto it = memo.find(beta); it != memo.end()) return it->second;
        const double g[1] = {beta};
        auto scan = series_threshold_scan(a1, a2, k, g, m_max, rules, workers);
        memo[beta] = scan[0].verdict.verdict;
        out.evaluations.push_back(std::move(scan[0]));
        return memo[beta];
    };
    const double top = 2.0;
    if (eval(top) == Verdict::divergent) {
        out.saturated = true;
        out.estimate = out.lower = out.upper = top;
        return out;
    }
    // last divergent beta
    double lo_a = 0.0, hi_a = top;
    while (hi_a - lo_a > tol) {
        double mid = 0.5 * (lo_a + hi_a);
        if (eval(mid) == Verdict::divergent) lo_a = mid;
        else hi_a = mid;
    }
    // first convergent beta
    double lo_b = lo_a, hi_b = top;
    const bool top_convergent = eval(top) == Verdict::convergent;
    if (!top_convergent) out.saturated = true;
    while (top_convergent && hi_b - lo_b > tol) {
        double mid = 0.5 * (lo_b + hi_b);
        if (eval(mid) == Verdict::convergent) hi_b = mid;
        else lo_b = mid;
    }
    const double shift_a = -rules.divergent_above, shift_b = -rules.convergent_below;
    const double mid_a = 0.5 * (lo_a + hi_a) - shift_a;
    const double mid_b = 0.5 * (lo_b + hi_b) - shift_b;
    out.estimate = std::clamp(0.5 * (mid_a + mid_b), 0.0, top);
    out.lower = std::clamp(std::min(lo_a - shift_a, lo_b - shift_b), 0.0, top);
    out.upper = std::clamp(std::max(hi_a - shift_a, hi_b - shift_b), 0.0, top);
    return out;
}

// --------------------------------------------------------- intersections

// Integral over R^{d(k-1)} of (1 + kappa(sum x_j))^-1 prod_j (1 + kappa(x_j))^-1
// truncated to |x| <= R, on a ladder of R, with one set of samples shared by
// all rungs.  Writing y_k = -(x_1 + ... + x_{k-1}) makes the integrand
// symmetric in y_1..y_k; the proposal is the mixture over which y_c is the
// dependent one, each component a product of radial proposals.
inline ConvergenceVerdict intersection_integral_verdict(const KernelSpec& kernel, int k, int d,
                                                        std::span<const double> radius_ladder, std::uint64_t n,
                                                        std::uint64_t seed, const EstimatorOptions& opt = {},
                                                        const ConvergenceRules& rules = {}) {
    kernel.validate();
    if (kernel.variant == KernelVariant::log_corrected)
        throw DomainError("intersection integrals use the anisotropic or true-exponent kernel");
    if (kernel.dim() != d) throw DomainError("kernel dimension does not match d");
    if (k < 2) throw DomainError("intersection integrals need k >= 2");
    if (radius_ladder.size() < 3) throw DomainError("radius ladder needs at least 3 rungs");
    for (std::size_t i = 0; i < radius_ladder.size(); ++i) {
        if (!(radius_ladder[i] > 0.0)) throw DomainError("radii must be positive");
        if (i > 0 && !(radius_ladder[i] > radius_ladder[i - 1])) throw DomainError("radius ladder must increase");
    }
    if (n < 2) throw DomainError("need at least two samples");
    const RadialProposal proposal(kernel.alphas, opt.proposal_gamma);
    const std::size_t nr = radius_ladder.size();
    const std::size_t bs = std::max<std::size_t>(opt.block_size, 1);
    const std::size_t nblocks = static_cast<std::size_t>((n + bs - 1) / bs);
    struct BlockAcc {
        std::vector<RunningStats> cumulative, shell;
    };
    std::vector<BlockAcc> blocks(nblocks);
    const std::size_t du = static_cast<std::size_t>(d), ku = static_cast<std::size_t>(k);
    parallel_for(
        nblocks,
        [&](std::size_t b) {
            CounterRng rng(seed, opt.stream, b);
            const std::size_t count = std::min<std::size_t>(bs, static_cast<std::size_t>(n) - b * bs);
            BlockAcc acc{std::vector<RunningStats>(nr), std::vector<RunningStats>(nr)};
            std::vector<double> y(ku * du), dens(ku), kap(ku);
            for (std::size_t s = 0; s < count; ++s) {
                std::size_t c = std::min<std::size_t>(ku - 1, static_cast<std::size_t>(rng.uniform() * static_cast<double>(ku)));
                std::fill(y.begin() + static_cast<std::ptrdiff_t>(c * du), y.begin() + static_cast<std::ptrdiff_t>((c + 1) * du), 0.0);
                for (std::size_t j = 0; j < ku; ++j) {
                    if (j == c) continue;
                    dens[j] = proposal.sample(rng, &y[j * du]);
                    for (std::size_t t = 0; t < du; ++t) y[c * du + t] -= y[j * du + t];
                }
                dens[c] = proposal.density(&y[c * du]);
                double h = 1.0, all = 1.0;
                for (std::size_t j = 0; j < ku; ++j) {
                    kap[j] = kernel_eval(kernel, std::span<const double>(&y[j * du], du));
                    h /= 1.0 + kap[j];
                    all *= dens[j];
                }
                double mix = 0.0;
                for (std::size_t j = 0; j < ku; ++j) mix += all / dens[j];
                mix /= static_cast<double>(ku);
                const double w = h / mix;
                double norm2 = 0.0;
                for (std::size_t t = 0; t < (ku - 1) * du; ++t) norm2 += y[t] * y[t];
                const double norm = std::sqrt(norm2);
                for (std::size_t i = 0; i < nr; ++i) {
                    bool inside = norm <= radius_ladder[i];
                    bool in_shell = inside && (i == 0 || norm > radius_ladder[i - 1]);
                    acc.cumulative[i].add(inside ? w : 0.0);
                    acc.shell[i].add(in_shell ? w : 0.0);
                }
            }
            blocks[b] = std::move(acc);
        },
        opt.workers);
    std::vector<double> part(nr), inc(nr), se(nr);
    for (std::size_t i = 0; i < nr; ++i) {
        std::vector<RunningStats> cum, sh;
        for (auto& blk : blocks) {
            cum.push_back(blk.cumulative[i]);
            sh.push_back(blk.shell[i]);
        }
        RunningStats c = pairwise_reduce(std::move(cum), RunningStats::merge);
        RunningStats s = pairwise_reduce(std::move(sh), RunningStats::merge);
        part[i] = c.mean;
        se[i] = c.std_error();
        inc[i] = s.mean;
    }
    ConvergenceVerdict v = classify_ladder(radius_ladder, part, inc, rules);
    v.std_errors = std::move(se);
    return v;
}

}  // namespace levymp
