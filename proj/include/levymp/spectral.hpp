#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "errors.hpp"
#include "numbers.hpp"

namespace levymp {

enum class CaseLabel { A1_diag, A1_rot, A2, B1, B2, B3, D1, General };

inline std::string_view to_string(CaseLabel c) {
    switch (c) {
        case CaseLabel::A1_diag: return "A1_diag";
        case CaseLabel::A1_rot: return "A1_rot";
        case CaseLabel::A2: return "A2";
        case CaseLabel::B1: return "B1";
        case CaseLabel::B2: return "B2";
        case CaseLabel::B3: return "B3";
        case CaseLabel::D1: return "D1";
        case CaseLabel::General: return "general";
    }
    return "?";
}

inline CaseLabel case_label_from_string(std::string_view s) {
    for (auto c : {CaseLabel::A1_diag, CaseLabel::A1_rot, CaseLabel::A2, CaseLabel::B1, CaseLabel::B2,
                   CaseLabel::B3, CaseLabel::D1, CaseLabel::General})
        if (to_string(c) == s) return c;
    throw DomainError("unknown case label '" + std::string(s) + "'");
}

// Exponent B of an operator-stable (or c-semistable) law, t^B = exp(ln t B).
struct StabilityExponent {
    Eigen::MatrixXd matrix;
    double scale_c = 2.0;
    std::optional<std::vector<Rational>> exact_entries;  // row-major

    int dim() const { return static_cast<int>(matrix.rows()); }

    void validate() const {
        if (matrix.rows() != matrix.cols()) throw DomainError("exponent matrix must be square");
        if (dim() < 1 || dim() > 3) throw DomainError("exponent dimension must be 1, 2 or 3");
        if (!matrix.allFinite()) throw DomainError("exponent matrix has non-finite entries");
        if (!(scale_c > 1.0) || !std::isfinite(scale_c)) throw DomainError("scale_c must be > 1");
        if (exact_entries && exact_entries->size() != static_cast<std::size_t>(matrix.size()))
            throw DomainError("exact entry count does not match the matrix");
    }
};

inline StabilityExponent make_exponent(const std::vector<std::vector<ExactNumber>>& rows, double scale_c = 2.0) {
    const std::size_t d = rows.size();
    StabilityExponent e;
    e.scale_c = scale_c;
    e.matrix.resize(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    std::vector<Rational> exact;
    bool all_exact = true;
    for (std::size_t i = 0; i < d; ++i) {
        if (rows[i].size() != d) throw DomainError("exponent matrix must be square");
        for (std::size_t j = 0; j < d; ++j) {
            e.matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j].value;
            if (rows[i][j].exact)
                exact.push_back(*rows[i][j].exact);
            else
                all_exact = false;
        }
    }
    if (all_exact) e.exact_entries = std::move(exact);
    e.validate();
    return e;
}

struct SpectralProfile {
    std::vector<double> alphas;        // descending
    std::vector<double> real_parts;    // distinct real parts a_i, ascending
    std::vector<int> multiplicities;   // d_i for each a_i
    CaseLabel case_label = CaseLabel::D1;
    std::optional<double> rotation_b;
    std::vector<int> nilpotent_block_sizes;  // Jordan blocks of size > 1
    std::optional<std::vector<Rational>> exact_alphas;

    int dim() const { return static_cast<int>(alphas.size()); }
};

namespace detail {

using CMatrix = Eigen::MatrixXcd;
using cplx = std::complex<double>;

inline CMatrix shifted_power(const Eigen::MatrixXd& b, cplx mu, int m) {
    const auto d = b.rows();
    CMatrix s = b.cast<cplx>() - mu * CMatrix::Identity(d, d);
    CMatrix p = CMatrix::Identity(d, d);
    for (int i = 0; i < m; ++i) p = p * s;
    return p;
}

inline Eigen::VectorXd singular_values(const CMatrix& m) {
    return Eigen::JacobiSVD<CMatrix>(m).singularValues();
}

inline bool ambiguous(double sigma, double cutoff) { return sigma > cutoff / 10.0 && sigma < cutoff * 10.0; }

inline int count_small(const Eigen::VectorXd& sv, double cutoff) {
    int n = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv[i] <= cutoff) ++n;
    return n;
}

// all set partitions of {0..n-1}, n <= 3, as restricted growth strings
inline std::vector<std::vector<int>> set_partitions(int n) {
    std::vector<std::vector<int>> out;
    std::vector<int> a(static_cast<std::size_t>(n), 0);
    auto rec = [&](auto&& self, int i, int maxv) -> void {
        if (i == n) {
            out.push_back(a);
            return;
        }
        for (int v = 0; v <= maxv + 1; ++v) {
            a[static_cast<std::size_t>(i)] = v;
            self(self, i + 1, std::max(maxv, v));
        }
    };
    if (n > 0) {
        a[0] = 0;
        rec(rec, 1, 0);
    }
    return out;
}

struct Cluster {
    std::vector<int> members;
    cplx mu;
};

}  // namespace detail

// Eigenvalues are grouped into clusters that are confirmed algebraically:
// a cluster of size m at mean mu is accepted when (B - mu I)^m has m
// singular values below tol * max(1, |B|)^m.  Averaging a cluster cancels the
// O(eps^(1/m)) splitting of defective eigenvalues, so Jordan blocks survive a
// well-conditioned change of basis.
inline SpectralProfile classify_exponent(const StabilityExponent& exp, double tol = 1e-8) {
    exp.validate();
    if (!(tol > 0.0) || tol >= 1e-2) throw DomainError("classification tolerance must be in (0, 1e-2)");
    using detail::cplx;
    const Eigen::MatrixXd& b = exp.matrix;
    const int d = exp.dim();
    const double norm_b = std::max(1.0, Eigen::JacobiSVD<Eigen::MatrixXd>(b).singularValues()[0]);

    Eigen::EigenSolver<Eigen::MatrixXd> es(b, false);
    if (es.info() != Eigen::Success) throw DomainError("eigenvalue computation failed");
    std::vector<cplx> lam(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) lam[static_cast<std::size_t>(i)] = es.eigenvalues()[i];

    const double loose = 10.0 * std::pow(tol, 1.0 / d);
    auto cutoff = [&](int m) { return tol * std::pow(norm_b, m); };

    auto block_mean = [&](const std::vector<int>& mem) {
        cplx s = 0;
        for (int i : mem) s += lam[static_cast<std::size_t>(i)];
        return s / static_cast<double>(mem.size());
    };

    std::vector<detail::Cluster> best;
    double best_spread = 0.0;
    for (const auto& part : detail::set_partitions(d)) {
        int nblocks = *std::max_element(part.begin(), part.end()) + 1;
        std::vector<detail::Cluster> blocks(static_cast<std::size_t>(nblocks));
        for (int i = 0; i < d; ++i) blocks[static_cast<std::size_t>(part[static_cast<std::size_t>(i)])].members.push_back(i);
        bool ok = true;
        double spread = 0.0;
        for (auto& blk : blocks) {
            blk.mu = block_mean(blk.members);
            const int m = static_cast<int>(blk.members.size());
            if (m == 1) continue;
            for (int i : blk.members)
                for (int j : blk.members) {
                    double gap = std::abs(lam[static_cast<std::size_t>(i)] - lam[static_cast<std::size_t>(j)]);
                    spread = std::max(spread, gap);
                    if (gap > loose * (1.0 + std::abs(lam[static_cast<std::size_t>(i)]))) ok = false;
                }
            if (!ok) break;
            auto sv = detail::singular_values(detail::shifted_power(b, blk.mu, m));
            double sigma_m = sv[d - m];  // m-th smallest
            if (detail::ambiguous(sigma_m, cutoff(m)))
                throw AmbiguousJordan("eigenvalue cluster cannot be resolved at tol=" + std::to_string(tol));
            if (sigma_m > cutoff(m)) ok = false;
        }
        if (!ok) continue;
        if (best.empty() || blocks.size() < best.size() || (blocks.size() == best.size() && spread < best_spread)) {
            best = std::move(blocks);
            best_spread = spread;
        }
    }

    SpectralProfile prof;
    std::vector<double> slot_real;
    bool has_rotation = false;
    for (auto& blk : best) {
        const int m = static_cast<int>(blk.members.size());
        bool is_real = std::abs(blk.mu.imag()) <= loose * (1.0 + std::abs(blk.mu));
        if (!is_real) {
            has_rotation = true;
            prof.rotation_b = std::abs(blk.mu.imag());
        }
        if (is_real) blk.mu = cplx(blk.mu.real(), 0.0);
        for (int i = 0; i < m; ++i) slot_real.push_back(blk.mu.real());
        if (m >= 2 && is_real) {
            std::vector<int> rank(static_cast<std::size_t>(m + 2), 0);
            rank[0] = d;
            for (int j = 1; j <= m + 1; ++j) {
                auto sv = detail::singular_values(detail::shifted_power(b, blk.mu, j));
                for (Eigen::Index i = 0; i < sv.size(); ++i)
                    if (detail::ambiguous(sv[i], cutoff(j)))
                        throw AmbiguousJordan("rank of (B - lambda I)^" + std::to_string(j) +
                                              " is unstable at tol=" + std::to_string(tol));
                rank[static_cast<std::size_t>(j)] = d - detail::count_small(sv, cutoff(j));
            }
            // blocks of size >= j: rank[j-1] - rank[j]
            for (int j = 1; j <= m; ++j) {
                int at_least_j = rank[static_cast<std::size_t>(j - 1)] - rank[static_cast<std::size_t>(j)];
                int at_least_next = rank[static_cast<std::size_t>(j)] - rank[static_cast<std::size_t>(j + 1)];
                int exactly = at_least_j - at_least_next;
                if (j > 1)
                    for (int c = 0; c < exactly; ++c) prof.nilpotent_block_sizes.push_back(j);
            }
        }
    }
    std::sort(prof.nilpotent_block_sizes.begin(), prof.nilpotent_block_sizes.end(), std::greater<>());

    for (double a : slot_real) {
        if (!(a > 0.0)) throw NonFullSpectrum("eigenvalue real part " + std::to_string(a) + " is not positive");
        double alpha = 1.0 / a;
        if (alpha > 2.0 * (1.0 + tol))
            throw NonFullSpectrum("eigenvalue real part " + std::to_string(a) + " gives alpha > 2");
        prof.alphas.push_back(std::min(alpha, 2.0));
    }
    std::sort(prof.alphas.begin(), prof.alphas.end(), std::greater<>());

    std::sort(slot_real.begin(), slot_real.end());
    for (double a : slot_real) {
        if (!prof.real_parts.empty() && std::abs(a - prof.real_parts.back()) <= tol * (1.0 + std::abs(a))) {
            ++prof.multiplicities.back();
        } else {
            prof.real_parts.push_back(a);
            prof.multiplicities.push_back(1);
        }
    }

    auto has_block = [&](int s) {
        return std::find(prof.nilpotent_block_sizes.begin(), prof.nilpotent_block_sizes.end(), s) !=
               prof.nilpotent_block_sizes.end();
    };
    if (d == 1)
        prof.case_label = CaseLabel::D1;
    else if (d == 2)
        prof.case_label = has_block(2) ? CaseLabel::A2 : (has_rotation ? CaseLabel::A1_rot : CaseLabel::A1_diag);
    else
        prof.case_label = has_block(3) ? CaseLabel::B3 : (has_block(2) ? CaseLabel::B2 : CaseLabel::B1);

    // exact alphas when the eigenvalue real parts are rational functions of the entries
    if (exp.exact_entries) {
        const auto& q = *exp.exact_entries;
        auto at = [&](int i, int j) { return q[static_cast<std::size_t>(i * d + j)]; };
        bool lower = true, upper = true;
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                if (j > i && at(i, j) != Rational(0)) lower = false;
                if (j < i && at(i, j) != Rational(0)) upper = false;
            }
        std::vector<Rational> reals;
        bool single_real_part = prof.real_parts.size() == 1;
        if (lower || upper) {
            for (int i = 0; i < d; ++i) reals.push_back(at(i, i));
        } else if (single_real_part) {
            Rational tr = 0;
            for (int i = 0; i < d; ++i) tr += at(i, i);
            for (int i = 0; i < d; ++i) reals.push_back(tr / Rational(d));
        }
        if (!reals.empty()) {
            std::vector<Rational> ex;
            bool ok = true;
            for (auto& a : reals) {
                if (a <= Rational(0)) ok = false;
                else ex.push_back(Rational(1) / a);
            }
            if (ok) {
                std::sort(ex.begin(), ex.end(), std::greater<>());
                for (std::size_t i = 0; i < ex.size(); ++i)
                    if (std::abs(boost::rational_cast<double>(ex[i]) - prof.alphas[i]) > 1e-6) ok = false;
            }
            if (ok) prof.exact_alphas = std::move(ex);
        }
    }
    return prof;
}

// Profile built straight from alphas (no matrix).  The label defaults to the
// diagonal case for the dimension.
inline SpectralProfile profile_from_alphas(const std::vector<ExactNumber>& alphas,
                                           std::optional<CaseLabel> label = std::nullopt) {
    const int d = static_cast<int>(alphas.size());
    if (d < 1) throw DomainError("need at least one alpha");
    SpectralProfile p;
    bool all_exact = true;
    std::vector<Rational> ex;
    for (const auto& a : alphas) {
        if (!(a.value > 0.0) || a.value > 2.0 || !std::isfinite(a.value))
            throw NonFullSpectrum("alpha " + std::to_string(a.value) + " is outside (0, 2]");
        p.alphas.push_back(a.value);
        if (a.exact)
            ex.push_back(*a.exact);
        else
            all_exact = false;
    }
    std::sort(p.alphas.begin(), p.alphas.end(), std::greater<>());
    if (all_exact) {
        std::sort(ex.begin(), ex.end(), std::greater<>());
        p.exact_alphas = std::move(ex);
    }
    std::vector<double> reals;
    for (double a : p.alphas) reals.push_back(1.0 / a);
    std::sort(reals.begin(), reals.end());
    for (double a : reals) {
        if (!p.real_parts.empty() && std::abs(a - p.real_parts.back()) <= 1e-12 * (1.0 + a))
            ++p.multiplicities.back();
        else {
            p.real_parts.push_back(a);
            p.multiplicities.push_back(1);
        }
    }
    CaseLabel def = d == 1 ? CaseLabel::D1 : d == 2 ? CaseLabel::A1_diag : d == 3 ? CaseLabel::B1 : CaseLabel::General;
    p.case_label = label.value_or(def);
    auto all_equal = [&] { return p.real_parts.size() == 1; };
    switch (p.case_label) {
        case CaseLabel::D1:
            if (d != 1) throw DomainError("case D1 needs one alpha");
            break;
        case CaseLabel::A1_diag:
            if (d != 2) throw DomainError("case A1_diag needs two alphas");
            break;
        case CaseLabel::A1_rot:
        case CaseLabel::A2:
            if (d != 2 || !all_equal()) throw DomainError("cases A1_rot and A2 need two equal alphas");
            if (p.case_label == CaseLabel::A2) p.nilpotent_block_sizes = {2};
            break;
        case CaseLabel::B1:
            if (d != 3) throw DomainError("case B1 needs three alphas");
            break;
        case CaseLabel::B2:
            if (d != 3 || p.real_parts.size() == 3) throw DomainError("case B2 needs three alphas, two of them equal");
            p.nilpotent_block_sizes = {2};
            break;
        case CaseLabel::B3:
            if (d != 3 || !all_equal()) throw DomainError("case B3 needs three equal alphas");
            p.nilpotent_block_sizes = {3};
            break;
        case CaseLabel::General:
            if (d < 4) throw DomainError("label 'general' is for dimension >= 4");
            break;
    }
    return p;
}

// exp(A) by scaling and squaring with a diagonal [6/6] Pade approximant
inline Eigen::MatrixXd expm(const Eigen::MatrixXd& a) {
    static constexpr double c[7] = {1.0, 1.0 / 2, 5.0 / 44, 1.0 / 66, 1.0 / 792, 1.0 / 15840, 1.0 / 665280};
    const auto n = a.rows();
    double norm = a.cwiseAbs().colwise().sum().maxCoeff();
    int s = 0;
    if (norm > 0.5) s = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
    Eigen::MatrixXd x = a / std::ldexp(1.0, s);
    Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd num = c[0] * id, den = c[0] * id, pw = id;
    for (int j = 1; j <= 6; ++j) {
        pw = pw * x;
        num += c[j] * pw;
        den += (j % 2 == 0 ? c[j] : -c[j]) * pw;
    }
    Eigen::MatrixXd r = den.partialPivLu().solve(num);
    for (int i = 0; i < s; ++i) r = r * r;
    return r;
}

inline Eigen::MatrixXd matrix_power_cB(const StabilityExponent& exp, double t) {
    exp.validate();
    if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("t^B needs t > 0");
    return expm(std::log(t) * exp.matrix);
}

}  // namespace levymp
