#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iomanip>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "closedform.hpp"
#include "errors.hpp"
#include "estimator.hpp"
#include "kernels.hpp"
#include "numbers.hpp"
#include "pathsim.hpp"
#include "report_io.hpp"
#include "spectral.hpp"

namespace levymp::cli {

inline const std::vector<std::string>& commands() {
    static const std::vector<std::string> c = {"analyze",           "dim",          "exists",
                                               "verify-prop31",     "verify-prop42", "verify-threshold",
                                               "verify-intersection", "simulate",     "scaling-check"};
    return c;
}

struct Tolerances {
    double classify = 1e-8;
    double boundary = 1e-12;
    double proposal_gamma = 0.15;
    double weight_ratio_limit = 1e6;
    double threshold = 0.05;
    ConvergenceRules rules;
};

struct RunConfig {
    std::string command;
    std::optional<std::vector<std::vector<ExactNumber>>> matrix;
    std::optional<std::vector<ExactNumber>> alphas;
    std::optional<std::string> case_label;  // only with alphas
    int k = 2;
    std::uint64_t seed = 1;
    std::uint64_t samples = 200000;
    std::vector<double> ladder;  // q/r values for region fits, radii for intersections
    std::string output_path = "levymp_out";
    double scale_c = 2.0;
    bool strict = false;
    std::string direction;        // default per command
    std::optional<double> fixed;  // fixed coordinate for axis ladders
    std::vector<double> beta_grid;
    std::uint64_t m_max = 4096;
    double horizon = 1.0;
    std::uint64_t n_steps = 1000;
    std::uint64_t n_paths = 10000;
    std::optional<int> scan_k;
    double eps = 0.01;
    double min_sep = 0.01;
    double perturb = 0.0;  // scaling-check: use B + perturb * I
    Tolerances tolerances;
};

namespace detail {

inline ExactNumber exact_from_json(const json& j, const std::string& field) {
    try {
        if (j.is_string()) return parse_exact(j.get<std::string>());
        if (j.is_number_integer()) return ExactNumber(Rational(j.get<long long>()));
        if (j.is_number()) return exact_from_double(j.get<double>());
    } catch (const DomainError& e) {
        throw ConfigError(field, e.what());
    }
    throw ConfigError(field, "expected a number or a rational string like \"4/3\"");
}

template <class T>
T get_field(const json& j, const std::string& field) {
    try {
        return j.get<T>();
    } catch (const json::exception&) {
        throw ConfigError(field, "has the wrong type");
    }
}

inline std::vector<double> number_list(const json& j, const std::string& field) {
    if (!j.is_array()) throw ConfigError(field, "expected an array of numbers");
    std::vector<double> v;
    for (std::size_t i = 0; i < j.size(); ++i) v.push_back(exact_from_json(j[i], field + "[" + std::to_string(i) + "]").value);
    return v;
}

inline json exact_to_json(const ExactNumber& x) {
    if (x.exact) return to_string(*x.exact);
    return io::number(x.value);
}

}  // namespace detail

inline std::vector<ExactNumber> parse_alpha_list(const json& j, const std::string& field) {
    if (!j.is_array() || j.empty()) throw ConfigError(field, "expected a non-empty array");
    std::vector<ExactNumber> v;
    for (std::size_t i = 0; i < j.size(); ++i) v.push_back(detail::exact_from_json(j[i], field + "[" + std::to_string(i) + "]"));
    return v;
}

inline std::vector<std::vector<ExactNumber>> parse_matrix(const json& j, const std::string& field) {
    if (!j.is_array() || j.empty()) throw ConfigError(field, "expected an array of rows");
    std::vector<std::vector<ExactNumber>> m;
    for (std::size_t i = 0; i < j.size(); ++i) {
        std::string f = field + "[" + std::to_string(i) + "]";
        if (!j[i].is_array() || j[i].size() != j.size()) throw ConfigError(f, "matrix must be square");
        m.push_back(parse_alpha_list(j[i], f));
    }
    return m;
}

// Merge a JSON object into cfg; unknown keys are rejected.
inline void apply_json(RunConfig& cfg, const json& j) {
    if (!j.is_object()) throw ConfigError("config", "expected a JSON object");
    static const std::set<std::string> known = {
        "command", "matrix", "alphas", "case_label", "k", "seed", "samples", "ladder", "output_path",
        "scale_c", "strict", "direction", "fixed", "beta_grid", "m_max", "T", "n_steps", "n_paths",
        "scan_k", "eps", "min_sep", "perturb", "tolerances"};
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!known.count(it.key())) throw ConfigError("config." + it.key(), "unknown key");
    using detail::get_field;
    if (j.contains("command")) cfg.command = get_field<std::string>(j["command"], "config.command");
    if (j.contains("matrix") && !j["matrix"].is_null()) cfg.matrix = parse_matrix(j["matrix"], "config.matrix");
    if (j.contains("alphas") && !j["alphas"].is_null()) cfg.alphas = parse_alpha_list(j["alphas"], "config.alphas");
    if (j.contains("case_label") && !j["case_label"].is_null())
        cfg.case_label = get_field<std::string>(j["case_label"], "config.case_label");
    if (j.contains("k")) cfg.k = get_field<int>(j["k"], "config.k");
    if (j.contains("seed")) cfg.seed = get_field<std::uint64_t>(j["seed"], "config.seed");
    if (j.contains("samples")) cfg.samples = get_field<std::uint64_t>(j["samples"], "config.samples");
    if (j.contains("ladder")) cfg.ladder = detail::number_list(j["ladder"], "config.ladder");
    if (j.contains("output_path")) cfg.output_path = get_field<std::string>(j["output_path"], "config.output_path");
    if (j.contains("scale_c")) cfg.scale_c = detail::exact_from_json(j["scale_c"], "config.scale_c").value;
    if (j.contains("strict")) cfg.strict = get_field<bool>(j["strict"], "config.strict");
    if (j.contains("direction")) cfg.direction = get_field<std::string>(j["direction"], "config.direction");
    if (j.contains("fixed") && !j["fixed"].is_null()) cfg.fixed = detail::exact_from_json(j["fixed"], "config.fixed").value;
    if (j.contains("beta_grid")) cfg.beta_grid = detail::number_list(j["beta_grid"], "config.beta_grid");
    if (j.contains("m_max")) cfg.m_max = get_field<std::uint64_t>(j["m_max"], "config.m_max");
    if (j.contains("T")) cfg.horizon = detail::exact_from_json(j["T"], "config.T").value;
    if (j.contains("n_steps")) cfg.n_steps = get_field<std::uint64_t>(j["n_steps"], "config.n_steps");
    if (j.contains("n_paths")) cfg.n_paths = get_field<std::uint64_t>(j["n_paths"], "config.n_paths");
    if (j.contains("scan_k") && !j["scan_k"].is_null()) cfg.scan_k = get_field<int>(j["scan_k"], "config.scan_k");
    if (j.contains("eps")) cfg.eps = detail::exact_from_json(j["eps"], "config.eps").value;
    if (j.contains("min_sep")) cfg.min_sep = detail::exact_from_json(j["min_sep"], "config.min_sep").value;
    if (j.contains("perturb")) cfg.perturb = detail::exact_from_json(j["perturb"], "config.perturb").value;
    if (j.contains("tolerances")) {
        const json& t = j["tolerances"];
        if (!t.is_object()) throw ConfigError("config.tolerances", "expected an object");
        static const std::set<std::string> tk = {"classify", "boundary", "proposal_gamma", "weight_ratio_limit",
                                                 "threshold", "convergent_below", "divergent_above",
                                                 "growth_fraction", "growth_rungs"};
        for (auto it = t.begin(); it != t.end(); ++it)
            if (!tk.count(it.key())) throw ConfigError("config.tolerances." + it.key(), "unknown key");
        auto num = [&](const char* key, double& dst) {
            if (t.contains(key)) dst = detail::exact_from_json(t[key], std::string("config.tolerances.") + key).value;
        };
        auto& tol = cfg.tolerances;
        num("classify", tol.classify);
        num("boundary", tol.boundary);
        num("proposal_gamma", tol.proposal_gamma);
        num("weight_ratio_limit", tol.weight_ratio_limit);
        num("threshold", tol.threshold);
        num("convergent_below", tol.rules.convergent_below);
        num("divergent_above", tol.rules.divergent_above);
        num("growth_fraction", tol.rules.growth_fraction);
        if (t.contains("growth_rungs")) tol.rules.growth_rungs = get_field<int>(t["growth_rungs"], "config.tolerances.growth_rungs");
    }
}

inline json config_to_json(const RunConfig& c) {
    json j;
    j["command"] = c.command;
    if (c.matrix) {
        json m = json::array();
        for (const auto& row : *c.matrix) {
            json r = json::array();
            for (const auto& x : row) r.push_back(detail::exact_to_json(x));
            m.push_back(r);
        }
        j["matrix"] = m;
    } else {
        j["matrix"] = nullptr;
    }
    if (c.alphas) {
        json a = json::array();
        for (const auto& x : *c.alphas) a.push_back(detail::exact_to_json(x));
        j["alphas"] = a;
    } else {
        j["alphas"] = nullptr;
    }
    j["case_label"] = c.case_label ? json(*c.case_label) : json(nullptr);
    j["k"] = c.k;
    j["seed"] = c.seed;
    j["samples"] = c.samples;
    j["ladder"] = io::numbers(c.ladder);
    j["output_path"] = c.output_path;
    j["scale_c"] = io::number(c.scale_c);
    j["strict"] = c.strict;
    j["direction"] = c.direction;
    j["fixed"] = c.fixed ? io::number(*c.fixed) : json(nullptr);
    j["beta_grid"] = io::numbers(c.beta_grid);
    j["m_max"] = c.m_max;
    j["T"] = io::number(c.horizon);
    j["n_steps"] = c.n_steps;
    j["n_paths"] = c.n_paths;
    j["scan_k"] = c.scan_k ? json(*c.scan_k) : json(nullptr);
    j["eps"] = io::number(c.eps);
    j["min_sep"] = io::number(c.min_sep);
    j["perturb"] = io::number(c.perturb);
    const auto& t = c.tolerances;
    j["tolerances"] = json{{"classify", io::number(t.classify)},
                           {"boundary", io::number(t.boundary)},
                           {"proposal_gamma", io::number(t.proposal_gamma)},
                           {"weight_ratio_limit", io::number(t.weight_ratio_limit)},
                           {"threshold", io::number(t.threshold)},
                           {"convergent_below", io::number(t.rules.convergent_below)},
                           {"divergent_above", io::number(t.rules.divergent_above)},
                           {"growth_fraction", io::number(t.rules.growth_fraction)},
                           {"growth_rungs", t.rules.growth_rungs}};
    return j;
}

inline void validate(const RunConfig& c) {
    const auto& cmds = commands();
    if (std::find(cmds.begin(), cmds.end(), c.command) == cmds.end())
        throw ConfigError("command", "unknown command '" + c.command + "'");
    if (c.matrix.has_value() == c.alphas.has_value())
        throw ConfigError("matrix/alphas", "supply exactly one of matrix and alphas");
    if (c.case_label && !c.alphas) throw ConfigError("case_label", "only meaningful together with alphas");
    if (c.k < 1) throw ConfigError("k", "must be >= 1");
    if (c.output_path.empty()) throw ConfigError("output_path", "must not be empty");
    if (!(c.scale_c > 1.0)) throw ConfigError("scale_c", "must be > 1");
    if (c.samples < 2) throw ConfigError("samples", "must be >= 2");
    for (double v : c.ladder)
        if (!(v > 0.0)) throw ConfigError("ladder", "values must be positive");
    if (!(c.horizon > 0.0)) throw ConfigError("T", "must be positive");
    if (c.n_steps < 1) throw ConfigError("n_steps", "must be >= 1");
    if (c.n_paths < 10) throw ConfigError("n_paths", "must be >= 10");
    if (!(c.eps > 0.0)) throw ConfigError("eps", "must be positive");
    if (!(c.min_sep >= 0.0)) throw ConfigError("min_sep", "must be non-negative");
    if (!(c.tolerances.proposal_gamma > 0.0)) throw ConfigError("tolerances.proposal_gamma", "must be positive");
    if (!(c.tolerances.classify > 0.0)) throw ConfigError("tolerances.classify", "must be positive");
}

namespace detail {

inline SpectralProfile profile_of(const RunConfig& c) {
    if (c.matrix) return classify_exponent(make_exponent(*c.matrix, c.scale_c), c.tolerances.classify);
    std::optional<CaseLabel> label;
    if (c.case_label) label = case_label_from_string(*c.case_label);
    return profile_from_alphas(*c.alphas, label);
}

inline StabilityExponent exponent_of(const RunConfig& c) {
    if (c.matrix) return make_exponent(*c.matrix, c.scale_c);
    std::vector<std::vector<ExactNumber>> rows(c.alphas->size(), std::vector<ExactNumber>(c.alphas->size(), ExactNumber(Rational(0))));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& a = (*c.alphas)[i];
        rows[i][i] = a.exact ? ExactNumber(1 / *a.exact) : ExactNumber(1.0 / a.value);
    }
    return make_exponent(rows, c.scale_c);
}

// alphas in the order the user gave them (coordinate order)
inline std::vector<double> coordinate_alphas(const RunConfig& c) {
    if (c.alphas) {
        std::vector<double> v;
        for (const auto& a : *c.alphas) v.push_back(a.value);
        return v;
    }
    return profile_of(c).alphas;
}

inline EstimatorOptions estimator_options(const RunConfig& c) {
    EstimatorOptions o;
    o.proposal_gamma = c.tolerances.proposal_gamma;
    o.weight_ratio_limit = c.tolerances.weight_ratio_limit;
    return o;
}

inline std::filesystem::path out_file(const RunConfig& c, const std::string& name) {
    return std::filesystem::path(c.output_path) / name;
}

inline void write_json(const RunConfig& c, const std::string& name, const json& j) {
    atomic_write(out_file(c, name), j.dump(2) + "\n");
}

inline std::string fmt(double v) { return format_double(v); }

}  // namespace detail

inline constexpr int exit_ok = 0;
inline constexpr int exit_failure = 1;
inline constexpr int exit_invalid = 2;
inline constexpr int exit_inconclusive = 3;

inline int run_command(const RunConfig& c, std::ostream& out) {
    using namespace detail;
    validate(c);
    write_json(c, "config.json", config_to_json(c));
    const auto& cmd = c.command;

    if (cmd == "analyze") {
        SpectralProfile p = profile_of(c);
        write_json(c, "profile.json", json(p));
        out << "case " << to_string(p.case_label) << "\nalphas";
        for (double a : p.alphas) out << ' ' << fmt(a);
        out << '\n';
        if (p.rotation_b) out << "rotation_b " << fmt(*p.rotation_b) << '\n';
        return exit_ok;
    }

    if (cmd == "dim" || cmd == "exists") {
        SpectralProfile p = profile_of(c);
        DimensionReport r = exists_multiple(p, c.k, c.tolerances.boundary);
        write_json(c, "report.json", json(r));
        out << std::left << std::setw(16) << "k" << r.k << '\n'
            << std::setw(16) << "dimension" << r.dim << '\n'
            << std::setw(16) << "case" << to_string(p.case_label) << '\n'
            << std::setw(16) << "exists" << (r.exists ? "yes" : "no") << '\n'
            << std::setw(16) << "boundary" << (r.boundary_case ? "yes" : "no") << '\n';
        if (r.dim_value) out << std::setw(16) << "dim_value" << fmt(*r.dim_value) << '\n';
        if (r.dim_clamped) out << std::setw(16) << "dim_clamped" << fmt(*r.dim_clamped) << '\n';
        if (r.formula_terms)
            out << std::setw(16) << "terms" << fmt(r.formula_terms->first) << ' ' << fmt(r.formula_terms->second) << '\n';
        if (p.dim() == 2) out << std::setw(16) << "beta_threshold" << fmt(beta_threshold_R2(p.alphas[0], p.alphas[1], c.k)) << '\n';
        out << std::setw(16) << "source" << to_string(r.source) << '\n';
        return exit_ok;
    }

    if (cmd == "verify-prop31" || cmd == "verify-prop42") {
        const bool log_mode = cmd == "verify-prop42";
        auto al = coordinate_alphas(c);
        KernelSpec kernel;
        Direction dir;
        double fixed;
        if (log_mode) {
            if (al.size() == 1) al.push_back(al[0]);
            if (al.size() != 2) throw ConfigError("alphas", "log-corrected check needs one alpha");
            kernel = KernelSpec::log_kernel(al[0]);
            dir = direction_from_string(c.direction.empty() ? "r_axis" : c.direction);
            fixed = c.fixed.value_or(3.0);
        } else {
            if (al.size() != 2) throw ConfigError("alphas", "region-integral check needs two alphas");
            kernel = KernelSpec::anisotropic_kernel(al);
            dir = direction_from_string(c.direction.empty() ? "diagonal" : c.direction);
            fixed = c.fixed.value_or(1.0);
        }
        std::vector<double> values = c.ladder.empty() ? std::vector<double>{10, 20, 40, 80, 160} : c.ladder;
        auto ladder = make_ladder(dir, values, fixed);
        ExponentFit f = asymptotic_exponent_fit(kernel, c.k, dir, ladder, c.samples, c.seed, estimator_options(c));
        CsvWriter csv({"q", "r", "estimate", "std_error", "n"});
        for (const auto& e : f.estimates)
            csv.row({e.region.q, e.region.r, e.value, e.std_error, static_cast<double>(e.n_samples)});
        atomic_write(out_file(c, "estimates.csv"), csv.str());
        write_json(c, "fit.json", json(f));
        out << "slope " << fmt(f.fit.slope) << " expected " << fmt(f.expected_slope) << " r2 " << fmt(f.fit.r_squared)
            << '\n';
        return exit_ok;
    }

    if (cmd == "verify-threshold") {
        auto p = profile_of(c);
        if (p.dim() != 2) throw ConfigError("alphas", "threshold scan is planar");
        const double a1 = p.alphas[0], a2 = p.alphas[1];
        std::vector<double> grid = c.beta_grid;
        if (grid.empty())
            for (int i = 1; i <= 19; ++i) grid.push_back(0.1 * i);
        auto scan = series_threshold_scan(a1, a2, c.k, grid, c.m_max, c.tolerances.rules);
        CsvWriter csv({"beta", "M", "partial_sum"});
        for (const auto& e : scan)
            for (auto [m, s] : e.verdict.ladder) csv.row({e.beta, m, s});
        atomic_write(out_file(c, "scan.csv"), csv.str());
        write_json(c, "scan.json", json(scan));
        ThresholdEstimate t = estimate_beta_threshold(a1, a2, c.k, c.tolerances.threshold, c.m_max, c.tolerances.rules);
        write_json(c, "threshold.json", json(t));
        out << "estimate " << fmt(t.estimate) << " [" << fmt(t.lower) << ", " << fmt(t.upper) << "] closed form "
            << fmt(t.closed_form) << '\n';
        bool inconclusive = t.saturated;
        for (const auto& e : scan) inconclusive = inconclusive || e.verdict.verdict == Verdict::inconclusive;
        return c.strict && inconclusive ? exit_inconclusive : exit_ok;
    }

    if (cmd == "verify-intersection") {
        auto al = coordinate_alphas(c);
        KernelSpec kernel = KernelSpec::anisotropic_kernel(al);
        std::vector<double> radii = c.ladder;
        if (radii.empty())
            for (int i = 2; i <= 10; ++i) radii.push_back(std::ldexp(1.0, i));
        ConvergenceVerdict v = intersection_integral_verdict(kernel, c.k, kernel.dim(), radii, c.samples, c.seed,
                                                             estimator_options(c), c.tolerances.rules);
        CsvWriter csv({"radius", "partial_value", "std_error"});
        for (std::size_t i = 0; i < v.ladder.size(); ++i) csv.row({v.ladder[i].first, v.ladder[i].second, v.std_errors[i]});
        atomic_write(out_file(c, "ladder.csv"), csv.str());
        write_json(c, "verdict.json", json(v));
        out << to_string(v.verdict) << " tail_exponent " << fmt(v.tail_exponent) << '\n';
        return c.strict && v.verdict == Verdict::inconclusive ? exit_inconclusive : exit_ok;
    }

    if (cmd == "simulate") {
        auto al = coordinate_alphas(c);
        PathSample p = simulate_diagonal_stable(al, c.horizon, c.n_steps, c.seed);
        std::vector<std::string> header{"t"};
        for (std::size_t j = 0; j < al.size(); ++j) header.push_back("x" + std::to_string(j + 1));
        CsvWriter csv(header);
        for (std::size_t i = 0; i < p.times.size(); ++i) {
            std::vector<double> row{p.times[i]};
            row.insert(row.end(), p.values[i].begin(), p.values[i].end());
            csv.row(row);
        }
        atomic_write(out_file(c, "path.csv"), csv.str());
        if (c.scan_k) {
            auto tuples = close_approach_scan(p, *c.scan_k, c.eps, c.min_sep, 100000);
            write_json(c, "candidates.json", json(tuples));
            out << tuples.size() << " candidate tuples\n";
        }
        out << "wrote " << p.times.size() << " points\n";
        return exit_ok;
    }

    if (cmd == "scaling-check") {
        SpectralProfile p = profile_of(c);
        StabilityExponent e = exponent_of(c);
        if (c.perturb != 0.0) {
            e.matrix += c.perturb * Eigen::MatrixXd::Identity(e.dim(), e.dim());
            e.exact_entries.reset();
        }
        ScalingReport rep = scaling_check(p, e, c.scale_c, c.horizon, c.n_paths, c.seed);
        write_json(c, "ks.json", json(rep));
        const std::size_t d = p.alphas.size();
        std::vector<std::string> header{"t", "path"};
        for (std::size_t j = 0; j < d; ++j) header.push_back("lhs_x" + std::to_string(j + 1));
        for (std::size_t j = 0; j < d; ++j) header.push_back("rhs_x" + std::to_string(j + 1));
        CsvWriter csv(header);
        for (std::size_t t = 0; t < rep.times.size(); ++t)
            for (std::size_t i = 0; i < rep.lhs[t].size(); ++i) {
                std::vector<double> row{rep.times[t], static_cast<double>(i)};
                row.insert(row.end(), rep.lhs[t][i].begin(), rep.lhs[t][i].end());
                row.insert(row.end(), rep.rhs[t][i].begin(), rep.rhs[t][i].end());
                csv.row(row);
            }
        atomic_write(out_file(c, "samples.csv"), csv.str());
        out << "min p-value " << fmt(rep.min_p_value()) << '\n';
        return exit_ok;
    }
    throw ConfigError("command", "unknown command '" + cmd + "'");
}

// Runs a command and maps errors to exit codes.
inline int run(const RunConfig& c, std::ostream& out, std::ostream& err) {
    try {
        return run_command(c, out);
    } catch (const ConfigError& e) {
        err << "invalid config: " << e.what() << '\n';
        return exit_invalid;
    } catch (const DomainError& e) {
        err << "invalid input: " << e.what() << '\n';
        return exit_invalid;
    } catch (const NonFullSpectrum& e) {
        err << "invalid input: " << e.what() << '\n';
        return exit_invalid;
    } catch (const AmbiguousJordan& e) {
        err << "invalid input: " << e.what() << '\n';
        return exit_invalid;
    } catch (const ValidityError& e) {
        err << "invalid input: " << e.what() << '\n';
        return exit_invalid;
    } catch (const Unsupported& e) {
        err << "unsupported: " << e.what() << '\n';
        return exit_invalid;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_failure;
    }
}

}  // namespace levymp::cli
