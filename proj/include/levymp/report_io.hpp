#pragma once

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "closedform.hpp"
#include "errors.hpp"
#include "estimator.hpp"
#include "kernels.hpp"
#include "numbers.hpp"
#include "pathsim.hpp"
#include "spectral.hpp"

namespace levymp {

using json = nlohmann::json;

// 17 significant digits: enough to read back the same double
inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

class CsvWriter {
public:
    explicit CsvWriter(const std::vector<std::string>& header) {
        for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
        out_ << '\n';
        width_ = header.size();
    }
    void row(const std::vector<double>& values) {
        if (values.size() != width_) throw DomainError("csv row width does not match header");
        for (std::size_t i = 0; i < values.size(); ++i) out_ << (i ? "," : "") << format_double(values[i]);
        out_ << '\n';
    }
    std::string str() const { return out_.str(); }

private:
    std::ostringstream out_;
    std::size_t width_ = 0;
};

// Write to a sibling temporary file, then rename over the target.
inline void atomic_write(const std::filesystem::path& target, const std::string& content) {
    namespace fs = std::filesystem;
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    std::random_device rd;
    fs::path tmp = target;
    tmp += ".tmp" + std::to_string(rd());
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw Error("cannot open " + tmp.string() + " for writing");
        f << content;
        f.flush();
        if (!f) throw Error("write to " + tmp.string() + " failed");
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp);
        throw Error("cannot move " + tmp.string() + " to " + target.string() + ": " + ec.message());
    }
}

// ------------------------------------------------------------ json helpers

namespace io {

inline json number(double v) {
    if (std::isfinite(v)) return v;
    return format_double(v);
}

inline double get_number(const json& j) {
    if (j.is_string()) {
        auto s = j.get<std::string>();
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
        if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
        return parse_exact(s).value;
    }
    return j.get<double>();
}

inline json opt_number(const std::optional<double>& v) { return v ? number(*v) : json(nullptr); }

inline std::optional<double> get_opt_number(const json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return get_number(j.at(key));
}

inline json rationals(const std::optional<std::vector<Rational>>& v) {
    if (!v) return nullptr;
    json a = json::array();
    for (const auto& q : *v) a.push_back(to_string(q));
    return a;
}

inline std::optional<std::vector<Rational>> get_rationals(const json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    std::vector<Rational> out;
    for (const auto& e : j.at(key)) {
        auto x = parse_exact(e.get<std::string>());
        if (!x.exact) throw DomainError("expected an exact rational");
        out.push_back(*x.exact);
    }
    return out;
}

inline json numbers(const std::vector<double>& v) {
    json a = json::array();
    for (double x : v) a.push_back(number(x));
    return a;
}

inline std::vector<double> get_numbers(const json& j) {
    std::vector<double> v;
    for (const auto& e : j) v.push_back(get_number(e));
    return v;
}

inline json pairs(const std::vector<std::pair<double, double>>& v) {
    json a = json::array();
    for (auto [x, y] : v) a.push_back(json::array({number(x), number(y)}));
    return a;
}

inline std::vector<std::pair<double, double>> get_pairs(const json& j) {
    std::vector<std::pair<double, double>> v;
    for (const auto& e : j) v.emplace_back(get_number(e.at(0)), get_number(e.at(1)));
    return v;
}

}  // namespace io

inline void to_json(json& j, const SpectralProfile& p) {
    j = json{{"alphas", io::numbers(p.alphas)},
             {"real_parts", io::numbers(p.real_parts)},
             {"multiplicities", p.multiplicities},
             {"case_label", std::string(to_string(p.case_label))},
             {"rotation_b", io::opt_number(p.rotation_b)},
             {"nilpotent_block_sizes", p.nilpotent_block_sizes},
             {"exact_alphas", io::rationals(p.exact_alphas)}};
}

inline void from_json(const json& j, SpectralProfile& p) {
    p.alphas = io::get_numbers(j.at("alphas"));
    p.real_parts = io::get_numbers(j.at("real_parts"));
    p.multiplicities = j.at("multiplicities").get<std::vector<int>>();
    p.case_label = case_label_from_string(j.at("case_label").get<std::string>());
    p.rotation_b = io::get_opt_number(j, "rotation_b");
    p.nilpotent_block_sizes = j.at("nilpotent_block_sizes").get<std::vector<int>>();
    p.exact_alphas = io::get_rationals(j, "exact_alphas");
}

inline bool operator==(const SpectralProfile& a, const SpectralProfile& b) {
    return a.alphas == b.alphas && a.real_parts == b.real_parts && a.multiplicities == b.multiplicities &&
           a.case_label == b.case_label && a.rotation_b == b.rotation_b &&
           a.nilpotent_block_sizes == b.nilpotent_block_sizes && a.exact_alphas == b.exact_alphas;
}

inline void to_json(json& j, const DimensionReport& r) {
    j = json{{"k", r.k},
             {"dim", r.dim},
             {"dim_value", io::opt_number(r.dim_value)},
             {"dim_clamped", io::opt_number(r.dim_clamped)},
             {"exists", r.exists},
             {"boundary_case", r.boundary_case},
             {"formula_terms", r.formula_terms ? json::array({io::number(r.formula_terms->first),
                                                              io::number(r.formula_terms->second)})
                                               : json(nullptr)},
             {"source", std::string(to_string(r.source))}};
}

inline void from_json(const json& j, DimensionReport& r) {
    r.k = j.at("k").get<int>();
    r.dim = j.at("dim").get<int>();
    r.dim_value = io::get_opt_number(j, "dim_value");
    r.dim_clamped = io::get_opt_number(j, "dim_clamped");
    r.exists = j.at("exists").get<bool>();
    r.boundary_case = j.at("boundary_case").get<bool>();
    if (j.at("formula_terms").is_null())
        r.formula_terms.reset();
    else
        r.formula_terms = std::make_pair(io::get_number(j.at("formula_terms").at(0)),
                                         io::get_number(j.at("formula_terms").at(1)));
    r.source = result_source_from_string(j.at("source").get<std::string>());
}

inline bool operator==(const DimensionReport& a, const DimensionReport& b) {
    return a.k == b.k && a.dim == b.dim && a.dim_value == b.dim_value && a.dim_clamped == b.dim_clamped &&
           a.exists == b.exists && a.boundary_case == b.boundary_case && a.formula_terms == b.formula_terms &&
           a.source == b.source;
}

inline void to_json(json& j, const KernelSpec& k) {
    j = json{{"variant", std::string(to_string(k.variant))},
             {"alphas", io::numbers(k.alphas)},
             {"cutoff_radius", io::number(k.cutoff_radius)},
             {"coefficients", io::numbers(k.coefficients)}};
}

inline void from_json(const json& j, KernelSpec& k) {
    k.variant = kernel_variant_from_string(j.at("variant").get<std::string>());
    k.alphas = io::get_numbers(j.at("alphas"));
    k.cutoff_radius = io::get_number(j.at("cutoff_radius"));
    k.coefficients = io::get_numbers(j.at("coefficients"));
}

inline bool operator==(const KernelSpec& a, const KernelSpec& b) {
    return a.variant == b.variant && a.alphas == b.alphas && a.cutoff_radius == b.cutoff_radius &&
           a.coefficients == b.coefficients;
}

inline void to_json(json& j, const RegionSpec& r) {
    j = json{{"k", r.k},
             {"q", io::number(r.q)},
             {"r", io::number(r.r)},
             {"subregion", r.subregion ? json::array({r.subregion->first, r.subregion->second}) : json(nullptr)},
             {"log_variant", r.log_variant}};
}

inline void from_json(const json& j, RegionSpec& r) {
    r.k = j.at("k").get<int>();
    r.q = io::get_number(j.at("q"));
    r.r = io::get_number(j.at("r"));
    if (j.at("subregion").is_null())
        r.subregion.reset();
    else
        r.subregion = std::make_pair(j.at("subregion").at(0).get<int>(), j.at("subregion").at(1).get<int>());
    r.log_variant = j.at("log_variant").get<bool>();
}

inline bool operator==(const RegionSpec& a, const RegionSpec& b) {
    return a.k == b.k && a.q == b.q && a.r == b.r && a.subregion == b.subregion && a.log_variant == b.log_variant;
}

inline void to_json(json& j, const IntegralEstimate& e) {
    j = json{{"value", io::number(e.value)},
             {"std_error", io::number(e.std_error)},
             {"n_samples", e.n_samples},
             {"seed", e.seed},
             {"region", e.region},
             {"kernel", e.kernel},
             {"max_weight_ratio", io::number(e.max_weight_ratio)}};
}

inline void from_json(const json& j, IntegralEstimate& e) {
    e.value = io::get_number(j.at("value"));
    e.std_error = io::get_number(j.at("std_error"));
    e.n_samples = j.at("n_samples").get<std::uint64_t>();
    e.seed = j.at("seed").get<std::uint64_t>();
    e.region = j.at("region").get<RegionSpec>();
    e.kernel = j.at("kernel").get<KernelSpec>();
    e.max_weight_ratio = io::get_number(j.at("max_weight_ratio"));
}

inline bool operator==(const IntegralEstimate& a, const IntegralEstimate& b) {
    return a.value == b.value && a.std_error == b.std_error && a.n_samples == b.n_samples && a.seed == b.seed &&
           a.region == b.region && a.kernel == b.kernel && a.max_weight_ratio == b.max_weight_ratio;
}

inline void to_json(json& j, const PowerLawFit& f) {
    j = json{{"slope", io::number(f.slope)},
             {"intercept", io::number(f.intercept)},
             {"r_squared", io::number(f.r_squared)},
             {"slope_std_error", io::number(f.slope_std_error)},
             {"points", io::pairs(f.points)}};
}

inline void from_json(const json& j, PowerLawFit& f) {
    f.slope = io::get_number(j.at("slope"));
    f.intercept = io::get_number(j.at("intercept"));
    f.r_squared = io::get_number(j.at("r_squared"));
    f.slope_std_error = io::get_number(j.at("slope_std_error"));
    f.points = io::get_pairs(j.at("points"));
}

inline bool operator==(const PowerLawFit& a, const PowerLawFit& b) {
    return a.slope == b.slope && a.intercept == b.intercept && a.r_squared == b.r_squared &&
           a.slope_std_error == b.slope_std_error && a.points == b.points;
}

inline void to_json(json& j, const ExponentFit& f) {
    j = json{{"mode", std::string(to_string(f.mode))},
             {"direction", std::string(to_string(f.direction))},
             {"k", f.k},
             {"fit", f.fit},
             {"expected_slope", io::number(f.expected_slope)},
             {"estimates", f.estimates}};
}

inline void from_json(const json& j, ExponentFit& f) {
    f.mode = fit_mode_from_string(j.at("mode").get<std::string>());
    f.direction = direction_from_string(j.at("direction").get<std::string>());
    f.k = j.at("k").get<int>();
    f.fit = j.at("fit").get<PowerLawFit>();
    f.expected_slope = io::get_number(j.at("expected_slope"));
    f.estimates = j.at("estimates").get<std::vector<IntegralEstimate>>();
}

inline bool operator==(const ExponentFit& a, const ExponentFit& b) {
    return a.mode == b.mode && a.direction == b.direction && a.k == b.k && a.fit == b.fit &&
           a.expected_slope == b.expected_slope && a.estimates == b.estimates;
}

inline void to_json(json& j, const ConvergenceVerdict& v) {
    j = json{{"verdict", std::string(to_string(v.verdict))},
             {"tail_exponent", io::number(v.tail_exponent)},
             {"ladder", io::pairs(v.ladder)},
             {"std_errors", io::numbers(v.std_errors)}};
}

inline void from_json(const json& j, ConvergenceVerdict& v) {
    v.verdict = verdict_from_string(j.at("verdict").get<std::string>());
    v.tail_exponent = io::get_number(j.at("tail_exponent"));
    v.ladder = io::get_pairs(j.at("ladder"));
    v.std_errors = io::get_numbers(j.at("std_errors"));
}

inline bool operator==(const ConvergenceVerdict& a, const ConvergenceVerdict& b) {
    auto same = [](double x, double y) { return x == y || (std::isnan(x) && std::isnan(y)); };
    return a.verdict == b.verdict && same(a.tail_exponent, b.tail_exponent) && a.ladder == b.ladder &&
           a.std_errors == b.std_errors;
}

inline void to_json(json& j, const ThresholdScanEntry& e) { j = json{{"beta", io::number(e.beta)}, {"verdict", e.verdict}}; }

inline void from_json(const json& j, ThresholdScanEntry& e) {
    e.beta = io::get_number(j.at("beta"));
    e.verdict = j.at("verdict").get<ConvergenceVerdict>();
}

inline bool operator==(const ThresholdScanEntry& a, const ThresholdScanEntry& b) {
    return a.beta == b.beta && a.verdict == b.verdict;
}

inline void to_json(json& j, const ThresholdEstimate& t) {
    j = json{{"estimate", io::number(t.estimate)},
             {"lower", io::number(t.lower)},
             {"upper", io::number(t.upper)},
             {"closed_form", io::number(t.closed_form)},
             {"saturated", t.saturated},
             {"evaluations", t.evaluations}};
}

inline void from_json(const json& j, ThresholdEstimate& t) {
    t.estimate = io::get_number(j.at("estimate"));
    t.lower = io::get_number(j.at("lower"));
    t.upper = io::get_number(j.at("upper"));
    t.closed_form = io::get_number(j.at("closed_form"));
    t.saturated = j.at("saturated").get<bool>();
    t.evaluations = j.at("evaluations").get<std::vector<ThresholdScanEntry>>();
}

inline bool operator==(const ThresholdEstimate& a, const ThresholdEstimate& b) {
    return a.estimate == b.estimate && a.lower == b.lower && a.upper == b.upper && a.closed_form == b.closed_form &&
           a.saturated == b.saturated && a.evaluations == b.evaluations;
}

inline void to_json(json& j, const KsEntry& e) {
    j = json{{"time", io::number(e.time)},
             {"coordinate", e.coordinate},
             {"statistic", io::number(e.statistic)},
             {"p_value", io::number(e.p_value)}};
}

inline void from_json(const json& j, KsEntry& e) {
    e.time = io::get_number(j.at("time"));
    e.coordinate = j.at("coordinate").get<int>();
    e.statistic = io::get_number(j.at("statistic"));
    e.p_value = io::get_number(j.at("p_value"));
}

inline bool operator==(const KsEntry& a, const KsEntry& b) {
    return a.time == b.time && a.coordinate == b.coordinate && a.statistic == b.statistic && a.p_value == b.p_value;
}

// samples are exported separately as CSV
inline void to_json(json& j, const ScalingReport& r) {
    j = json{{"c", io::number(r.c)},
             {"n_paths", r.n_paths},
             {"seed", r.seed},
             {"times", io::numbers(r.times)},
             {"min_p_value", io::number(r.min_p_value())},
             {"entries", r.entries}};
}

inline void from_json(const json& j, ScalingReport& r) {
    r.c = io::get_number(j.at("c"));
    r.n_paths = j.at("n_paths").get<std::uint64_t>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.times = io::get_numbers(j.at("times"));
    r.entries = j.at("entries").get<std::vector<KsEntry>>();
    r.lhs.clear();
    r.rhs.clear();
}

inline void to_json(json& j, const CandidateTuple& t) {
    j = json{{"indices", t.indices}, {"times", io::numbers(t.times)}};
}

inline void from_json(const json& j, CandidateTuple& t) {
    t.indices = j.at("indices").get<std::vector<std::size_t>>();
    t.times = io::get_numbers(j.at("times"));
}

}  // namespace levymp
