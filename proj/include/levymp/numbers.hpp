#pragma once

#include <boost/rational.hpp>

#include <cctype>
#include <charconv>
#include <climits>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <system_error>

#include "errors.hpp"

namespace levymp {

using Rational = boost::rational<long long>;

// A real number with an exact rational value when one is known.
struct ExactNumber {
    double value = 0.0;
    std::optional<Rational> exact;

    ExactNumber() = default;
    ExactNumber(double v) : value(v) {}
    ExactNumber(Rational q) : value(boost::rational_cast<double>(q)), exact(q) {}
};

namespace detail {

inline bool mul_add_checked(long long& acc, int base, int digit) {
    if (acc > (LLONG_MAX - digit) / base) return false;
    acc = acc * base + digit;
    return true;
}

// decimal literal like -12.5e-3 -> exact rational, if it fits in 64 bits
inline std::optional<Rational> parse_decimal(std::string_view s) {
    std::size_t i = 0;
    bool neg = false;
    if (i < s.size() && (s[i] == '+' || s[i] == '-')) neg = s[i++] == '-';
    long long num = 0, den = 1;
    bool any = false;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) {
        if (!mul_add_checked(num, 10, s[i++] - '0')) return std::nullopt;
        any = true;
    }
    if (i < s.size() && s[i] == '.') {
        ++i;
        while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) {
            if (!mul_add_checked(num, 10, s[i++] - '0')) return std::nullopt;
            if (!mul_add_checked(den, 10, 0)) return std::nullopt;
            any = true;
        }
    }
    if (!any) return std::nullopt;
    int exp10 = 0;
    if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
        ++i;
        auto [p, ec] = std::from_chars(s.data() + i, s.data() + s.size(), exp10);
        if (ec != std::errc{}) return std::nullopt;
        i = static_cast<std::size_t>(p - s.data());
    }
    if (i != s.size()) return std::nullopt;
    for (; exp10 > 0; --exp10)
        if (!mul_add_checked(num, 10, 0)) return std::nullopt;
    for (; exp10 < 0; ++exp10)
        if (!mul_add_checked(den, 10, 0)) return std::nullopt;
    return Rational(neg ? -num : num, den);
}

}  // namespace detail

// Accepts "p/q", decimals and exponent notation.
inline ExactNumber parse_exact(std::string_view text) {
    auto trim = [](std::string_view v) {
        while (!v.empty() && std::isspace(static_cast<unsigned char>(v.front()))) v.remove_prefix(1);
        while (!v.empty() && std::isspace(static_cast<unsigned char>(v.back()))) v.remove_suffix(1);
        return v;
    };
    text = trim(text);
    if (auto slash = text.find('/'); slash != std::string_view::npos) {
        auto p = detail::parse_decimal(trim(text.substr(0, slash)));
        auto q = detail::parse_decimal(trim(text.substr(slash + 1)));
        if (!p || !q) throw DomainError("cannot parse rational '" + std::string(text) + "'");
        if (q->numerator() == 0) throw DomainError("zero denominator in '" + std::string(text) + "'");
        return ExactNumber(*p / *q);
    }
    if (auto q = detail::parse_decimal(text)) return ExactNumber(*q);
    double v = 0.0;
    auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || p != text.data() + text.size())
        throw DomainError("cannot parse number '" + std::string(text) + "'");
    return ExactNumber(v);
}

// A double is read back as the decimal it prints as (shortest round trip),
// so 0.75 from a JSON file becomes exactly 3/4.
inline ExactNumber exact_from_double(double v) {
    if (!std::isfinite(v)) return ExactNumber(v);
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc{}) return ExactNumber(v);
    if (auto q = detail::parse_decimal(std::string_view(buf, static_cast<std::size_t>(p - buf)))) {
        ExactNumber e(v);
        e.exact = *q;
        return e;
    }
    return ExactNumber(v);
}

inline std::string to_string(const Rational& q) {
    if (q.denominator() == 1) return std::to_string(q.numerator());
    return std::to_string(q.numerator()) + "/" + std::to_string(q.denominator());
}

}  // namespace levymp
