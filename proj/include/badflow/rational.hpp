#pragma once

#include <gmpxx.h>

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace badflow {

/// Exact rational scalar.  Used for the oracle-grade paths: decimal inputs are
/// parsed losslessly, and cancellations like q*x - p that sit far below double
/// resolution are carried exactly before the final rounding to double.
using bigq = mpq_class;
using bigz = mpz_class;

/// Parse a decimal literal ("-3", "0.25", "1.5e-3") into an exact rational.
inline bigq parse_decimal(const std::string& text) {
    std::string t = text;
    bool neg = false;
    std::size_t pos = 0;
    if (pos < t.size() && (t[pos] == '+' || t[pos] == '-')) neg = (t[pos++] == '-');
    std::string digits;
    long frac_digits = 0;
    bool seen_digit = false, seen_dot = false;
    for (; pos < t.size(); ++pos) {
        const char c = t[pos];
        if (c >= '0' && c <= '9') {
            digits.push_back(c);
            if (seen_dot) ++frac_digits;
            seen_digit = true;
        } else if (c == '.' && !seen_dot) {
            seen_dot = true;
        } else if (c == 'e' || c == 'E') {
            break;
        } else {
            throw std::invalid_argument("parse_decimal: bad literal '" + text + "'");
        }
    }
    long exp10 = 0;
    if (pos < t.size()) { // exponent part
        exp10 = std::stol(t.substr(pos + 1));
    }
    if (!seen_digit) throw std::invalid_argument("parse_decimal: bad literal '" + text + "'");
    bigz num;
    mpz_set_str(num.get_mpz_t(), digits.empty() ? "0" : digits.c_str(), 10); // base 10, leading zeros allowed
    if (neg) num = -num;
    exp10 -= frac_digits;
    bigz scale;
    mpz_ui_pow_ui(scale.get_mpz_t(), 10, static_cast<unsigned long>(std::labs(exp10)));
    bigq q = (exp10 >= 0) ? bigq(num * scale) : bigq(num, scale);
    q.canonicalize();
    return q;
}

/// Exact rational from a double (doubles are dyadic rationals).
inline bigq exact(double x) {
    if (!std::isfinite(x)) throw std::invalid_argument("exact: non-finite double");
    return bigq(x);
}

/// Nearest integer, halves to even.
inline bigz round_nearest(const bigq& x) {
    bigz fl;
    mpz_fdiv_q(fl.get_mpz_t(), x.get_num().get_mpz_t(), x.get_den().get_mpz_t());
    const bigq rem = x - bigq(fl);       // in [0,1)
    const bigq twice = 2 * rem;
    if (twice < 1) return fl;
    if (twice > 1) return fl + 1;
    return mpz_even_p(fl.get_mpz_t()) ? fl : fl + 1;
}

/// Distance to the nearest integer, exact.
inline bigq dist_to_int(const bigq& x) {
    const bigq d = x - bigq(round_nearest(x));
    return d >= 0 ? d : bigq(-d);
}

inline double to_double(const bigq& x) { return x.get_d(); }

using point = std::vector<bigq>; ///< exact point in R^n

inline point point_from_doubles(const std::vector<double>& xs) {
    point p;
    p.reserve(xs.size());
    for (double v : xs) p.push_back(exact(v));
    return p;
}

inline std::vector<double> point_to_doubles(const point& p) {
    std::vector<double> out;
    out.reserve(p.size());
    for (const auto& v : p) out.push_back(v.get_d());
    return out;
}

} // namespace badflow
