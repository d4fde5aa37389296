#pragma once

// Exact rational arithmetic used for feasibility flows, subset-sum gaps and
// reference recursions. Backed by boost::multiprecision so nothing here ever
// overflows silently.

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace sinkcert {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

inline Rational rat_abs(const Rational& r) { return r < 0 ? Rational(-r) : r; }

/// Canonical "p/q" rendering (plain "p" when the denominator is 1).
inline std::string rational_to_string(const Rational& r) {
    std::string s = numerator(r).str();
    if (denominator(r) != 1) {
        s += '/';
        s += denominator(r).str();
    }
    return s;
}

inline Rational rational_from_string(std::string_view sv) {
    const auto slash = sv.find('/');
    try {
        if (slash == std::string_view::npos) return Rational(BigInt(std::string(sv)));
        BigInt num{std::string(sv.substr(0, slash))};
        BigInt den{std::string(sv.substr(slash + 1))};
        if (den == 0) throw std::invalid_argument("zero denominator");
        return Rational(num, den);
    } catch (const std::exception&) {
        throw std::invalid_argument("bad rational literal: " + std::string(sv));
    }
}

/// Snap a double to a nearby simple fraction via its continued-fraction
/// convergents. Stops at the first convergent within a relative tolerance of
/// ~1e-13 (so 0.3 becomes 3/10, not the best denominator<=cap approximant of
/// the binary value) and never emits a denominator above max_den.
inline Rational snap_to_rational(double x, std::int64_t max_den = 1000000000000LL) {
    if (!std::isfinite(x)) throw std::invalid_argument("snap_to_rational: non-finite input");
    if (x == 0.0) return Rational(0);
    const bool neg = x < 0.0;
    const Rational exact{std::abs(x)};  // exact binary value of the double
    const Rational eta = Rational(std::max(std::abs(x), 1.0)) / Rational(10000000000000LL);

    BigInt n = numerator(exact), d = denominator(exact);
    BigInt p0 = 0, q0 = 1, p1 = 1, q1 = 0;  // convergent window
    Rational best;
    while (d != 0) {
        const BigInt a = n / d;
        BigInt p2 = a * p1 + p0, q2 = a * q1 + q0;
        if (q2 > max_den) {
            // out of budget: best bounded-denominator choice is the previous
            // convergent or the largest admissible semiconvergent
            if (q1 == 0) { best = Rational(a); break; }
            best = Rational(p1, q1);
            const BigInt t = (BigInt(max_den) - q0) / q1;
            if (t > 0) {
                Rational semi(t * p1 + p0, t * q1 + q0);
                if (rat_abs(exact - semi) < rat_abs(exact - best)) best = semi;
            }
            break;
        }
        best = Rational(p2, q2);
        if (rat_abs(exact - best) <= eta) break;
        p0 = p1; q0 = q1; p1 = p2; q1 = q2;
        const BigInt r = n - a * d;
        n = d; d = r;
    }
    return neg ? Rational(-best) : best;
}

/// Snap a marginal vector entrywise, then push the leftover mass onto the
/// largest entry so the rational side sums to exactly one. Feasibility is
/// decided by an exact flow threshold later, so the totals must match exactly.
inline std::vector<Rational> snap_marginals(const std::vector<double>& v,
                                            std::int64_t max_den = 1000000000000LL) {
    std::vector<Rational> out;
    out.reserve(v.size());
    Rational total(0);
    std::size_t arg_max = 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        out.push_back(snap_to_rational(v[i], max_den));
        total += out.back();
        if (v[i] > v[arg_max]) arg_max = i;
    }
    if (!v.empty() && total != 1) out[arg_max] += Rational(1) - total;
    return out;
}

}  // namespace sinkcert
