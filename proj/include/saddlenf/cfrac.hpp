// cfrac.hpp
// Exact simple continued fractions: quadratic surds (a + b*sqrt(d))/c via
// the periodic integer algorithm, rationals via Euclid, and the convergent
// recurrence q_n = a_n q_{n-1} + q_{n-2} seeded so q_1/p_1 = a_1.
// theorem2_frame picks the convergent pair (2k+1, 2k+2) bracketing R.

#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <variant>
#include <vector>

#include "saddlenf/lattice.hpp"
#include "saddlenf/scalar.hpp"

namespace saddlenf {

// (a + b*sqrt(d)) / c with integer entries, b != 0, d > 0 non-square.
struct Surd {
    BigInt a, b, c, d;

    double to_double() const {
        double sq = std::sqrt(d.convert_to<double>());
        return (a.convert_to<double>() + b.convert_to<double>() * sq) / c.convert_to<double>();
    }
    std::string str() const {
        return "(" + a.str() + "+" + b.str() + "*sqrt(" + d.str() + "))/" + c.str();
    }
};

inline bool is_perfect_square(const BigInt& d) {
    if (d < 0) return false;
    BigInt r = boost::multiprecision::sqrt(d);
    return r * r == d;
}

inline void validate_surd(const Surd& s) {
    if (s.c == 0) throw DomainError("surd with zero denominator");
    if (s.d <= 0) throw DomainError("surd radicand must be positive");
    if (is_perfect_square(s.d))
        throw NotIrrationalError("radicand " + s.d.str() + " is a perfect square");
    if (s.b == 0) throw NotIrrationalError("surd with b = 0 is rational");
}

// sign of (a + b*sqrt(d))/c - n/m, never 0 for a valid surd
inline int compare_surd_rational(const Surd& s, const BigInt& n, const BigInt& m) {
    validate_surd(s);
    if (m <= 0) throw DomainError("rational comparand needs positive denominator");
    // s - n/m has the sign of m*(a + b sqrt(d)) - n*c, normalized to c > 0
    BigInt a = s.a, b = s.b, c = s.c;
    if (c < 0) { a = -a; b = -b; c = -c; }
    BigInt lhs = m * b;           // coefficient of sqrt(d)
    BigInt rhs = n * c - m * a;   // lhs*sqrt(d) vs rhs
    if (lhs >= 0 && rhs <= 0) return (lhs == 0 && rhs == 0) ? 0 : 1;
    if (lhs <= 0 && rhs >= 0) return (lhs == 0 && rhs == 0) ? 0 : -1;
    BigInt l2 = lhs * lhs * s.d, r2 = rhs * rhs;
    int cmp = l2 > r2 ? 1 : (l2 < r2 ? -1 : 0);
    return lhs > 0 ? cmp : -cmp;
}

inline int surd_sign(const Surd& s) { return compare_surd_rational(s, BigInt(0), BigInt(1)); }

struct CfExpansion {
    std::vector<BigInt> quotients;
    bool rational = false; // finite expansion of a rational input
};

namespace detail {

inline BigInt floor_div(const BigInt& a, const BigInt& b) {
    BigInt q = a / b, r = a % b;
    if (r != 0 && ((r < 0) != (b < 0))) --q;
    return q;
}

// floor((P + sqrt(D))/Q) for irrational sqrt(D), either sign of Q
inline BigInt floor_quad(const BigInt& P, const BigInt& D, const BigInt& Q) {
    BigInt s = boost::multiprecision::sqrt(D); // floor sqrt
    if (Q > 0) return floor_div(P + s, Q);
    return floor_div(-(P + s) - 1, -Q);
}

} // namespace detail

// First `count` partial quotients of a positive quadratic irrational,
// computed on exact integers. The first quotient may be 0 when the value
// lies in (0,1).
inline CfExpansion cf_quotients(const Surd& s, int count) {
    if (count < 1) throw DomainError("quotient count must be >= 1");
    validate_surd(s);
    if (surd_sign(s) <= 0) throw DomainError("surd value must be positive");

    // normalize to (P + sqrt(D))/Q with Q | (D - P^2)
    BigInt P = s.a, Q = s.c, D = s.b * s.b * s.d;
    if (s.b < 0) { P = -P; Q = -Q; } // a + b sqrt(d) = -( -a + |b| sqrt(d) )... flip both
    if ((D - P * P) % Q != 0) {
        BigInt f = boost::multiprecision::abs(Q);
        P *= f;
        D *= f * f;
        Q *= f;
    }
    CfExpansion out;
    out.quotients.reserve(count);
    for (int i = 0; i < count; ++i) {
        BigInt a = detail::floor_quad(P, D, Q);
        out.quotients.push_back(a);
        P = a * Q - P;
        Q = (D - P * P) / Q;
    }
    return out;
}

// Finite expansion of a positive rational; Euclid, so the last quotient of a
// non-integer value exceeds 1.
inline CfExpansion cf_quotients(const Rational& r) {
    if (r.value() <= 0) throw DomainError("continued fraction input must be positive");
    CfExpansion out;
    out.rational = true;
    BigInt num = r.num(), den = r.den();
    while (den != 0) {
        BigInt a = detail::floor_div(num, den);
        out.quotients.push_back(a);
        BigInt rem = num - a * den;
        num = den;
        den = rem;
    }
    return out;
}

struct Convergent {
    BigInt q, p;
};

// q_n/p_n with seeds q0=1, q-1=0, p0=0, p-1=1, so q1/p1 = a1. Consecutive
// pairs satisfy |q_n p_{n+1} - q_{n+1} p_n| = 1 with alternating sign.
inline std::vector<Convergent> cf_convergents(const std::vector<BigInt>& quotients) {
    if (quotients.empty()) throw DomainError("no quotients given");
    for (size_t i = 0; i < quotients.size(); ++i)
        if (quotients[i] < 1)
            throw DomainError("partial quotient " + std::to_string(i + 1) + " is not positive");
    std::vector<Convergent> out;
    out.reserve(quotients.size());
    BigInt q_prev2 = 0, q_prev1 = 1; // q_{-1}, q_0
    BigInt p_prev2 = 1, p_prev1 = 0; // p_{-1}, p_0
    for (const BigInt& a : quotients) {
        BigInt qn = a * q_prev1 + q_prev2;
        BigInt pn = a * p_prev1 + p_prev2;
        out.push_back({qn, pn});
        q_prev2 = q_prev1;
        q_prev1 = qn;
        p_prev2 = p_prev1;
        p_prev1 = pn;
    }
    return out;
}

// How R is specified: exact surd, exact rational (finite expansion, routed
// to the resonance pipeline), or an explicit quotient list.
using CfSpec = std::variant<Surd, Rational, std::vector<long long>>;

namespace detail {

inline long long to_ll(const BigInt& v, const char* what) {
    if (v > std::numeric_limits<long long>::max() || v < std::numeric_limits<long long>::min())
        throw DomainError(std::string(what) + " too large for a lattice frame: " + v.str());
    return v.convert_to<long long>();
}

} // namespace detail

inline ConvergentFrame theorem2_frame(const CfSpec& spec, long long k) {
    if (k < 0) throw DomainError("k must be nonnegative");
    const int need = int(2 * k + 2);

    std::vector<BigInt> quots;
    const Surd* surd = nullptr;
    if (std::holds_alternative<Rational>(spec))
        throw NotIrrationalError("modulus ratio is rational; use the resonance pipeline");
    if (auto* s = std::get_if<Surd>(&spec)) {
        quots = cf_quotients(*s, need).quotients;
        surd = s;
    } else {
        const auto& listed = std::get<std::vector<long long>>(spec);
        if (int(listed.size()) < need)
            throw DomainError("need " + std::to_string(need) + " quotients, got " +
                              std::to_string(listed.size()));
        for (long long a : listed) quots.push_back(BigInt(a));
        quots.resize(need);
    }

    auto conv = cf_convergents(quots); // throws if a quotient is 0 (R < 1 unsupported)
    const Convergent& lo = conv[size_t(2 * k)];     // convergent 2k+1
    const Convergent& hi = conv[size_t(2 * k + 1)]; // convergent 2k+2

    std::vector<long long> small_quots;
    for (const BigInt& a : quots) small_quots.push_back(detail::to_ll(a, "quotient"));
    auto f = make_convergent_frame(detail::to_ll(lo.p, "p"), detail::to_ll(lo.q, "q"),
                                   detail::to_ll(hi.p, "pt"), detail::to_ll(hi.q, "qt"), k,
                                   std::move(small_quots));
    if (surd) {
        // q/p < R < qt/pt, checked exactly
        if (compare_surd_rational(*surd, lo.q, lo.p) <= 0 ||
            compare_surd_rational(*surd, hi.q, hi.p) >= 0)
            throw Error("convergents fail to bracket R"); // unreachable for a correct expansion
    }
    return f;
}

} // namespace saddlenf
