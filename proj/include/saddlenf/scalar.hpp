// scalar.hpp
// Coefficient rings: exact rationals, Gaussian rationals, complex doubles,
// and one-parameter jets over any of the three. All values are immutable
// once built; every operation returns a fresh value.
//
// The common surface used by the series and normal-form layers:
//   operators + - * and unary -,  invert(a),  is_zero(a),
//   zero_like(a) / one_like(a)    (prototype carries the jet order),
//   magnitude_squared(a)          (exact Rational for exact rings, double
//                                  for ApproxComplex; jets use the constant
//                                  term),
//   constant_part(a)              (identity except for jets),
//   approx(a)                     (complex<double> snapshot),
//   str(a)                        (lossless text for exact rings).

#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <complex>
#include <concepts>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "saddlenf/errors.hpp"

namespace saddlenf {

using BigInt = boost::multiprecision::cpp_int;
using BigRat = boost::multiprecision::cpp_rational;

// ---------------------------------------------------------------------------
// Rational: arbitrary-precision a/b, always normalized (gcd 1, b >= 1).
// ---------------------------------------------------------------------------

class Rational {
public:
    Rational() : v_(0) {}
    Rational(long long n) : v_(n) {}
    Rational(const BigInt& num, const BigInt& den) {
        if (den == 0) throw DomainError("rational with zero denominator");
        v_ = BigRat(num, den);
    }
    explicit Rational(BigRat v) : v_(std::move(v)) {}

    // Accepts "a", "a/b", optional leading '-'; arbitrary length.
    static Rational from_string(std::string_view s) {
        auto bad = [&] { return ConfigError("bad rational literal: '" + std::string(s) + "'"); };
        if (s.empty()) throw bad();
        auto slash = s.find('/');
        try {
            if (slash == std::string_view::npos)
                return Rational(BigRat(BigInt(std::string(s))));
            BigInt num{std::string(s.substr(0, slash))};
            BigInt den{std::string(s.substr(slash + 1))};
            if (den == 0) throw bad();
            return Rational(BigRat(num, den));
        } catch (const std::runtime_error&) {
            throw bad();
        }
    }

    const BigRat& value() const { return v_; }
    BigInt num() const { return boost::multiprecision::numerator(v_); }
    BigInt den() const { return boost::multiprecision::denominator(v_); }

    friend Rational operator+(const Rational& a, const Rational& b) { return Rational(a.v_ + b.v_); }
    friend Rational operator-(const Rational& a, const Rational& b) { return Rational(a.v_ - b.v_); }
    friend Rational operator*(const Rational& a, const Rational& b) { return Rational(a.v_ * b.v_); }
    Rational operator-() const { return Rational(-v_); }

    friend bool operator==(const Rational& a, const Rational& b) { return a.v_ == b.v_; }
    friend bool operator!=(const Rational& a, const Rational& b) { return a.v_ != b.v_; }
    friend bool operator<(const Rational& a, const Rational& b) { return a.v_ < b.v_; }
    friend bool operator<=(const Rational& a, const Rational& b) { return a.v_ <= b.v_; }
    friend bool operator>(const Rational& a, const Rational& b) { return a.v_ > b.v_; }
    friend bool operator>=(const Rational& a, const Rational& b) { return a.v_ >= b.v_; }

    double to_double() const { return v_.convert_to<double>(); }

    std::string str() const {
        return num().str() + "/" + den().str();
    }

private:
    BigRat v_;
};

inline bool is_zero(const Rational& a) { return a.value() == 0; }

inline Rational invert(const Rational& a) {
    if (is_zero(a)) throw NonInvertibleError(a.str());
    return Rational(BigRat(1) / a.value());
}

inline Rational zero_like(const Rational&) { return Rational(); }
inline Rational one_like(const Rational&) { return Rational(1); }
inline Rational magnitude_squared(const Rational& a) { return a * a; }
inline const Rational& constant_part(const Rational& a) { return a; }
inline std::complex<double> approx(const Rational& a) { return {a.to_double(), 0.0}; }
inline std::string str(const Rational& a) { return a.str(); }

// ---------------------------------------------------------------------------
// GaussianRational: re + im*i with exact rational components.
// ---------------------------------------------------------------------------

struct GaussianRational {
    Rational re, im;

    GaussianRational() = default;
    GaussianRational(Rational r, Rational i) : re(std::move(r)), im(std::move(i)) {}
    GaussianRational(long long n) : re(n), im(0) {}

    friend GaussianRational operator+(const GaussianRational& a, const GaussianRational& b) {
        return {a.re + b.re, a.im + b.im};
    }
    friend GaussianRational operator-(const GaussianRational& a, const GaussianRational& b) {
        return {a.re - b.re, a.im - b.im};
    }
    friend GaussianRational operator*(const GaussianRational& a, const GaussianRational& b) {
        return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
    }
    GaussianRational operator-() const { return {-re, -im}; }

    friend bool operator==(const GaussianRational& a, const GaussianRational& b) {
        return a.re == b.re && a.im == b.im;
    }
    friend bool operator!=(const GaussianRational& a, const GaussianRational& b) { return !(a == b); }

    std::string str() const { return re.str() + (is_zero(im) ? "" : "+" + im.str() + "i"); }
};

inline bool is_zero(const GaussianRational& a) { return is_zero(a.re) && is_zero(a.im); }
inline Rational magnitude_squared(const GaussianRational& a) {
    return a.re * a.re + a.im * a.im;
}

inline GaussianRational invert(const GaussianRational& a) {
    if (is_zero(a)) throw NonInvertibleError(a.str());
    Rational n = invert(magnitude_squared(a));
    return {a.re * n, -(a.im * n)};
}

inline GaussianRational zero_like(const GaussianRational&) { return {}; }
inline GaussianRational one_like(const GaussianRational&) { return {Rational(1), Rational(0)}; }
inline const GaussianRational& constant_part(const GaussianRational& a) { return a; }
inline std::complex<double> approx(const GaussianRational& a) {
    return {a.re.to_double(), a.im.to_double()};
}
inline std::string str(const GaussianRational& a) { return a.str(); }

// ---------------------------------------------------------------------------
// ApproxComplex: complex double, finite components enforced at construction
// so containers never hold NaN or infinity.
// ---------------------------------------------------------------------------

struct ApproxComplex {
    std::complex<double> v;

    ApproxComplex() : v(0.0, 0.0) {}
    ApproxComplex(long long n) : v(double(n), 0.0) {}
    ApproxComplex(double re, double im = 0.0) : v(re, im) { check(); }
    ApproxComplex(std::complex<double> z) : v(z) { check(); }

    void check() const {
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            throw DomainError("non-finite complex value");
    }

    friend ApproxComplex operator+(const ApproxComplex& a, const ApproxComplex& b) {
        return ApproxComplex(a.v + b.v);
    }
    friend ApproxComplex operator-(const ApproxComplex& a, const ApproxComplex& b) {
        return ApproxComplex(a.v - b.v);
    }
    friend ApproxComplex operator*(const ApproxComplex& a, const ApproxComplex& b) {
        return ApproxComplex(a.v * b.v);
    }
    ApproxComplex operator-() const { return ApproxComplex(-v); }

    friend bool operator==(const ApproxComplex& a, const ApproxComplex& b) { return a.v == b.v; }
    friend bool operator!=(const ApproxComplex& a, const ApproxComplex& b) { return a.v != b.v; }

    std::string str() const {
        return "(" + std::to_string(v.real()) + "," + std::to_string(v.imag()) + ")";
    }
};

inline bool is_zero(const ApproxComplex& a) { return a.v.real() == 0.0 && a.v.imag() == 0.0; }
inline double magnitude_squared(const ApproxComplex& a) { return std::norm(a.v); }

inline ApproxComplex invert(const ApproxComplex& a) {
    if (is_zero(a)) throw NonInvertibleError(a.str());
    return ApproxComplex(1.0 / a.v);
}

inline ApproxComplex zero_like(const ApproxComplex&) { return {}; }
inline ApproxComplex one_like(const ApproxComplex&) { return ApproxComplex(1.0, 0.0); }
inline const ApproxComplex& constant_part(const ApproxComplex& a) { return a; }
inline std::complex<double> approx(const ApproxComplex& a) { return a.v; }
inline std::string str(const ApproxComplex& a) { return a.str(); }

// ---------------------------------------------------------------------------
// Jet: truncated Taylor expansion of order J in one parameter, coefficients
// in a base ring. Two jets interoperate only at equal order; products are
// truncated at order J.
// ---------------------------------------------------------------------------

template <class B>
struct Jet {
    std::vector<B> c; // c[0] + c[1] t + ... + c[J] t^J, size J+1

    Jet() : c(1) {}
    explicit Jet(std::vector<B> coeffs) : c(std::move(coeffs)) {
        if (c.empty()) throw ConfigError("jet needs at least the constant coefficient");
    }
    Jet(long long n) : c(1, B(n)) {}
    static Jet constant(const B& value, int order) {
        Jet j;
        j.c.assign(size_t(order) + 1, zero_like(value));
        j.c[0] = value;
        return j;
    }

    int order() const { return int(c.size()) - 1; }

    static void require_same_order(const Jet& a, const Jet& b) {
        if (a.order() != b.order())
            throw ConfigError("jet order mismatch: " + std::to_string(a.order()) +
                              " vs " + std::to_string(b.order()));
    }

    friend Jet operator+(const Jet& a, const Jet& b) {
        require_same_order(a, b);
        Jet r = a;
        for (size_t i = 0; i < r.c.size(); ++i) r.c[i] = r.c[i] + b.c[i];
        return r;
    }
    friend Jet operator-(const Jet& a, const Jet& b) {
        require_same_order(a, b);
        Jet r = a;
        for (size_t i = 0; i < r.c.size(); ++i) r.c[i] = r.c[i] - b.c[i];
        return r;
    }
    friend Jet operator*(const Jet& a, const Jet& b) {
        require_same_order(a, b);
        Jet r;
        r.c.assign(a.c.size(), zero_like(a.c[0]));
        for (size_t i = 0; i < a.c.size(); ++i)
            for (size_t j = 0; i + j < a.c.size() && j < b.c.size(); ++j)
                r.c[i + j] = r.c[i + j] + a.c[i] * b.c[j];
        return r;
    }
    Jet operator-() const {
        Jet r = *this;
        for (auto& x : r.c) x = -x;
        return r;
    }

    friend bool operator==(const Jet& a, const Jet& b) { return a.c == b.c; }
    friend bool operator!=(const Jet& a, const Jet& b) { return !(a == b); }
};

template <class B>
bool is_zero(const Jet<B>& a) {
    for (const auto& x : a.c)
        if (!is_zero(x)) return false;
    return true;
}

template <class B>
Jet<B> invert(const Jet<B>& a) {
    if (is_zero(a.c[0]))
        throw NonInvertibleError("jet with zero constant term");
    Jet<B> r;
    r.c.assign(a.c.size(), zero_like(a.c[0]));
    B inv0 = invert(a.c[0]);
    r.c[0] = inv0;
    // (sum a_j t^j)(sum r_j t^j) = 1, coefficientwise solve.
    for (size_t k = 1; k < a.c.size(); ++k) {
        B acc = zero_like(a.c[0]);
        for (size_t j = 1; j <= k; ++j) acc = acc + a.c[j] * r.c[k - j];
        r.c[k] = -(inv0 * acc);
    }
    return r;
}

template <class B>
Jet<B> zero_like(const Jet<B>& a) {
    Jet<B> r;
    r.c.assign(a.c.size(), zero_like(a.c[0]));
    return r;
}

template <class B>
Jet<B> one_like(const Jet<B>& a) {
    Jet<B> r = zero_like(a);
    r.c[0] = one_like(a.c[0]);
    return r;
}

template <class B>
auto magnitude_squared(const Jet<B>& a) { return magnitude_squared(a.c[0]); }

template <class B>
const B& constant_part(const Jet<B>& a) { return a.c[0]; }

template <class B>
std::complex<double> approx(const Jet<B>& a) { return approx(a.c[0]); }

template <class B>
std::string str(const Jet<B>& a) {
    std::string s = "[";
    for (size_t i = 0; i < a.c.size(); ++i) {
        if (i) s += ", ";
        s += str(a.c[i]);
    }
    return s + "]";
}

// ---------------------------------------------------------------------------
// Ring concept and helpers.
// ---------------------------------------------------------------------------

template <class R>
concept ScalarRing = std::regular<R> && requires(const R a, const R b) {
    { a + b } -> std::convertible_to<R>;
    { a - b } -> std::convertible_to<R>;
    { a * b } -> std::convertible_to<R>;
    { -a } -> std::convertible_to<R>;
    { invert(a) } -> std::convertible_to<R>;
    { is_zero(a) } -> std::same_as<bool>;
    { zero_like(a) } -> std::convertible_to<R>;
    { one_like(a) } -> std::convertible_to<R>;
};

template <class R>
using MagnitudeOf = decltype(magnitude_squared(std::declval<const R&>()));

inline double mag_to_double(double m) { return m; }
inline double mag_to_double(const Rational& m) { return m.to_double(); }

template <class M> M mag_one();
template <> inline double mag_one<double>() { return 1.0; }
template <> inline Rational mag_one<Rational>() { return Rational(1); }

// True when coefficient comparisons in R are exact (no rounding anywhere).
template <class R> struct is_exact_ring : std::true_type {};
template <> struct is_exact_ring<ApproxComplex> : std::false_type {};
template <class B> struct is_exact_ring<Jet<B>> : is_exact_ring<B> {};
template <class R> inline constexpr bool is_exact_ring_v = is_exact_ring<R>::value;

// Build a ring value from an exact rational; the prototype fixes the jet
// order where relevant.
inline Rational ring_from_rational(const Rational& x, const Rational&) { return x; }
inline GaussianRational ring_from_rational(const Rational& x, const GaussianRational&) {
    return {x, Rational(0)};
}
inline ApproxComplex ring_from_rational(const Rational& x, const ApproxComplex&) {
    return ApproxComplex(x.to_double(), 0.0);
}
template <class B>
Jet<B> ring_from_rational(const Rational& x, const Jet<B>& proto) {
    B base = ring_from_rational(x, proto.c.empty() ? B() : proto.c[0]);
    return Jet<B>::constant(base, proto.order());
}

// a^n for nonnegative integer n.
template <ScalarRing R>
R ring_pow(const R& a, long long n, const R& proto) {
    R r = one_like(proto);
    for (long long i = 0; i < n; ++i) r = r * a;
    return r;
}

} // namespace saddlenf
