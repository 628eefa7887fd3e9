// series.hpp
// Truncated bivariate power series over a scalar ring, and planar maps with
// diagonal linear part. Everything is truncated at an explicit total-degree
// bound D; retained coefficients are exact per operation (exact rings are
// exact, ApproxComplex is correctly rounded per ring op). Exact rings never
// store zero coefficients; approximate rings keep whatever was computed, so
// no small value is silently pruned.

#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "saddlenf/errors.hpp"
#include "saddlenf/lattice.hpp"
#include "saddlenf/scalar.hpp"

namespace saddlenf {

namespace detail {

// Jets of different orders must not meet; proven by trying an op.
template <ScalarRing R>
void require_compatible(const R& a, const R& b) {
    (void)(a + b);
}

} // namespace detail

template <ScalarRing R>
class Series2 {
public:
    using Terms = std::map<MultiIndex, R>;

    Series2(long long degree_bound, const R& prototype)
        : D_(degree_bound), proto_(zero_like(prototype)) {
        if (degree_bound < 0) throw ConfigError("series degree bound must be nonnegative");
    }

    static Series2 monomial(MultiIndex k, const R& coeff, long long degree_bound) {
        Series2 s(degree_bound, coeff);
        s.set_coeff(k, coeff);
        return s;
    }

    long long degree_bound() const { return D_; }
    const R& prototype() const { return proto_; }
    const Terms& terms() const { return c_; }

    R coeff(MultiIndex k) const {
        auto it = c_.find(k);
        return it == c_.end() ? proto_ : it->second;
    }

    // Explicit writes outside the bound are caller bugs; truncation is only
    // for computed results (add_term).
    void set_coeff(MultiIndex k, const R& v) {
        check_key(k);
        if (k.degree() > D_)
            throw ConfigError("coefficient at total degree " + std::to_string(k.degree()) +
                              " exceeds bound " + std::to_string(D_));
        if (is_exact_ring_v<R> && is_zero(v)) {
            c_.erase(k);
            return;
        }
        auto it = c_.find(k);
        if (it == c_.end()) c_.emplace(k, v);
        else it->second = v;
    }

    void add_term(MultiIndex k, const R& v) {
        check_key(k);
        if (k.degree() > D_) return; // truncation
        auto it = c_.find(k);
        if (it == c_.end()) {
            if (!(is_exact_ring_v<R> && is_zero(v))) c_.emplace(k, v);
            return;
        }
        it->second = it->second + v;
        if (is_exact_ring_v<R> && is_zero(it->second)) c_.erase(it);
    }

    void erase_term(MultiIndex k) { c_.erase(k); }

    bool is_zero_series() const {
        for (const auto& [k, v] : c_)
            if (!is_zero(v)) return false;
        return true;
    }

    friend bool operator==(const Series2& a, const Series2& b) {
        if (a.D_ != b.D_) return false;
        // compare nonzero content so stored approximate zeros do not matter
        auto next_nonzero = [](auto it, auto end) {
            while (it != end && is_zero(it->second)) ++it;
            return it;
        };
        auto ia = next_nonzero(a.c_.begin(), a.c_.end());
        auto ib = next_nonzero(b.c_.begin(), b.c_.end());
        while (ia != a.c_.end() && ib != b.c_.end()) {
            if (ia->first != ib->first || !(ia->second == ib->second)) return false;
            ia = next_nonzero(++ia, a.c_.end());
            ib = next_nonzero(++ib, b.c_.end());
        }
        return ia == a.c_.end() && ib == b.c_.end();
    }
    friend bool operator!=(const Series2& a, const Series2& b) { return !(a == b); }

private:
    static void check_key(MultiIndex k) {
        if (k.m1 < 0 || k.m2 < 0) throw ConfigError("negative exponent in series term");
    }

    long long D_;
    R proto_;
    Terms c_;
};

// dst += factor * src, truncated at dst's bound (and cap if given)
template <ScalarRing R>
void add_scaled(Series2<R>& dst, const Series2<R>& src, const R& factor, long long cap = -1) {
    if (is_zero(factor)) return;
    long long lim = cap < 0 ? dst.degree_bound() : std::min(cap, dst.degree_bound());
    for (const auto& [k, v] : src.terms()) {
        if (k.degree() > lim) continue;
        if (is_zero(v)) continue;
        dst.add_term(k, factor * v);
    }
}

template <ScalarRing R>
Series2<R> operator+(const Series2<R>& a, const Series2<R>& b) {
    detail::require_compatible(a.prototype(), b.prototype());
    Series2<R> r(std::min(a.degree_bound(), b.degree_bound()), a.prototype());
    for (const auto& [k, v] : a.terms()) r.add_term(k, v);
    for (const auto& [k, v] : b.terms()) r.add_term(k, v);
    return r;
}

template <ScalarRing R>
Series2<R> operator-(const Series2<R>& a, const Series2<R>& b) {
    detail::require_compatible(a.prototype(), b.prototype());
    Series2<R> r(std::min(a.degree_bound(), b.degree_bound()), a.prototype());
    for (const auto& [k, v] : a.terms()) r.add_term(k, v);
    for (const auto& [k, v] : b.terms()) r.add_term(k, -v);
    return r;
}

template <ScalarRing R>
Series2<R> mul_truncated(const Series2<R>& a, const Series2<R>& b, long long cap) {
    detail::require_compatible(a.prototype(), b.prototype());
    long long lim = std::min({cap, a.degree_bound(), b.degree_bound()});
    Series2<R> r(std::min(a.degree_bound(), b.degree_bound()), a.prototype());
    for (const auto& [ka, va] : a.terms()) {
        if (is_zero(va) || ka.degree() > lim) continue;
        for (const auto& [kb, vb] : b.terms()) {
            // keys are lex-ordered, so degree is not monotone along the loop
            if (ka.degree() + kb.degree() > lim || is_zero(vb)) continue;
            r.add_term({ka.m1 + kb.m1, ka.m2 + kb.m2}, va * vb);
        }
    }
    return r;
}

template <ScalarRing R>
Series2<R> operator*(const Series2<R>& a, const Series2<R>& b) {
    return mul_truncated(a, b, std::min(a.degree_bound(), b.degree_bound()));
}

enum class SeriesOp { Add, Sub, Mul };

template <ScalarRing R>
Series2<R> series_arith(const Series2<R>& a, const Series2<R>& b, SeriesOp op) {
    switch (op) {
        case SeriesOp::Add: return a + b;
        case SeriesOp::Sub: return a - b;
        case SeriesOp::Mul: return a * b;
    }
    throw ConfigError("unknown series op");
}

// Evaluation with cached powers of the two arguments.
template <ScalarRing R>
R series_eval(const Series2<R>& s, const R& z1, const R& z2) {
    long long D = s.degree_bound();
    std::vector<R> p1{one_like(z1)}, p2{one_like(z2)};
    for (long long j = 1; j <= D; ++j) {
        p1.push_back(p1.back() * z1);
        p2.push_back(p2.back() * z2);
    }
    R acc = zero_like(z1);
    for (const auto& [k, v] : s.terms()) {
        if (is_zero(v)) continue;
        acc = acc + v * p1[size_t(k.m1)] * p2[size_t(k.m2)];
    }
    return acc;
}

// ---------------------------------------------------------------------------
// PlanarMap: x -> (mu1 x1, mu2 x2) + nonlinear part, all terms of the
// nonlinear series have total degree >= 2.
// ---------------------------------------------------------------------------

template <ScalarRing R>
struct PlanarMap {
    R mu1, mu2;
    Series2<R> nl1, nl2;
    long long D;

    PlanarMap(R m1, R m2, Series2<R> n1, Series2<R> n2)
        : mu1(std::move(m1)), mu2(std::move(m2)), nl1(std::move(n1)), nl2(std::move(n2)),
          D(nl1.degree_bound()) {
        if (nl1.degree_bound() != nl2.degree_bound())
            throw ConfigError("planar map components have different degree bounds");
        detail::require_compatible(mu1, mu2);
        detail::require_compatible(mu1, nl1.prototype());
        for (const Series2<R>* s : {&nl1, &nl2})
            for (const auto& [k, v] : s->terms())
                if (k.degree() < 2)
                    throw ConfigError("nonlinear part holds a term of total degree " +
                                      std::to_string(k.degree()));
    }

    static PlanarMap linear(const R& m1, const R& m2, long long degree_bound) {
        Series2<R> z(degree_bound, m1);
        return PlanarMap(m1, m2, z, z);
    }

    static PlanarMap identity(const R& proto, long long degree_bound) {
        return linear(one_like(proto), one_like(proto), degree_bound);
    }

    const R& mu(int i) const {
        if (i != 1 && i != 2) throw ConfigError("component index must be 1 or 2");
        return i == 1 ? mu1 : mu2;
    }
    const Series2<R>& nl(int i) const {
        if (i != 1 && i != 2) throw ConfigError("component index must be 1 or 2");
        return i == 1 ? nl1 : nl2;
    }
    Series2<R>& nl(int i) {
        if (i != 1 && i != 2) throw ConfigError("component index must be 1 or 2");
        return i == 1 ? nl1 : nl2;
    }

    // full polynomial of component i, linear term included
    Series2<R> component(int i) const {
        Series2<R> s = nl(i);
        s.set_coeff(i == 1 ? MultiIndex{1, 0} : MultiIndex{0, 1}, mu(i));
        return s;
    }

    bool axis_preserving() const {
        for (const auto& [k, v] : nl1.terms())
            if (!is_zero(v) && k.m1 == 0) return false;
        for (const auto& [k, v] : nl2.terms())
            if (!is_zero(v) && k.m2 == 0) return false;
        return true;
    }

    bool is_linear() const { return nl1.is_zero_series() && nl2.is_zero_series(); }

    friend bool operator==(const PlanarMap& a, const PlanarMap& b) {
        return a.D == b.D && a.mu1 == b.mu1 && a.mu2 == b.mu2 && a.nl1 == b.nl1 && a.nl2 == b.nl2;
    }
    friend bool operator!=(const PlanarMap& a, const PlanarMap& b) { return !(a == b); }
};

namespace detail {

// F o G with result coefficients exact up to total degree `cap` (and dropped
// beyond); cap = -1 means the shared bound D. Powers G1^a G2^b are built
// incrementally along the lattice triangle.
template <ScalarRing R>
PlanarMap<R> map_compose_capped(const PlanarMap<R>& F, const PlanarMap<R>& G, long long cap) {
    if (F.D != G.D) throw ConfigError("composition needs equal degree bounds");
    require_compatible(F.mu1, G.mu1);
    const long long D = F.D;
    const long long lim = cap < 0 ? D : std::min(cap, D);
    const R proto = zero_like(F.mu1);

    const Series2<R> C1 = G.component(1), C2 = G.component(2);
    // T[a][b] = C1^a * C2^b, defined for a+b <= lim
    std::vector<std::vector<std::optional<Series2<R>>>> T(size_t(lim) + 1);
    for (long long a = 0; a <= lim; ++a) T[size_t(a)].resize(size_t(lim - a) + 1);
    T[0][0] = Series2<R>::monomial({0, 0}, one_like(proto), D);
    for (long long d = 1; d <= lim; ++d)
        for (long long a = d; a >= 0; --a) {
            long long b = d - a;
            if (a >= 1)
                T[size_t(a)][size_t(b)] = mul_truncated(*T[size_t(a - 1)][size_t(b)], C1, lim);
            else
                T[size_t(a)][size_t(b)] = mul_truncated(*T[size_t(a)][size_t(b - 1)], C2, lim);
        }

    std::array<Series2<R>, 2> out{Series2<R>(D, proto), Series2<R>(D, proto)};
    for (int i = 1; i <= 2; ++i) {
        const Series2<R> Ci = F.component(i);
        for (const auto& [k, v] : Ci.terms()) {
            if (is_zero(v) || k.degree() > lim) continue;
            add_scaled(out[size_t(i - 1)], *T[size_t(k.m1)][size_t(k.m2)], v, lim);
        }
    }

    // split the linear part back off; off-diagonal degree-1 terms cannot
    // occur because G's linear part is diagonal
    R m1o = out[0].coeff({1, 0}), m2o = out[1].coeff({0, 1});
    if (!is_zero(out[0].coeff({0, 1})) || !is_zero(out[1].coeff({1, 0})))
        throw Error("composition produced an off-diagonal linear term");
    for (int i = 0; i < 2; ++i) {
        out[size_t(i)].erase_term({1, 0});
        out[size_t(i)].erase_term({0, 1});
    }
    if (lim < 1) throw ConfigError("composition cap below the linear terms");
    return PlanarMap<R>(std::move(m1o), std::move(m2o), std::move(out[0]), std::move(out[1]));
}

} // namespace detail

template <ScalarRing R>
PlanarMap<R> map_compose(const PlanarMap<R>& F, const PlanarMap<R>& G) {
    return detail::map_compose_capped(F, G, -1);
}

// Formal inverse, degree by degree: the degree-d correction kills the
// degree-d defect of F o G_partial.
template <ScalarRing R>
PlanarMap<R> map_inverse(const PlanarMap<R>& F) {
    R im1 = invert(F.mu1), im2 = invert(F.mu2);
    PlanarMap<R> G = PlanarMap<R>::linear(im1, im2, F.D);
    for (long long d = 2; d <= F.D; ++d) {
        PlanarMap<R> C = detail::map_compose_capped(F, G, d);
        for (int i = 1; i <= 2; ++i) {
            const R& imu = i == 1 ? im1 : im2;
            for (const auto& [k, v] : C.nl(i).terms()) {
                if (k.degree() != d || is_zero(v)) continue;
                G.nl(i).add_term(k, -(imu * v));
            }
        }
    }
    return G;
}

// ---------------------------------------------------------------------------
// Multiplier view: component i as x_i (mu_i + sum_m c[i][m] x^m), which
// exists exactly when the map preserves both axes.
// ---------------------------------------------------------------------------

template <ScalarRing R>
struct MultiplierView {
    R mu1, mu2;
    long long D = 0;
    std::array<std::map<MultiIndex, R>, 2> c; // exponent m, 1 <= |m| <= D-1

    const std::map<MultiIndex, R>& comp(int i) const {
        if (i != 1 && i != 2) throw ConfigError("component index must be 1 or 2");
        return c[size_t(i - 1)];
    }
};

template <ScalarRing R>
MultiplierView<R> to_multiplier_view(const PlanarMap<R>& F) {
    MultiplierView<R> v{F.mu1, F.mu2, F.D, {}};
    std::vector<StructureWitness> bad;
    for (int i = 1; i <= 2; ++i)
        for (const auto& [k, a] : F.nl(i).terms()) {
            if (is_zero(a)) continue;
            long long ki = i == 1 ? k.m1 : k.m2;
            if (ki == 0) {
                bad.push_back({i, k.m1, k.m2,
                               "term of component " + std::to_string(i) +
                                   " is not divisible by x" + std::to_string(i)});
                continue;
            }
            MultiIndex m{k.m1 - (i == 1 ? 1 : 0), k.m2 - (i == 2 ? 1 : 0)};
            v.c[size_t(i - 1)].emplace(m, a);
        }
    if (!bad.empty()) throw StructureError("map does not preserve both axes", bad);
    return v;
}

template <ScalarRing R>
PlanarMap<R> from_view(const MultiplierView<R>& v) {
    Series2<R> n1(v.D, v.mu1), n2(v.D, v.mu1);
    for (int i = 1; i <= 2; ++i)
        for (const auto& [m, a] : v.c[size_t(i - 1)]) {
            if (is_zero(a)) continue;
            MultiIndex k{m.m1 + (i == 1 ? 1 : 0), m.m2 + (i == 2 ? 1 : 0)};
            (i == 1 ? n1 : n2).set_coeff(k, a);
        }
    return PlanarMap<R>(v.mu1, v.mu2, std::move(n1), std::move(n2));
}

template <ScalarRing R>
std::pair<R, R> map_eval(const PlanarMap<R>& F, const R& z1, const R& z2) {
    R y1 = F.mu1 * z1 + series_eval(F.nl1, z1, z2);
    R y2 = F.mu2 * z2 + series_eval(F.nl2, z1, z2);
    return {y1, y2};
}

// Conjugation by the coordinate swap x1 <-> x2.
template <ScalarRing R>
PlanarMap<R> swap_map(const PlanarMap<R>& F) {
    Series2<R> n1(F.D, F.mu1), n2(F.D, F.mu1);
    for (const auto& [k, v] : F.nl2.terms()) n1.set_coeff({k.m2, k.m1}, v);
    for (const auto& [k, v] : F.nl1.terms()) n2.set_coeff({k.m2, k.m1}, v);
    return PlanarMap<R>(F.mu2, F.mu1, std::move(n1), std::move(n2));
}

// Double-precision snapshot of a map (constant part for jets).
template <ScalarRing R>
PlanarMap<ApproxComplex> map_to_approx(const PlanarMap<R>& F) {
    Series2<ApproxComplex> n1(F.D, ApproxComplex()), n2(F.D, ApproxComplex());
    for (const auto& [k, v] : F.nl1.terms())
        if (!is_zero(v)) n1.set_coeff(k, ApproxComplex(approx(v)));
    for (const auto& [k, v] : F.nl2.terms())
        if (!is_zero(v)) n2.set_coeff(k, ApproxComplex(approx(v)));
    return PlanarMap<ApproxComplex>(ApproxComplex(approx(F.mu1)), ApproxComplex(approx(F.mu2)),
                                    std::move(n1), std::move(n2));
}

// lambda = lambda0 slice of a jet-coefficient map.
template <ScalarRing B>
PlanarMap<B> map_constant_part(const PlanarMap<Jet<B>>& F) {
    B proto = zero_like(constant_part(F.mu1));
    Series2<B> n1(F.D, proto), n2(F.D, proto);
    for (const auto& [k, v] : F.nl1.terms())
        if (!is_zero(constant_part(v))) n1.set_coeff(k, constant_part(v));
    for (const auto& [k, v] : F.nl2.terms())
        if (!is_zero(constant_part(v))) n2.set_coeff(k, constant_part(v));
    return PlanarMap<B>(constant_part(F.mu1), constant_part(F.mu2), std::move(n1), std::move(n2));
}

// Largest |coefficient| (double snapshot) over both nonlinear parts and the
// linear part; used for relative-residual scaling.
template <ScalarRing R>
double max_coeff_magnitude(const PlanarMap<R>& F) {
    double m = std::max(std::abs(approx(F.mu1)), std::abs(approx(F.mu2)));
    for (int i = 1; i <= 2; ++i)
        for (const auto& [k, v] : F.nl(i).terms()) m = std::max(m, std::abs(approx(v)));
    return m;
}

} // namespace saddlenf
