// normalform.hpp
// Two-stage homological elimination for planar saddles. Stage 1 removes the
// low-slope cone (plus all axis terms), stage 2 works on the formal inverse
// and removes the mirrored cone; the surviving multiplier exponents are then
// sorted into the structural coefficient tables.
//
// Degree step: conjugating by h_n = id + P_n (P_n homogeneous of degree n)
// changes the degree-n coefficient a_{k,i} by (mu_i - mu^k) p_{k,i}, so
// p_{k,i} = a_{k,i} / (mu^k - mu_i) clears the slot. The full conjugate
// h_n^{-1} o F o h_n is computed, not just the first-order update.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "saddlenf/cfrac.hpp"
#include "saddlenf/errors.hpp"
#include "saddlenf/lattice.hpp"
#include "saddlenf/scalar.hpp"
#include "saddlenf/series.hpp"

namespace saddlenf {

// ---------------------------------------------------------------------------
// Preconditions.
// ---------------------------------------------------------------------------

struct PreconditionReport {
    bool saddle = false;
    bool orientation_swapped = false; // |mu1| > 1 > |mu2|: roles swap up front
    bool resonance_ok = false;        // T1 exact identity / T2 ratio window
    double ratio = 0.0;               // T2: -ln|mu1| / ln|mu2|
    std::vector<std::string> failures;

    bool ok() const { return failures.empty(); }
};

inline void throw_if_failed(const PreconditionReport& rep) {
    if (rep.ok()) return;
    std::string msg = "precondition failed:";
    for (const auto& f : rep.failures) msg += " [" + f + "]";
    throw PreconditionError(msg);
}

namespace detail {

template <class M>
M mag_pow(const M& m, long long e) {
    M r = mag_one<M>();
    for (long long i = 0; i < e; ++i) r = r * m;
    return r;
}

// saddle classification on |mu|^2 values; fills report.saddle/swapped
template <class M>
void classify_saddle(const M& M1, const M& M2, PreconditionReport& rep) {
    const M one = mag_one<M>();
    if (M1 < one && one < M2) {
        rep.saddle = true;
    } else if (M2 < one && one < M1) {
        rep.saddle = true;
        rep.orientation_swapped = true;
    } else {
        rep.failures.push_back("saddle: need |mu1| and |mu2| on opposite sides of 1");
    }
}

} // namespace detail

// Theorem-1 data: saddle moduli and the exact modulus resonance
// |mu1|^(2p) * |mu2|^(2q) = 1 (squares keep everything rational).
template <ScalarRing R>
PreconditionReport check_preconditions(const R& mu1, const R& mu2, const ResonanceFrame& f) {
    PreconditionReport rep;
    auto M1 = magnitude_squared(mu1);
    auto M2 = magnitude_squared(mu2);
    detail::classify_saddle(M1, M2, rep);
    auto prod = detail::mag_pow(M1, f.p) * detail::mag_pow(M2, f.q);
    if constexpr (is_exact_ring_v<R>) {
        rep.resonance_ok = prod == mag_one<decltype(prod)>();
    } else {
        rep.resonance_ok = std::abs(mag_to_double(prod) - 1.0) <= 1e-9;
    }
    if (!rep.resonance_ok)
        rep.failures.push_back("modulus resonance: |mu1|^(2p)*|mu2|^(2q) != 1");
    return rep;
}

// Theorem-2 data: saddle moduli and the convergent window
// q/p < R < qt/pt with R = -ln|mu1|/ln|mu2|; surd specs are compared in
// double precision (tolerance 1e-9).
template <ScalarRing R>
PreconditionReport check_preconditions(const R& mu1, const R& mu2, const ConvergentFrame& f,
                                       const std::optional<Surd>& ratio_spec = {}) {
    PreconditionReport rep;
    auto M1 = magnitude_squared(mu1);
    auto M2 = magnitude_squared(mu2);
    detail::classify_saddle(M1, M2, rep);
    if (!rep.saddle) return rep;

    const double a1 = std::sqrt(mag_to_double(M1));
    const double a2 = std::sqrt(mag_to_double(M2));
    // express the ratio in the declared orientation
    const double lo = rep.orientation_swapped ? std::log(a2) : std::log(a1);
    const double hi = rep.orientation_swapped ? std::log(a1) : std::log(a2);
    double ratio = -lo / hi;
    if (rep.orientation_swapped) ratio = 1.0 / ratio; // back to the input's frame
    rep.ratio = -std::log(a1) / std::log(a2);
    if (rep.orientation_swapped) rep.ratio = std::log(a1) / -std::log(a2);

    const double tol = 1e-9;
    const double below = double(f.q) / double(f.p);
    const double above = double(f.qt) / double(f.pt);
    rep.resonance_ok = rep.ratio > below - tol && rep.ratio < above + tol;
    if (!rep.resonance_ok)
        rep.failures.push_back("ratio window: need q/p < -ln|mu1|/ln|mu2| < qt/pt");
    if (ratio_spec) {
        validate_surd(*ratio_spec);
        if (std::abs(rep.ratio - ratio_spec->to_double()) > tol) {
            rep.resonance_ok = false;
            rep.failures.push_back("ratio spec: -ln|mu1|/ln|mu2| differs from the declared value");
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Elimination plan and diagnostics.
// ---------------------------------------------------------------------------

struct EliminationPlan {
    Cone stage_cone;
    FrameVariant frame;
    bool include_axis_terms = false;
    std::string label;
};

// component-i monomial x^k is targeted iff it is an axis term (k_i = 0) or
// its multiplier exponent k - e_i lies in the stage cone
inline bool plan_targets(const EliminationPlan& plan, int i, MultiIndex k) {
    long long ki = i == 1 ? k.m1 : k.m2;
    if (ki == 0) return plan.include_axis_terms;
    MultiIndex m{k.m1 - (i == 1 ? 1 : 0), k.m2 - (i == 2 ? 1 : 0)};
    if (m.m1 == 0 && m.m2 == 0) return false; // the linear slot itself
    return cone_member(m, plan.stage_cone, plan.frame);
}

struct StageDiagnostics {
    std::string label;
    long long eliminated_terms = 0;
    double min_divisor = std::numeric_limits<double>::infinity();
    double cleared_dust = 0.0; // largest magnitude forcibly zeroed (approx rings)
};

namespace detail {

// multiply a series by (x_j + P_j): key shift plus one sparse product
template <ScalarRing R>
Series2<R> mul_by_axis_plus(const Series2<R>& s, int j, const Series2<R>& Pj, long long cap) {
    Series2<R> r(s.degree_bound(), s.prototype());
    for (const auto& [k, v] : s.terms()) {
        if (is_zero(v)) continue;
        MultiIndex sh{k.m1 + (j == 1 ? 1 : 0), k.m2 + (j == 2 ? 1 : 0)};
        if (sh.degree() <= cap) r.add_term(sh, v);
    }
    if (!Pj.terms().empty()) {
        Series2<R> prod = mul_truncated(s, Pj, cap);
        for (const auto& [k, v] : prod.terms()) r.add_term(k, v);
    }
    return r;
}

// F o (id + P), exploiting that id + P has one-plus-sparse components
template <ScalarRing R>
PlanarMap<R> compose_near_identity(const PlanarMap<R>& F, const Series2<R>& P1,
                                   const Series2<R>& P2) {
    const long long D = F.D;
    const R proto = zero_like(F.mu1);
    std::vector<std::vector<std::optional<Series2<R>>>> T(size_t(D) + 1);
    for (long long a = 0; a <= D; ++a) T[size_t(a)].resize(size_t(D - a) + 1);
    T[0][0] = Series2<R>::monomial({0, 0}, one_like(proto), D);
    for (long long d = 1; d <= D; ++d)
        for (long long a = d; a >= 0; --a) {
            long long b = d - a;
            if (a >= 1)
                T[size_t(a)][size_t(b)] = mul_by_axis_plus(*T[size_t(a - 1)][size_t(b)], 1, P1, D);
            else
                T[size_t(a)][size_t(b)] = mul_by_axis_plus(*T[size_t(a)][size_t(b - 1)], 2, P2, D);
        }

    std::array<Series2<R>, 2> out{Series2<R>(D, proto), Series2<R>(D, proto)};
    for (int i = 1; i <= 2; ++i) {
        const Series2<R> Ci = F.component(i);
        for (const auto& [k, v] : Ci.terms()) {
            if (is_zero(v)) continue;
            add_scaled(out[size_t(i - 1)], *T[size_t(k.m1)][size_t(k.m2)], v, D);
        }
    }
    R m1o = out[0].coeff({1, 0}), m2o = out[1].coeff({0, 1});
    if (!is_zero(out[0].coeff({0, 1})) || !is_zero(out[1].coeff({1, 0})))
        throw Error("near-identity composition produced an off-diagonal linear term");
    for (int i = 0; i < 2; ++i) {
        out[size_t(i)].erase_term({1, 0});
        out[size_t(i)].erase_term({0, 1});
    }
    return PlanarMap<R>(std::move(m1o), std::move(m2o), std::move(out[0]), std::move(out[1]));
}

template <ScalarRing R>
PlanarMap<R> compose_near_identity(const PlanarMap<R>& F, const PlanarMap<R>& h) {
    if (!is_zero(h.mu1 - one_like(h.mu1)) || !is_zero(h.mu2 - one_like(h.mu2)))
        throw ConfigError("near-identity composition needs an identity linear part");
    if (F.D != h.D) throw ConfigError("composition needs equal degree bounds");
    return compose_near_identity(F, h.nl1, h.nl2);
}

// P o X for sparse homogeneous P: only the powers X^k named by P's keys are
// formed, via a memoized predecessor chain.
template <ScalarRing R>
std::array<Series2<R>, 2> sparse_compose(const Series2<R>& P1, const Series2<R>& P2,
                                         const PlanarMap<R>& X) {
    const long long D = X.D;
    const R proto = zero_like(X.mu1);
    const Series2<R> X1 = X.component(1), X2 = X.component(2);
    std::map<MultiIndex, Series2<R>> cache;
    cache.emplace(MultiIndex{0, 0}, Series2<R>::monomial({0, 0}, one_like(proto), D));
    auto power = [&](auto&& self, MultiIndex k) -> const Series2<R>& {
        auto it = cache.find(k);
        if (it != cache.end()) return it->second;
        Series2<R> v = k.m1 >= 1 ? self(self, MultiIndex{k.m1 - 1, k.m2}) * X1
                                 : self(self, MultiIndex{k.m1, k.m2 - 1}) * X2;
        return cache.emplace(k, std::move(v)).first->second;
    };
    std::array<Series2<R>, 2> out{Series2<R>(D, proto), Series2<R>(D, proto)};
    for (int i = 1; i <= 2; ++i)
        for (const auto& [k, v] : (i == 1 ? P1 : P2).terms()) {
            if (is_zero(v)) continue;
            add_scaled(out[size_t(i - 1)], power(power, k), v);
        }
    return out;
}

// solve (id + P) o Fp = K for Fp; the degree-d slice of P o Fp only uses
// slices of Fp below d, so iterating Fp <- K - P o Fp reaches a fixed point
template <ScalarRing R>
PlanarMap<R> solve_left_near_identity(const Series2<R>& P1, const Series2<R>& P2,
                                      const PlanarMap<R>& K) {
    PlanarMap<R> X = K;
    for (long long iter = 0; iter <= K.D; ++iter) {
        auto M = sparse_compose(P1, P2, X);
        Series2<R> n1 = K.nl1 - M[0];
        Series2<R> n2 = K.nl2 - M[1];
        // P o X has no degree-1 part (P starts at degree 2)
        PlanarMap<R> Xn(K.mu1, K.mu2, std::move(n1), std::move(n2));
        if (Xn == X) return X;
        X = std::move(Xn);
    }
    throw Error("conjugation solve did not reach its fixed point");
}

template <ScalarRing R>
double coeff_abs(const R& v) {
    return std::abs(approx(v));
}

} // namespace detail

// ---------------------------------------------------------------------------
// One homological degree, then whole plans.
// ---------------------------------------------------------------------------

template <ScalarRing R>
struct StepResult {
    PlanarMap<R> map;
    PlanarMap<R> transform; // id + degree-n correction
};

template <ScalarRing R>
StepResult<R> homological_degree_step(const PlanarMap<R>& F, long long n,
                                      const EliminationPlan& plan,
                                      StageDiagnostics* diag = nullptr) {
    if (n < 2 || n > F.D) throw ConfigError("degree step outside [2, D]");
    const R proto = zero_like(F.mu1);
    Series2<R> P1(F.D, proto), P2(F.D, proto);
    long long count = 0;

    for (int i = 1; i <= 2; ++i) {
        const R& mui = F.mu(i);
        for (const auto& [k, a] : F.nl(i).terms()) {
            if (k.degree() != n || is_zero(a) || !plan_targets(plan, i, k)) continue;
            R mk = ring_pow(F.mu1, k.m1, proto) * ring_pow(F.mu2, k.m2, proto);
            R div = mk - mui;
            if constexpr (is_exact_ring_v<R>) {
                if (is_zero(constant_part(div)))
                    throw SmallDivisorError(i, k.m1, k.m2, str(div));
            } else {
                if (detail::coeff_abs(div) < 1e-8 * detail::coeff_abs(mui))
                    throw SmallDivisorError(i, k.m1, k.m2, str(div));
            }
            if (diag) diag->min_divisor = std::min(diag->min_divisor, detail::coeff_abs(div));
            (i == 1 ? P1 : P2).set_coeff(k, a * invert(div));
            ++count;
        }
    }

    PlanarMap<R> h(one_like(proto), one_like(proto), P1, P2);
    if (count == 0) return {F, h};
    if (diag) diag->eliminated_terms += count;

    PlanarMap<R> K = detail::compose_near_identity(F, P1, P2);
    PlanarMap<R> Fp = detail::solve_left_near_identity(P1, P2, K);

    // targeted slots of degree <= n must now be exactly clear; approximate
    // rings may leave rounding dust, which is zeroed and recorded
    for (int i = 1; i <= 2; ++i) {
        std::vector<MultiIndex> clear;
        for (const auto& [k, a] : Fp.nl(i).terms()) {
            if (k.degree() > n || is_zero(a) || !plan_targets(plan, i, k)) continue;
            if constexpr (is_exact_ring_v<R>) {
                throw Error("homological step left a targeted coefficient at (" +
                            std::to_string(k.m1) + "," + std::to_string(k.m2) + ")");
            } else {
                if (diag) diag->cleared_dust = std::max(diag->cleared_dust, detail::coeff_abs(a));
                clear.push_back(k);
            }
        }
        for (MultiIndex k : clear) Fp.nl(i).set_coeff(k, proto);
    }
    return {std::move(Fp), std::move(h)};
}

template <ScalarRing R>
struct EliminationResult {
    PlanarMap<R> map;       // cleaned map
    PlanarMap<R> transform; // accumulated tangent-to-identity change
    StageDiagnostics diag;
};

template <ScalarRing R>
EliminationResult<R> eliminate_plan(const PlanarMap<R>& F0, const EliminationPlan& plan) {
    StageDiagnostics diag{plan.label, 0, std::numeric_limits<double>::infinity(), 0.0};
    PlanarMap<R> F = F0;
    PlanarMap<R> h = PlanarMap<R>::identity(zero_like(F0.mu1), F0.D);
    for (long long n = 2; n <= F0.D; ++n) {
        StepResult<R> step = homological_degree_step(F, n, plan, &diag);
        F = std::move(step.map);
        if (!step.transform.is_linear()) h = detail::compose_near_identity(h, step.transform);
    }
    return {std::move(F), std::move(h), std::move(diag)};
}

// Multiplier exponents (|m| <= D-1) of F that fail `predicate` are returned
// as witnesses tagged with `detail_msg`.
template <ScalarRing R, class Pred>
std::vector<StructureWitness> view_violations(const PlanarMap<R>& F, Pred&& predicate,
                                              const std::string& detail_msg) {
    std::vector<StructureWitness> out;
    MultiplierView<R> v = to_multiplier_view(F);
    for (int i = 1; i <= 2; ++i)
        for (const auto& [m, a] : v.comp(i)) {
            if (is_zero(a)) continue;
            if (!predicate(m)) out.push_back({i, m.m1, m.m2, detail_msg});
        }
    return out;
}

// ---------------------------------------------------------------------------
// Structural coefficient tables.
// ---------------------------------------------------------------------------

template <ScalarRing R>
struct StructuralFormT1 {
    // component i (index i-1):
    //   b0:  u-power k2 >= 1            -> coefficient of u^k2
    //   b0k: (k >= 1, extra u-power j)  -> coefficient of x^(k*alpha0) u^(N k + 1 + j)
    //   b1k: (k >= 1, extra u-power j)  -> coefficient of x^(k*alpha1) u^(N k + 1 + j)
    std::array<std::map<long long, R>, 2> b0;
    std::array<std::map<std::pair<long long, long long>, R>, 2> b0k, b1k;

    bool empty() const {
        return b0[0].empty() && b0[1].empty() && b0k[0].empty() && b0k[1].empty() &&
               b1k[0].empty() && b1k[1].empty();
    }
};

template <ScalarRing R>
struct StructuralFormT2 {
    // component i: (u-power a, ut-power b) -> coefficient of u^(a+1) ut^b (b1)
    // or of ut^(b+1) with a = 0 (b2); mixed exponents go to b1
    std::array<std::map<std::pair<long long, long long>, R>, 2> b1, b2;

    bool empty() const { return b1[0].empty() && b1[1].empty() && b2[0].empty() && b2[1].empty(); }
};

template <ScalarRing R>
StructuralFormT1<R> extract_structure_t1(const PlanarMap<R>& g, const ResonanceFrame& f,
                                         long long N) {
    MultiplierView<R> v = to_multiplier_view(g);
    StructuralFormT1<R> s;
    std::vector<StructureWitness> bad;
    for (int i = 1; i <= 2; ++i)
        for (const auto& [m, a] : v.comp(i)) {
            if (is_zero(a)) continue;
            LatticeCoords k = basis_decompose(m, f, 0);
            if (k.k1 == 0) {
                if (k.k2 < 1) {
                    bad.push_back({i, m.m1, m.m2, "pure resonant term with nonpositive u-power"});
                    continue;
                }
                s.b0[size_t(i - 1)].emplace(k.k2, a);
            } else if (k.k1 >= 1) {
                if (k.k2 < N * k.k1 + 1) {
                    bad.push_back({i, m.m1, m.m2,
                                   "u-power " + std::to_string(k.k2) + " below the flatness bound " +
                                       std::to_string(N * k.k1 + 1) + " at branch-0 depth " +
                                       std::to_string(k.k1)});
                    continue;
                }
                s.b0k[size_t(i - 1)].emplace(std::pair{k.k1, k.k2 - N * k.k1 - 1}, a);
            } else {
                LatticeCoords kb = basis_decompose(m, f, 1);
                if (kb.k1 < 1) {
                    bad.push_back({i, m.m1, m.m2, "exponent outside both branch cones"});
                    continue;
                }
                if (kb.k2 < N * kb.k1 + 1) {
                    bad.push_back({i, m.m1, m.m2,
                                   "u-power " + std::to_string(kb.k2) + " below the flatness bound " +
                                       std::to_string(N * kb.k1 + 1) + " at branch-1 depth " +
                                       std::to_string(kb.k1)});
                    continue;
                }
                s.b1k[size_t(i - 1)].emplace(std::pair{kb.k1, kb.k2 - N * kb.k1 - 1}, a);
            }
        }
    if (!bad.empty()) throw StructureError("normal form violates the resonant shape", bad);

    // reassembling the tables must reproduce the multiplier view exactly
    MultiplierView<R> re{v.mu1, v.mu2, v.D, {}};
    for (int i = 1; i <= 2; ++i) {
        auto& dst = re.c[size_t(i - 1)];
        for (const auto& [k2, a] : s.b0[size_t(i - 1)])
            dst[{k2 * f.p, k2 * f.q}] = a;
        for (const auto& [key, a] : s.b0k[size_t(i - 1)]) {
            long long k1 = key.first, k2 = N * k1 + 1 + key.second;
            dst[{k1 * f.r0 + k2 * f.p, k1 * f.s0 + k2 * f.q}] = a;
        }
        for (const auto& [key, a] : s.b1k[size_t(i - 1)]) {
            long long k1 = key.first, k2 = N * k1 + 1 + key.second;
            dst[{k1 * f.r1 + k2 * f.p, k1 * f.s1 + k2 * f.q}] = a;
        }
        if (re.c[size_t(i - 1)] != v.c[size_t(i - 1)])
            throw Error("structural table reassembly mismatch (component " + std::to_string(i) +
                        ")");
    }
    return s;
}

template <ScalarRing R>
StructuralFormT1<R> extract_structure_t1(const PlanarMap<R>& g, const ResonanceFrame& f) {
    return extract_structure_t1(g, f, f.N);
}

template <ScalarRing R>
StructuralFormT2<R> extract_structure_t2(const PlanarMap<R>& g, const ConvergentFrame& f) {
    MultiplierView<R> v = to_multiplier_view(g);
    StructuralFormT2<R> s;
    std::vector<StructureWitness> bad;
    for (int i = 1; i <= 2; ++i)
        for (const auto& [m, a] : v.comp(i)) {
            if (is_zero(a)) continue;
            LatticeCoords jl = convergent_decompose(m, f);
            if (jl.k1 < 0 || jl.k2 < 0 || jl.k1 + jl.k2 < 1) {
                bad.push_back({i, m.m1, m.m2,
                               "convergent coordinates (" + std::to_string(jl.k1) + "," +
                                   std::to_string(jl.k2) + ") leave the positive span"});
                continue;
            }
            if (jl.k1 >= 1)
                s.b1[size_t(i - 1)].emplace(std::pair{jl.k1 - 1, jl.k2}, a);
            else
                s.b2[size_t(i - 1)].emplace(std::pair{0LL, jl.k2 - 1}, a);
        }
    if (!bad.empty()) throw StructureError("normal form violates the convergent-cone shape", bad);

    MultiplierView<R> re{v.mu1, v.mu2, v.D, {}};
    for (int i = 1; i <= 2; ++i) {
        auto& dst = re.c[size_t(i - 1)];
        for (const auto& [key, a] : s.b1[size_t(i - 1)]) {
            long long j = key.first + 1, l = key.second;
            dst[{j * f.p + l * f.pt, j * f.q + l * f.qt}] = a;
        }
        for (const auto& [key, a] : s.b2[size_t(i - 1)]) {
            long long l = key.second + 1;
            dst[{l * f.pt, l * f.qt}] = a;
        }
        if (re.c[size_t(i - 1)] != v.c[size_t(i - 1)])
            throw Error("structural table reassembly mismatch (component " + std::to_string(i) +
                        ")");
    }
    return s;
}

// ---------------------------------------------------------------------------
// Decay constants.
// ---------------------------------------------------------------------------

struct DecayConstants {
    double d0 = 0.0, d1 = 0.0;
    // variant with N in place of N+1 in the exponent denominators, reported
    // for comparison with the enumerated decay sweep (resonant frames only)
    double d0_alt = 0.0, d1_alt = 0.0;
};

inline DecayConstants decay_constants(const ResonanceFrame& f, double abs_mu1, double abs_mu2) {
    DecayConstants d;
    const double pq = double(f.p + f.q);
    auto expo0 = [&](double shift) { return 1.0 / (double(f.q) * (double(f.r0 + f.s0) + shift * pq)); };
    auto expo1 = [&](double shift) { return 1.0 / (double(f.p) * (double(f.r1 + f.s1) + shift * pq)); };
    d.d0 = std::pow(abs_mu1, expo0(double(f.N + 1)));
    d.d1 = std::pow(abs_mu2, -expo1(double(f.N + 1)));
    d.d0_alt = std::pow(abs_mu1, expo0(double(f.N)));
    d.d1_alt = std::pow(abs_mu2, -expo1(double(f.N)));
    if (!(d.d0 < 1.0 && d.d1 < 1.0)) throw Error("decay constants not below 1");
    return d;
}

inline DecayConstants decay_constants(const ConvergentFrame& f, double abs_mu1, double abs_mu2) {
    DecayConstants d;
    const double R = -std::log(abs_mu1) / std::log(abs_mu2);
    d.d0 = std::pow(abs_mu1, (R * double(f.p) - double(f.q)) / (R * double(f.p + f.q)));
    d.d1 = std::pow(1.0 / abs_mu2, (double(f.qt) - R * double(f.pt)) / double(f.pt + f.qt));
    if (!(d.d0 < 1.0 && d.d1 < 1.0)) throw Error("decay constants not below 1");
    return d;
}

// ---------------------------------------------------------------------------
// Conjugacy residual.
// ---------------------------------------------------------------------------

struct ResidualReport {
    bool exact_zero = false; // every coefficient of f o h - h o g is ring zero
    double magnitude = 0.0;  // largest |coefficient| of the difference
    double relative = 0.0;   // magnitude / max(1, coefficients of both sides)
};

template <ScalarRing R>
ResidualReport conjugacy_residual(const PlanarMap<R>& f, const PlanarMap<R>& g,
                                  const PlanarMap<R>& h) {
    PlanarMap<R> lhs = map_compose(f, h);
    PlanarMap<R> rhs = map_compose(h, g);
    ResidualReport rep;
    rep.exact_zero = true;
    for (int i = 1; i <= 2; ++i) {
        Series2<R> diff = lhs.component(i) - rhs.component(i);
        for (const auto& [k, v] : diff.terms()) {
            if (is_zero(v)) continue;
            rep.exact_zero = false;
            rep.magnitude = std::max(rep.magnitude, detail::coeff_abs(v));
        }
    }
    double scale = std::max({1.0, max_coeff_magnitude(lhs), max_coeff_magnitude(rhs)});
    rep.relative = rep.magnitude / scale;
    return rep;
}

// ---------------------------------------------------------------------------
// Pipelines.
// ---------------------------------------------------------------------------

template <ScalarRing R>
struct NormalFormOutcome {
    PlanarMap<R> g, h, h_inv;
    std::vector<StageDiagnostics> stages;
    std::optional<StructuralFormT1<R>> structure_t1;
    std::optional<StructuralFormT2<R>> structure_t2;
    DecayConstants decay;
    bool orientation_swapped = false;
    ResidualReport residual;
    std::vector<std::pair<std::string, bool>> checks;
};

// Witnesses against the final containment claim; empty on a conforming map.
template <ScalarRing R>
std::vector<StructureWitness> containment_findings(const PlanarMap<R>& g,
                                                   const ResonanceFrame& frame) {
    return view_violations(
        g, [&](MultiIndex m) { return cone_member(m, Cone::HatB, frame); },
        "surviving exponent outside the final slope window");
}

template <ScalarRing R>
std::vector<StructureWitness> containment_findings(const PlanarMap<R>& g,
                                                   const ConvergentFrame& frame) {
    return view_violations(
        g, [&](MultiIndex m) { return cone_member(m, Cone::IrrFinal, frame); },
        "surviving exponent outside the positive convergent span");
}

namespace detail {

template <ScalarRing R>
bool stage_clean(const PlanarMap<R>& F, const EliminationPlan& plan) {
    for (int i = 1; i <= 2; ++i)
        for (const auto& [k, a] : F.nl(i).terms())
            if (!is_zero(a) && plan_targets(plan, i, k)) return false;
    return true;
}

template <ScalarRing R>
double abs_mu(const R& mu) {
    return std::sqrt(mag_to_double(magnitude_squared(mu)));
}

// the full two-stage run in the normalized orientation (|mu1| < 1)
template <ScalarRing R, class Frame>
void run_two_stages(const PlanarMap<R>& fw, const Frame& frame, Cone stage1, Cone stage2,
                    bool tilde_b_check, NormalFormOutcome<R>& out) {
    EliminationPlan plan1{stage1, frame, true, "stage 1"};
    EliminationResult<R> s1 = eliminate_plan(fw, plan1);
    out.checks.emplace_back("stage1_clean", stage_clean(s1.map, plan1));
    out.checks.emplace_back("stage1_axis_preserving", s1.map.axis_preserving());
    out.stages.push_back(s1.diag);

    PlanarMap<R> gti = map_inverse(s1.map);
    std::vector<StructureWitness> wit;
    if (tilde_b_check) {
        wit = view_violations(
            gti, [&](MultiIndex m) { return cone_member(m, Cone::TildeB, frame); },
            "inverse support leaves the stage-1 half-plane");
    } else {
        wit = view_violations(
            gti, [&](MultiIndex m) { return !cone_member(m, stage1, frame); },
            "inverse support re-enters the stage-1 cone");
    }
    if (!wit.empty())
        throw StructureError("inverse of the stage-1 normal form violates its support claim",
                             std::move(wit));
    out.checks.emplace_back("inverse_support", true);

    EliminationPlan plan2{stage2, frame, false, "stage 2"};
    EliminationResult<R> s2 = eliminate_plan(gti, plan2);
    out.checks.emplace_back("stage2_clean", stage_clean(s2.map, plan2));
    out.stages.push_back(s2.diag);

    out.g = map_inverse(s2.map);
    out.h = map_compose(s1.transform, s2.transform);
}

} // namespace detail

template <ScalarRing R>
NormalFormOutcome<R> pipeline_theorem1(const PlanarMap<R>& f, const ResonanceFrame& frame) {
    PreconditionReport rep = check_preconditions(f.mu1, f.mu2, frame);
    throw_if_failed(rep);

    const bool swapped = rep.orientation_swapped;
    PlanarMap<R> fw = swapped ? swap_map(f) : f;
    ResonanceFrame fr = swapped ? swap_frame(frame) : frame;

    NormalFormOutcome<R> out{PlanarMap<R>::linear(f.mu1, f.mu2, f.D),
                             PlanarMap<R>::identity(zero_like(f.mu1), f.D),
                             PlanarMap<R>::identity(zero_like(f.mu1), f.D)};
    out.orientation_swapped = swapped;
    detail::run_two_stages(fw, fr, Cone::G0, Cone::G1, true, out);

    if (swapped) {
        out.g = swap_map(out.g);
        out.h = swap_map(out.h);
    }
    out.h_inv = map_inverse(out.h);

    auto wit = containment_findings(out.g, frame);
    if (!wit.empty())
        throw StructureError("surviving exponents violate the final slope window",
                             std::move(wit));
    out.checks.emplace_back("survivors_in_final_cone", true);
    out.checks.emplace_back("axes_invariant", out.g.axis_preserving());

    out.structure_t1 = extract_structure_t1(out.g, frame);
    out.checks.emplace_back("structure_reassembly", true);

    out.decay = decay_constants(fr, detail::abs_mu(fw.mu1), detail::abs_mu(fw.mu2));
    out.residual = conjugacy_residual(f, out.g, out.h);
    if constexpr (is_exact_ring_v<R>) {
        out.checks.emplace_back("residual_zero_exact", out.residual.exact_zero);
        if (!out.residual.exact_zero)
            throw Error("exact-ring pipeline produced a nonzero conjugacy residual");
    } else {
        out.checks.emplace_back("residual_within_tolerance", out.residual.relative <= 1e-9);
    }
    return out;
}

template <ScalarRing R>
NormalFormOutcome<R> pipeline_theorem2(const PlanarMap<R>& f, const ConvergentFrame& frame,
                                       const std::optional<Surd>& ratio_spec = {}) {
    PreconditionReport rep = check_preconditions(f.mu1, f.mu2, frame, ratio_spec);
    throw_if_failed(rep);

    const bool swapped = rep.orientation_swapped;
    PlanarMap<R> fw = swapped ? swap_map(f) : f;
    ConvergentFrame fr = swapped ? swap_frame(frame) : frame;

    NormalFormOutcome<R> out{PlanarMap<R>::linear(f.mu1, f.mu2, f.D),
                             PlanarMap<R>::identity(zero_like(f.mu1), f.D),
                             PlanarMap<R>::identity(zero_like(f.mu1), f.D)};
    out.orientation_swapped = swapped;
    detail::run_two_stages(fw, fr, Cone::IrrStage1, Cone::IrrStage2, false, out);

    if (swapped) {
        out.g = swap_map(out.g);
        out.h = swap_map(out.h);
    }
    out.h_inv = map_inverse(out.h);

    auto wit = containment_findings(out.g, frame);
    if (!wit.empty())
        throw StructureError("surviving exponents violate the positive convergent span",
                             std::move(wit));
    out.checks.emplace_back("survivors_in_final_cone", true);
    out.checks.emplace_back("axes_invariant", out.g.axis_preserving());

    out.structure_t2 = extract_structure_t2(out.g, frame);
    out.checks.emplace_back("structure_reassembly", true);

    out.decay = decay_constants(fr, detail::abs_mu(fw.mu1), detail::abs_mu(fw.mu2));
    out.residual = conjugacy_residual(f, out.g, out.h);
    if constexpr (is_exact_ring_v<R>) {
        out.checks.emplace_back("residual_zero_exact", out.residual.exact_zero);
        if (!out.residual.exact_zero)
            throw Error("exact-ring pipeline produced a nonzero conjugacy residual");
    } else {
        out.checks.emplace_back("residual_within_tolerance", out.residual.relative <= 1e-9);
    }
    return out;
}

} // namespace saddlenf
