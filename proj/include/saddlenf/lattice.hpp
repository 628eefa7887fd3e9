// lattice.hpp
// Integer-lattice geometry of resonance: Bezout pairs in the unit box,
// the two unimodular bases (alpha0,(p,q)) / (alpha1,(p,q)), and the cone
// family driving the two elimination stages. Membership predicates use
// integer cross-multiplication only; no rational division.

#pragma once

#include <algorithm>
#include <numeric>
#include <string>
#include <variant>
#include <vector>

#include "saddlenf/errors.hpp"

namespace saddlenf {

struct MultiIndex {
    long long m1 = 0, m2 = 0;

    long long degree() const { return m1 + m2; }
    friend bool operator==(const MultiIndex&, const MultiIndex&) = default;
    // lexicographic; enumeration output order
    friend bool operator<(const MultiIndex& a, const MultiIndex& b) {
        return a.m1 != b.m1 ? a.m1 < b.m1 : a.m2 < b.m2;
    }
    std::string str() const { return "(" + std::to_string(m1) + "," + std::to_string(m2) + ")"; }
};

inline MultiIndex operator+(MultiIndex a, MultiIndex b) { return {a.m1 + b.m1, a.m2 + b.m2}; }

// Signed coordinates of a lattice point in one of the unimodular bases.
struct LatticeCoords {
    long long k1 = 0, k2 = 0;
    friend bool operator==(const LatticeCoords&, const LatticeCoords&) = default;
};

// ---------------------------------------------------------------------------
// Resonance frame: p, q coprime, alpha0 = (r0,s0) the box Bezout pair of
// q*r - p*s = 1, alpha1 = (p,q) - alpha0, and a flatness order N.
// ---------------------------------------------------------------------------

struct ResonanceFrame {
    long long p = 1, q = 1;
    long long r0 = 1, s0 = 0;
    long long r1 = 0, s1 = 1;
    long long N = 0;
};

// Unique (r0,s0) with q*r0 - p*s0 = 1, 0 <= r0 <= p, 0 <= s0 <= q.
inline std::pair<long long, long long> bezout_box(long long p, long long q) {
    if (p < 1 || q < 1 || std::gcd(p, q) != 1) throw NotCoprimeError(p, q);
    // extended Euclid on (q, p): find r, s with q*r - p*s = 1
    long long old_r = q, r = p;
    long long old_x = 1, x = 0;
    while (r != 0) {
        long long t = old_r / r;
        std::tie(old_r, r) = std::pair{r, old_r - t * r};
        std::tie(old_x, x) = std::pair{x, old_x - t * x};
    }
    // old_x solves q*old_x ≡ 1 (mod p); shift into [0, p]
    long long r0 = ((old_x % p) + p) % p;
    if (r0 == 0) r0 = p; // p == 1 gives r0 = 1, s0 = q - ... handled below
    long long s0 = (q * r0 - 1) / p;
    if (q * r0 - p * s0 != 1 || r0 < 0 || r0 > p || s0 < 0 || s0 > q)
        throw Error("bezout_box internal failure"); // unreachable for valid input
    return {r0, s0};
}

inline ResonanceFrame resonance_frame(long long p, long long q, long long N) {
    if (N < 0) throw DomainError("N must be nonnegative");
    auto [r0, s0] = bezout_box(p, q);
    ResonanceFrame f;
    f.p = p;
    f.q = q;
    f.N = N;
    f.r0 = r0;
    f.s0 = s0;
    f.r1 = p - r0;
    f.s1 = q - s0;
    return f;
}

// Coordinates of m in basis (alpha_branch, (p,q)); the basis is unimodular,
// so the solution exists and is unique. Reconstruction is asserted.
inline LatticeCoords basis_decompose(MultiIndex m, const ResonanceFrame& f, int branch) {
    LatticeCoords k;
    if (branch == 0) {
        k.k1 = f.q * m.m1 - f.p * m.m2;
        k.k2 = -f.s0 * m.m1 + f.r0 * m.m2;
        if (k.k1 * f.r0 + k.k2 * f.p != m.m1 || k.k1 * f.s0 + k.k2 * f.q != m.m2)
            throw Error("basis_decompose reconstruction failed (branch 0)");
    } else if (branch == 1) {
        k.k1 = f.p * m.m2 - f.q * m.m1;
        k.k2 = f.s1 * m.m1 - f.r1 * m.m2;
        if (k.k1 * f.r1 + k.k2 * f.p != m.m1 || k.k1 * f.s1 + k.k2 * f.q != m.m2)
            throw Error("basis_decompose reconstruction failed (branch 1)");
    } else {
        throw ConfigError("basis_decompose: branch must be 0 or 1");
    }
    return k;
}

// ---------------------------------------------------------------------------
// Convergent frame for the irrational-ratio case: (q,p) and (qt,pt) are the
// convergents 2k+1 and 2k+2 of the continued fraction of R. Constructed by
// theorem2_frame (cfrac.hpp) or directly from a validated pair.
// ---------------------------------------------------------------------------

struct ConvergentFrame {
    std::vector<long long> quotients; // a1..an, positive
    long long k = 0;
    long long p = 1, q = 1;   // lower convergent q/p < R
    long long pt = 1, qt = 2; // upper convergent qt/pt > R

    // det of the basis ((p,q),(pt,qt)); +-1 for genuine convergent pairs
    long long det() const { return p * qt - q * pt; }
};

inline ConvergentFrame make_convergent_frame(long long p, long long q, long long pt,
                                             long long qt, long long k,
                                             std::vector<long long> quotients = {}) {
    if (p < 1 || q < 1 || pt < 1 || qt < 1)
        throw DomainError("convergent frame entries must be positive");
    ConvergentFrame f;
    f.p = p;
    f.q = q;
    f.pt = pt;
    f.qt = qt;
    f.k = k;
    f.quotients = std::move(quotients);
    long long d = f.det();
    if (d != 1 && d != -1) throw DomainError("convergent pair is not unimodular");
    if (q * pt >= qt * p) throw DomainError("convergent pair not ordered: need q/p < qt/pt");
    return f;
}

// ---------------------------------------------------------------------------
// Cones.
// ---------------------------------------------------------------------------

enum class Cone {
    G0,        // stage-1 target: branch-0 k1 >= 1, k2 <= (N+1) k1
    B0,        // complement of G0 in N^2
    B1,        // k1 >= 1, k2 >= (N+1) k1 + 1
    B2,        // k1 <= 0
    TildeB,    // half-plane m2 (r0+(N+1)p) >= m1 (s0+(N+1)q); contains the origin
    G1,        // stage-2 target: branch-1 k1 >= 1, k2 <= (N+1) k1
    HatB,      // slope window between TildeB's bound and its branch-1 mirror; origin excluded
    IrrStage1, // p m2 < q m1
    IrrStage2, // pt m2 > qt m1
    IrrFinal,  // nonnegative coordinates in basis ((p,q),(pt,qt)), not the origin
};

inline const char* cone_name(Cone c) {
    switch (c) {
        case Cone::G0: return "G0";
        case Cone::B0: return "B0";
        case Cone::B1: return "B1";
        case Cone::B2: return "B2";
        case Cone::TildeB: return "TildeB";
        case Cone::G1: return "G1";
        case Cone::HatB: return "HatB";
        case Cone::IrrStage1: return "IrrStage1";
        case Cone::IrrStage2: return "IrrStage2";
        case Cone::IrrFinal: return "IrrFinal";
    }
    return "?";
}

inline bool cone_member(MultiIndex m, Cone tag, const ResonanceFrame& f) {
    const long long N1 = f.N + 1;
    switch (tag) {
        case Cone::G0: {
            auto k = basis_decompose(m, f, 0);
            return k.k1 >= 1 && k.k2 <= N1 * k.k1;
        }
        case Cone::B0:
            return !cone_member(m, Cone::G0, f);
        case Cone::B1: {
            auto k = basis_decompose(m, f, 0);
            return k.k1 >= 1 && k.k2 >= N1 * k.k1 + 1;
        }
        case Cone::B2:
            return basis_decompose(m, f, 0).k1 <= 0;
        case Cone::TildeB:
            return m.m2 * (f.r0 + N1 * f.p) >= m.m1 * (f.s0 + N1 * f.q);
        case Cone::G1: {
            auto k = basis_decompose(m, f, 1);
            return k.k1 >= 1 && k.k2 <= N1 * k.k1;
        }
        case Cone::HatB:
            // survivor container: multiplier exponents only, so (0,0) is out
            return (m.m1 != 0 || m.m2 != 0) &&
                   m.m1 * (f.s0 + N1 * f.q) <= m.m2 * (f.r0 + N1 * f.p) &&
                   m.m2 * (f.r1 + N1 * f.p) <= m.m1 * (f.s1 + N1 * f.q);
        default:
            throw ConfigError(std::string("cone ") + cone_name(tag) +
                              " needs a convergent frame");
    }
}

inline bool cone_member(MultiIndex m, Cone tag, const ConvergentFrame& f) {
    switch (tag) {
        case Cone::IrrStage1:
            return f.p * m.m2 < f.q * m.m1;
        case Cone::IrrStage2:
            return f.pt * m.m2 > f.qt * m.m1;
        case Cone::IrrFinal: {
            long long d = f.det();
            long long j = (f.qt * m.m1 - f.pt * m.m2) * d; // d = +-1, division by d
            long long l = (f.p * m.m2 - f.q * m.m1) * d;
            return j >= 0 && l >= 0 && j + l >= 1;
        }
        default:
            throw ConfigError(std::string("cone ") + cone_name(tag) +
                              " needs a resonance frame");
    }
}

// Coordinates (j,l) of m in the convergent basis, m = j(p,q) + l(pt,qt).
inline LatticeCoords convergent_decompose(MultiIndex m, const ConvergentFrame& f) {
    long long d = f.det();
    LatticeCoords c;
    c.k1 = (f.qt * m.m1 - f.pt * m.m2) * d;
    c.k2 = (f.p * m.m2 - f.q * m.m1) * d;
    if (c.k1 * f.p + c.k2 * f.pt != m.m1 || c.k1 * f.q + c.k2 * f.qt != m.m2)
        throw Error("convergent_decompose reconstruction failed");
    return c;
}

using FrameVariant = std::variant<ResonanceFrame, ConvergentFrame>;

inline bool cone_member(MultiIndex m, Cone tag, const FrameVariant& f) {
    return std::visit([&](const auto& fr) { return cone_member(m, tag, fr); }, f);
}

// All members with m1+m2 <= maxdeg, lexicographically sorted.
template <class Frame>
std::vector<MultiIndex> enumerate_cone(Cone tag, const Frame& f, long long maxdeg) {
    if (maxdeg < 0) throw DomainError("maxdeg must be nonnegative");
    std::vector<MultiIndex> out;
    for (long long m1 = 0; m1 <= maxdeg; ++m1)
        for (long long m2 = 0; m1 + m2 <= maxdeg; ++m2)
            if (cone_member(MultiIndex{m1, m2}, tag, f)) out.push_back({m1, m2});
    return out; // loop order is already lexicographic
}

// Coordinate swap x1 <-> x2. The box pairs exchange branches: the swapped
// frame has alpha0' = swap(alpha1) and alpha1' = swap(alpha0).
inline ResonanceFrame swap_frame(const ResonanceFrame& f) {
    ResonanceFrame g;
    g.p = f.q;
    g.q = f.p;
    g.r0 = f.s1;
    g.s0 = f.r1;
    g.r1 = f.s0;
    g.s1 = f.r0;
    g.N = f.N;
    return g;
}

// Under the swap the roles of u and u-tilde exchange.
inline ConvergentFrame swap_frame(const ConvergentFrame& f) {
    ConvergentFrame g;
    g.p = f.qt;
    g.q = f.pt;
    g.pt = f.q;
    g.qt = f.p;
    g.k = f.k;
    g.quotients = f.quotients;
    return g;
}

} // namespace saddlenf
