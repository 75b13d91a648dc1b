#pragma once

#include "exterior.hpp"
#include "integer.hpp"
#include "matrix.hpp"

#include <utility>
#include <vector>

// Slow reference implementations that share no code with the mask-based fast paths.
namespace geo4::oracle {

// Sort by adjacent transpositions; 0 if an index repeats, otherwise the sign of the permutation.
inline int sort_sign(std::vector<unsigned>& seq) {
    int sign = 1;
    for (std::size_t pass = 0; pass < seq.size(); ++pass)
        for (std::size_t i = 0; i + 1 < seq.size(); ++i) {
            if (seq[i] == seq[i + 1]) return 0;
            if (seq[i] > seq[i + 1]) {
                std::swap(seq[i], seq[i + 1]);
                sign = -sign;
            }
        }
    for (std::size_t i = 0; i + 1 < seq.size(); ++i)
        if (seq[i] == seq[i + 1]) return 0;
    return sign;
}

inline std::vector<unsigned> indices_at(const KVector& v, std::size_t pos) {
    return MultiIndex::from_position(v.n(), v.degree(), pos).indices();
}

inline KVector wedge(const KVector& u, const KVector& v) {
    if (u.n() != v.n()) throw DomainError("rank mismatch");
    if (u.degree() + v.degree() > u.n()) throw DomainError("degree overflow");
    KVector out(u.n(), u.degree() + v.degree());
    for (std::size_t a = 0; a < u.size(); ++a) {
        if (u.at(a) == 0) continue;
        for (std::size_t b = 0; b < v.size(); ++b) {
            if (v.at(b) == 0) continue;
            std::vector<unsigned> seq = indices_at(u, a);
            auto rhs = indices_at(v, b);
            seq.insert(seq.end(), rhs.begin(), rhs.end());
            int s = sort_sign(seq);
            if (s == 0) continue;
            out.add_term(MultiIndex(u.n(), seq), s > 0 ? u.at(a) * v.at(b) : Integer(-(u.at(a) * v.at(b))));
        }
    }
    return out;
}

// Gram entry (r, s) = top coefficient of x_r ^ x_s ^ omega, term by term.
inline Integer pairing_entry(const KVector& omega, std::size_t r, std::size_t s) {
    const unsigned n = omega.n();
    std::vector<unsigned> a = MultiIndex::from_position(n, 2, r).indices();
    std::vector<unsigned> b = MultiIndex::from_position(n, 2, s).indices();
    Integer total = 0;
    for (std::size_t t = 0; t < omega.size(); ++t) {
        if (omega.at(t) == 0) continue;
        std::vector<unsigned> seq = a;
        seq.insert(seq.end(), b.begin(), b.end());
        auto c = indices_at(omega, t);
        seq.insert(seq.end(), c.begin(), c.end());
        int sign = sort_sign(seq);
        if (sign > 0) total += omega.at(t);
        if (sign < 0) total -= omega.at(t);
    }
    return total;
}

inline IntMatrix pairing_matrix(const KVector& omega) {
    if (omega.n() < 4 || omega.degree() != omega.n() - 4) throw DomainError("pairing class must have degree n-4");
    const std::size_t d = binom64(omega.n(), 2);
    IntMatrix g(d, d);
    for (std::size_t r = 0; r < d; ++r)
        for (std::size_t s = 0; s < d; ++s) g(r, s) = pairing_entry(omega, r, s);
    return g;
}

struct RationalInertia {
    std::size_t positive = 0, negative = 0, nullity = 0;
};

// Lagrange diagonalization over Q: pivot on a nonzero diagonal entry, or make one with e_i + e_j.
inline RationalInertia rational_inertia(const IntMatrix& m) {
    const std::size_t n = m.rows();
    std::vector<std::vector<Rational>> a(n, std::vector<Rational>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) a[i][j] = Rational(m(i, j));
    RationalInertia out;
    std::vector<bool> done(n, false);
    for (std::size_t step = 0; step < n; ++step) {
        std::size_t piv = n;
        for (std::size_t i = 0; i < n && piv == n; ++i)
            if (!done[i] && a[i][i] != 0) piv = i;
        if (piv == n) {
            std::size_t pi = n, pj = n;
            for (std::size_t i = 0; i < n && pi == n; ++i)
                for (std::size_t j = 0; j < n; ++j)
                    if (!done[i] && !done[j] && i != j && a[i][j] != 0) {
                        pi = i, pj = j;
                        break;
                    }
            if (pi == n) break;
            // e_i <- e_i + e_j gives a_ii = 2 a_ij != 0.
            for (std::size_t k = 0; k < n; ++k) a[pi][k] += a[pj][k];
            for (std::size_t k = 0; k < n; ++k) a[k][pi] += a[k][pj];
            piv = pi;
        }
        const Rational d = a[piv][piv];
        for (std::size_t i = 0; i < n; ++i) {
            if (done[i] || i == piv || a[i][piv] == 0) continue;
            const Rational f = a[i][piv] / d;
            for (std::size_t k = 0; k < n; ++k) a[i][k] -= f * a[piv][k];
            for (std::size_t k = 0; k < n; ++k) a[k][i] -= f * a[k][piv];
        }
        done[piv] = true;
        (d > 0 ? out.positive : out.negative) += 1;
    }
    out.nullity = n - out.positive - out.negative;
    return out;
}

}  // namespace geo4::oracle
