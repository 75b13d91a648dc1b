#pragma once

#include "exterior.hpp"
#include "forms.hpp"

#include <functional>
#include <ostream>
#include <string>
#include <vector>

namespace geo4 {

// The form (x, y) -> <x ^ y ^ omega, [T]> on Lambda^2(Z^n).
struct PairingForm {
    unsigned n;
    KVector omega;
    SymIntForm form;
};

inline void check_pairing_class(const KVector& omega) {
    if (omega.n() < 4) throw DomainError("pairing needs ambient rank at least 4");
    if (omega.degree() != omega.n() - 4)
        throw DomainError("pairing class must have degree n-4 = " + std::to_string(omega.n() - 4) + ", got " +
                          std::to_string(omega.degree()));
}

// Entry (r, s) = omega_C * sign(x_r ^ x_s ^ x_C) where C is the complement of r and s.
inline IntMatrix pairing_matrix(const KVector& omega) {
    check_pairing_class(omega);
    const unsigned n = omega.n();
    const auto& table = MonomialTable::get(n);
    const Mask full = (Mask{1} << n) - 1;
    const std::size_t d = table.size(2);
    IntMatrix g(d, d);
    for (std::size_t r = 0; r < d; ++r) {
        Mask a = table.mask(2, r);
        for (std::size_t s = r + 1; s < d; ++s) {
            Mask b = table.mask(2, s);
            if (a & b) continue;
            Mask c = full ^ a ^ b;
            const Integer& w = omega.at(table.position(c));
            if (w == 0) continue;
            int sign = wedge_sign(a, b) * wedge_sign(a | b, c);
            g(r, s) = g(s, r) = sign > 0 ? w : Integer(-w);
        }
    }
    return g;
}

inline PairingForm pairing_gram(const KVector& omega) {
    return PairingForm{omega.n(), omega, SymIntForm(pairing_matrix(omega))};
}

// Matrix of the substitution induced on Lambda^2 in the monomial basis: row r holds gl_action(B, m_r).
inline IntMatrix induced_on_degree_two(const BasisChange& b) {
    const unsigned n = b.n();
    const std::size_t d = binom64(n, 2);
    IntMatrix m(d, d);
    for (std::size_t r = 0; r < d; ++r) {
        KVector mono(n, 2);
        mono.set(r, 1);
        KVector img = gl_action(b, mono);
        for (std::size_t s = 0; s < d; ++s) m(r, s) = img.at(s);
    }
    return m;
}

inline KVector canonical_omega6(const Integer& a, const Integer& b, const Integer& c) {
    KVector w(6, 2);
    w.add_term(MultiIndex(6, {1, 2}), a);
    w.add_term(MultiIndex(6, {3, 4}), b);
    w.add_term(MultiIndex(6, {5, 6}), c);
    return w;
}

struct NormalTriple {
    Integer a, b, c;
    BasisChange witness;  // gl_action(witness, input) == a x1x2 + b x3x4 + c x5x6, det 1
};

inline std::ostream& operator<<(std::ostream& os, const NormalTriple& t) {
    return os << t.a << ' ' << t.b << ' ' << t.c << '\n' << to_string(t.witness.matrix());
}

inline bool divides(const Integer& a, const Integer& b) { return a == 0 ? b == 0 : b % a == 0; }

namespace detail {

// Antisymmetric coefficient matrix W of a degree-2 class and the accumulated substitution.
// A substitution E acts by W <- E^T W E and the witness by B <- B E.
class Reducer6 {
public:
    explicit Reducer6(const KVector& omega) : w_(6, 6), basis_(IntMatrix::identity(6)) {
        const auto& table = MonomialTable::get(6);
        for (std::size_t pos = 0; pos < omega.size(); ++pos) {
            Mask m = table.mask(2, pos);
            auto i = static_cast<std::size_t>(std::countr_zero(m));
            auto j = static_cast<std::size_t>(31 - std::countl_zero(m));
            w_(i, j) = omega.at(pos);
            w_(j, i) = -omega.at(pos);
        }
    }

    const Integer& coef(std::size_t i, std::size_t j) const { return w_(i, j); }
    const IntMatrix& basis() const { return basis_; }

    void apply(const IntMatrix& e) {
        w_ = e.transpose() * w_ * e;
        basis_ = basis_ * e;
    }
    // x_from -> x_from + q x_to
    void add(std::size_t from, std::size_t to, const Integer& q) {
        if (q == 0) return;
        IntMatrix e = IntMatrix::identity(6);
        e(from, to) = q;
        apply(e);
    }
    void swap(std::size_t i, std::size_t j) {
        if (i == j) return;
        IntMatrix e(6, 6);
        for (std::size_t k = 0; k < 6; ++k) e(k, k == i ? j : (k == j ? i : k)) = 1;
        apply(e);
    }
    void negate(std::size_t i) {
        IntMatrix e = IntMatrix::identity(6);
        e(i, i) = -1;
        apply(e);
    }

    // Rows s..4 become a chain: only W(i, i+1) >= 0 survive among i >= s.
    void chain(std::size_t s) {
        for (std::size_t row = s; row + 1 < 6; ++row) {
            for (;;) {
                std::size_t m = 6;
                for (std::size_t t = row + 1; t < 6; ++t)
                    if (w_(row, t) != 0 && (m == 6 || abs(w_(row, t)) < abs(w_(row, m)))) m = t;
                if (m == 6) break;
                bool single = true;
                for (std::size_t t = row + 1; t < 6; ++t) {
                    if (t == m || w_(row, t) == 0) continue;
                    single = false;
                    add(m, t, -(w_(row, t) / w_(row, m)));
                }
                if (single) {
                    swap(row + 1, m);
                    if (w_(row, row + 1) < 0) negate(row + 1);
                    break;
                }
            }
        }
    }

    // Euclid on consecutive chain links until every surviving link is isolated.
    void reduce(std::size_t s) {
        if (s + 2 > 6) return;
        chain(s);
        Integer last_measure = -1, before_last = -1;
        for (;;) {
            Integer a1 = w_(s, s + 1);
            Integer a2 = s + 2 < 6 ? w_(s + 1, s + 2) : Integer(0);
            if (a1 == 0) return reduce(s + 1);
            if (a2 == 0) return reduce(s + 2);
            Integer measure = a1 < a2 ? a1 : a2;
            if (last_measure >= 0 && measure > last_measure) throw InconsistencyError("normal form reduction measure increased");
            if (before_last >= 0 && measure >= before_last) throw InconsistencyError("normal form reduction stalled");
            before_last = last_measure;
            last_measure = measure;
            if (a1 <= a2) {
                add(s, s + 2, a2 / a1);
            } else {
                add(s + 1, s, 1);
                chain(s);
            }
        }
    }

private:
    IntMatrix w_;
    IntMatrix basis_;
};

inline Integer content_of_column(const KVector& v) {
    IntMatrix col(v.size(), 1);
    for (std::size_t i = 0; i < v.size(); ++i) col(i, 0) = v.at(i);
    return smith_normal_form(col).at(0);
}

}  // namespace detail

inline NormalTriple normal_form_6(const KVector& omega) {
    if (omega.n() != 6 || omega.degree() != 2) throw DomainError("normal form needs a degree-2 class on Z^6");
    detail::Reducer6 r(omega);
    r.reduce(0);

    // Surviving links (i, i+1) are disjoint; move them to (0,1), (2,3), (4,5), zero links last.
    std::vector<std::size_t> order;
    std::vector<bool> used(6, false);
    for (std::size_t i = 0; i + 1 < 6; ++i)
        if (!used[i] && r.coef(i, i + 1) != 0) {
            order.push_back(i);
            order.push_back(i + 1);
            used[i] = used[i + 1] = true;
        }
    for (std::size_t i = 0; i < 6; ++i)
        if (!used[i]) order.push_back(i);
    {
        IntMatrix e(6, 6);
        for (std::size_t k = 0; k < 6; ++k) e(order[k], k) = 1;
        r.apply(e);
    }
    for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t j = i + 1; j < 6; ++j)
            if (r.coef(i, j) != 0 && !(j == i + 1 && i % 2 == 0)) throw InconsistencyError("normal form left a cross term");

    // Divisibility: u x_i x_{i+1} + v x_j x_{j+1} -> gcd x_i x_{i+1} + lcm x_j x_{j+1}.
    auto make_divide = [&](std::size_t p1, std::size_t p2) {
        std::size_t i = 2 * p1, j = 2 * p2;
        Integer u = r.coef(i, i + 1), v = r.coef(j, j + 1);
        if (divides(u, v)) return;
        if (u == 0) {
            r.swap(i, j);
            r.swap(i + 1, j + 1);
            return;
        }
        Integer g = gcd(u, v);
        Integer a = u / g, b = v / g;
        Bezout bz = extended_gcd(a, b);
        if (bz.g != 1) throw InconsistencyError("Bezout coefficients failed");
        const Integer& p = bz.x;
        const Integer& q = bz.y;
        IntMatrix e = IntMatrix::identity(6);
        e(i, i) = 1, e(i, j) = -b * q;
        e(i + 1, i + 1) = p, e(i + 1, j + 1) = -b;
        e(j, i) = 1, e(j, j) = a * p;
        e(j + 1, i + 1) = q, e(j + 1, j + 1) = a;
        r.apply(e);
    };
    for (std::size_t k = 0; k < 3; ++k)
        if (r.coef(2 * k, 2 * k + 1) < 0) r.negate(2 * k);
    make_divide(0, 1);
    make_divide(0, 2);
    make_divide(1, 2);
    if (r.coef(0, 1) < 0) r.negate(0);
    if (r.coef(2, 3) < 0) r.negate(2);
    if (determinant(r.basis()) < 0) r.negate(5);

    NormalTriple t{r.coef(0, 1), r.coef(2, 3), r.coef(4, 5), BasisChange(r.basis())};
    if (t.a < 0 || t.b < 0 || !divides(t.a, t.b) || !divides(t.b, t.c)) throw InconsistencyError("normal triple violates a|b|c");
    if (t.witness.det() != 1) throw InconsistencyError("normal form witness has determinant -1");
    if (gl_action(t.witness, omega) != canonical_omega6(t.a, t.b, t.c))
        throw InconsistencyError("normal form witness does not reproduce the canonical class");
    return t;
}

struct NormalForm5 {
    Integer k;
    BasisChange witness;  // gl_action(witness, input) == k x1, det 1
};

inline NormalForm5 normal_form_5(const KVector& omega) {
    if (omega.n() != 5 || omega.degree() != 1) throw DomainError("normal form needs a degree-1 class on Z^5");
    std::vector<Integer> c = omega.coeffs();
    IntMatrix basis = IntMatrix::identity(5);
    // x_from -> x_from + q x_to adds q*c_from to c_to.
    auto add = [&](std::size_t from, std::size_t to, const Integer& q) {
        for (std::size_t i = 0; i < 5; ++i) basis(i, to) += q * basis(i, from);
        c[to] += q * c[from];
    };
    for (;;) {
        std::size_t m = 5;
        for (std::size_t t = 0; t < 5; ++t)
            if (c[t] != 0 && (m == 5 || abs(c[t]) < abs(c[m]))) m = t;
        if (m == 5) break;
        bool single = true;
        for (std::size_t t = 0; t < 5; ++t) {
            if (t == m || c[t] == 0) continue;
            single = false;
            add(m, t, -(c[t] / c[m]));
        }
        if (!single) continue;
        if (m != 0) {
            // x_0 -> x_m, x_m -> -x_0 (determinant 1)
            add(m, 0, 1);
            add(0, m, -1);
            add(m, 0, 1);
        }
        break;
    }
    if (c[0] < 0) {
        // x_1, x_2 -> -x_1, -x_2
        for (std::size_t i = 0; i < 5; ++i) {
            basis(i, 0) = -basis(i, 0);
            basis(i, 1) = -basis(i, 1);
        }
        c[0] = -c[0];
        c[1] = -c[1];
    }
    NormalForm5 out{c[0], BasisChange(basis)};
    if (out.witness.det() != 1) throw InconsistencyError("normal form witness has determinant -1");
    if (gl_action(out.witness, omega) != KVector::monomial(5, {1}, out.k))
        throw InconsistencyError("normal form witness does not reproduce k x1");
    return out;
}

// Orbit invariants read off powers of omega: content a, ab = content(omega^2)/2, abc = omega^3/6.
struct TripleInvariants {
    Integer content;
    Integer half_square;
    Integer sixth_cube_abs;
    int cube_sign = 1;
    friend bool operator==(const TripleInvariants&, const TripleInvariants&) = default;
};

inline TripleInvariants triple_invariants(const KVector& omega) {
    if (omega.n() != 6 || omega.degree() != 2) throw DomainError("triple invariants need a degree-2 class on Z^6");
    TripleInvariants t;
    t.content = omega.content();
    if (detail::content_of_column(omega) != t.content)
        throw InconsistencyError("quotient torsion disagrees with the coefficient content");
    KVector sq = wedge(omega, omega);
    Integer sq_content = sq.content();
    if (sq_content % 2 != 0) throw InconsistencyError("omega^2 has odd content");
    t.half_square = sq_content / 2;
    Integer cube = top_coefficient(wedge(sq, omega));
    if (cube % 6 != 0) throw InconsistencyError("omega^3 not divisible by 6");
    t.sixth_cube_abs = abs(cube / 6);
    t.cube_sign = cube < 0 ? -1 : 1;
    return t;
}

inline TripleInvariants triple_invariants(const NormalTriple& t) {
    Integer abc = t.a * t.b * t.c;
    return TripleInvariants{t.a, t.a * t.b, abs(abc), abc < 0 ? -1 : 1};
}

// Span of degree-2 monomials given as index pairs.
inline std::vector<KVector> monomial_span(unsigned n, const std::vector<std::pair<unsigned, unsigned>>& pairs) {
    std::vector<KVector> out;
    for (auto [i, j] : pairs) out.push_back(KVector::monomial(n, {i, j}));
    return out;
}

// Isotropic families for the canonical class a x1x2 + b x3x4 + c x5x6.
inline std::vector<KVector> isotropic_family_any() {
    return monomial_span(6, {{1, 2}, {1, 3}, {1, 4}, {1, 5}, {3, 5}, {3, 6}, {4, 5}});
}
// The family above with x4x5 replaced by x1x6: x3x6 ^ x4x5 ^ x1x2 is nonzero, so the original
// fails whenever a != 0.
inline std::vector<KVector> isotropic_family_any_repaired() {
    return monomial_span(6, {{1, 2}, {1, 3}, {1, 4}, {1, 5}, {3, 5}, {3, 6}, {1, 6}});
}
inline std::vector<KVector> isotropic_family_c_zero() {
    return monomial_span(6, {{1, 2}, {1, 3}, {1, 4}, {1, 5}, {1, 6}, {2, 3}, {2, 4}, {3, 4}, {3, 5}, {3, 6}});
}
inline std::vector<KVector> isotropic_family_bc_zero() {
    return monomial_span(6, {{1, 2}, {1, 3}, {1, 4}, {1, 5}, {1, 6}, {2, 3}, {2, 4}, {2, 5}, {2, 6}, {3, 4}, {3, 5}, {3, 6}});
}

// True when <x ^ y ^ omega, [T]> vanishes for all x, y in the family (modulo m when m > 0).
inline bool is_isotropic(const KVector& omega, const std::vector<KVector>& family, const Integer& modulus = 0) {
    for (std::size_t i = 0; i < family.size(); ++i)
        for (std::size_t j = i; j < family.size(); ++j) {
            Integer v = top_coefficient(wedge(wedge(family[i], family[j]), omega));
            if (modulus == 0 ? v != 0 : v % modulus != 0) return false;
        }
    return true;
}

}  // namespace geo4
