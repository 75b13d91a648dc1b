#pragma once

#include "matrix.hpp"

#include <istream>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace geo4 {

enum class Parity { even, odd };

inline const char* to_string(Parity p) { return p == Parity::even ? "even" : "odd"; }

struct FormInvariants {
    std::size_t dim = 0;
    std::size_t rank = 0;
    std::size_t b_plus = 0;
    std::size_t b_minus = 0;
    long signature = 0;
    Integer determinant = 0;
    Parity parity = Parity::even;
    bool unimodular = false;
    std::vector<Integer> torsion;  // elementary divisors > 1

    std::size_t nullity() const noexcept { return dim - rank; }
    bool definite() const noexcept { return rank == dim && (b_plus == 0 || b_minus == 0); }
    friend bool operator==(const FormInvariants&, const FormInvariants&) = default;
};

struct Inertia {
    std::size_t positive = 0, negative = 0, nullity = 0;
    Integer determinant = 0;
};

namespace detail {

// Fraction-free symmetric elimination. Every stored entry is a minor of the input
// (Sylvester's identity), so divisions are exact. A nonzero diagonal gives a 1x1 pivot whose
// LDL^T entry has the sign of pivot * previous minor; an all-zero trailing diagonal with a nonzero
// entry b at (k,l) gives the 2x2 block [[0,b],[b,0]], one positive and one negative direction.
template <class T, class W>
Inertia symmetric_inertia(std::vector<T> a, std::size_t n) {
    auto at = [&](std::size_t i, std::size_t j) -> T& { return a[i * n + j]; };
    auto sym_swap = [&](std::size_t x, std::size_t y) {
        if (x == y) return;
        for (std::size_t j = 0; j < n; ++j) std::swap(at(x, j), at(y, j));
        for (std::size_t i = 0; i < n; ++i) std::swap(at(i, x), at(i, y));
    };
    auto sign = [](const T& x) { return x > 0 ? 1 : (x < 0 ? -1 : 0); };
    Inertia out;
    T prev = 1;
    std::size_t t = 0;
    while (t < n) {
        std::size_t k = t;
        while (k < n && at(k, k) == 0) ++k;
        if (k < n) {
            sym_swap(t, k);
            const T p = at(t, t);
            (sign(p) * sign(prev) > 0 ? out.positive : out.negative) += 1;
            for (std::size_t i = t + 1; i < n; ++i)
                for (std::size_t j = i; j < n; ++j) {
                    W num = W(p) * W(at(i, j)) - W(at(i, t)) * W(at(t, j));
                    at(i, j) = at(j, i) = static_cast<T>(num / W(prev));
                }
            prev = p;
            t += 1;
            continue;
        }
        std::size_t kk = n, ll = n;
        for (std::size_t i = t; i < n && kk == n; ++i)
            for (std::size_t j = i + 1; j < n; ++j)
                if (at(i, j) != 0) {
                    kk = i;
                    ll = j;
                    break;
                }
        if (kk == n) {
            out.nullity = n - t;
            out.determinant = 0;
            return out;
        }
        sym_swap(t, kk);
        sym_swap(t + 1, ll);
        const T b = at(t, t + 1);
        const W prev2 = W(prev) * W(prev);
        for (std::size_t i = t + 2; i < n; ++i)
            for (std::size_t j = i; j < n; ++j) {
                W num = -W(b) * W(b) * W(at(i, j)) + W(b) * W(at(i, t)) * W(at(t + 1, j)) +
                        W(b) * W(at(t, j)) * W(at(i, t + 1));
                at(i, j) = at(j, i) = static_cast<T>(num / prev2);
            }
        prev = static_cast<T>(-(W(b) * W(b)) / W(prev));
        out.positive += 1;
        out.negative += 1;
        t += 2;
    }
    out.determinant = Integer(prev);
    return out;
}

}  // namespace detail

// Exact inertia and determinant of a symmetric integer matrix.
inline Inertia inertia(const IntMatrix& m) {
    if (!m.symmetric()) throw DomainError("Gram matrix is not symmetric");
    const std::size_t n = m.rows();
    if (detail::fits_machine_words(m)) return detail::symmetric_inertia<std::int64_t, __int128>(detail::to_words<std::int64_t>(m), n);
    std::vector<Integer> a;
    a.reserve(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) a.push_back(m(i, j));
    return detail::symmetric_inertia<Integer, Integer>(std::move(a), n);
}

// Symmetric integer bilinear form; invariants are computed once and shared between copies.
class SymIntForm {
public:
    explicit SymIntForm(IntMatrix gram) : gram_(std::move(gram)), cache_(std::make_shared<Cache>()) {
        if (!gram_.symmetric()) throw DomainError("Gram matrix is not symmetric");
    }

    std::size_t dim() const noexcept { return gram_.rows(); }
    const IntMatrix& gram() const noexcept { return gram_; }

    const FormInvariants& invariants() const {
        std::call_once(cache_->once, [this] { cache_->value = compute(); });
        return cache_->value;
    }

    friend bool operator==(const SymIntForm& a, const SymIntForm& b) { return a.gram_ == b.gram_; }

private:
    struct Cache {
        std::once_flag once;
        FormInvariants value;
    };

    FormInvariants compute() const {
        FormInvariants inv;
        inv.dim = dim();
        Inertia in = inertia(gram_);
        inv.b_plus = in.positive;
        inv.b_minus = in.negative;
        inv.rank = in.positive + in.negative;
        inv.signature = static_cast<long>(in.positive) - static_cast<long>(in.negative);
        inv.determinant = in.determinant;
        if (dim() > 0 && inv.determinant != determinant(gram_))
            throw InconsistencyError("symmetric elimination and Bareiss determinants disagree");
        inv.parity = Parity::even;
        for (std::size_t i = 0; i < dim(); ++i)
            if (gram_(i, i) % 2 != 0) inv.parity = Parity::odd;
        inv.unimodular = inv.determinant == 1 || inv.determinant == -1;
        if (!inv.unimodular)
            for (auto& d : smith_normal_form(gram_))
                if (d > 1) inv.torsion.push_back(d);
        return inv;
    }

    IntMatrix gram_;
    std::shared_ptr<Cache> cache_;
};

inline SymIntForm congruent(const SymIntForm& f, const IntMatrix& b) { return SymIntForm(b.transpose() * f.gram() * b); }

inline SymIntForm direct_sum(const SymIntForm& a, const SymIntForm& b) {
    IntMatrix m(a.dim() + b.dim(), a.dim() + b.dim());
    for (std::size_t i = 0; i < a.dim(); ++i)
        for (std::size_t j = 0; j < a.dim(); ++j) m(i, j) = a.gram()(i, j);
    for (std::size_t i = 0; i < b.dim(); ++i)
        for (std::size_t j = 0; j < b.dim(); ++j) m(a.dim() + i, a.dim() + j) = b.gram()(i, j);
    return SymIntForm(std::move(m));
}

inline SymIntForm scaled(const SymIntForm& f, const Integer& s) {
    IntMatrix m = f.gram();
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) m(i, j) *= s;
    return SymIntForm(std::move(m));
}

inline SymIntForm hyperbolic() { return SymIntForm(IntMatrix{{0, 1}, {1, 0}}); }

inline SymIntForm hyperbolic_sum(std::size_t copies) {
    IntMatrix m(2 * copies, 2 * copies);
    for (std::size_t i = 0; i < copies; ++i) m(2 * i, 2 * i + 1) = m(2 * i + 1, 2 * i) = 1;
    return SymIntForm(std::move(m));
}

// Positive definite E8: Cartan matrix of the tree with arms of 4, 2 and 1 nodes around node 4.
inline SymIntForm e8() {
    IntMatrix m(8, 8);
    for (std::size_t i = 0; i < 8; ++i) m(i, i) = 2;
    auto edge = [&](std::size_t i, std::size_t j) { m(i, j) = m(j, i) = -1; };
    for (std::size_t i = 0; i + 1 < 7; ++i) edge(i, i + 1);
    edge(4, 7);
    return SymIntForm(std::move(m));
}

inline SymIntForm diagonal_form(const std::vector<Integer>& entries) {
    IntMatrix m(entries.size(), entries.size());
    for (std::size_t i = 0; i < entries.size(); ++i) m(i, i) = entries[i];
    return SymIntForm(std::move(m));
}

// Isomorphism class of an indefinite unimodular form.
struct UnimodularClass {
    enum class Shape { diagonal, even } shape = Shape::diagonal;
    std::size_t plus_ones = 0, minus_ones = 0;  // diagonal shape
    long e8_copies = 0;                         // even shape, signed (negative means -E8)
    std::size_t h_copies = 0;
    bool rohlin_violation = false;

    std::size_t rank() const noexcept {
        return shape == Shape::diagonal ? plus_ones + minus_ones
                                        : 8 * static_cast<std::size_t>(e8_copies < 0 ? -e8_copies : e8_copies) + 2 * h_copies;
    }
    long signature() const noexcept {
        return shape == Shape::diagonal ? static_cast<long>(plus_ones) - static_cast<long>(minus_ones) : 8 * e8_copies;
    }
    friend bool operator==(const UnimodularClass&, const UnimodularClass&) = default;
};

inline std::string to_string(const UnimodularClass& c) {
    std::ostringstream os;
    if (c.shape == UnimodularClass::Shape::diagonal) {
        os << c.plus_ones << "<+1> + " << c.minus_ones << "<-1>";
        return os.str();
    }
    long k = c.e8_copies;
    if (k != 0) {
        if (k < 0) os << '-';
        long m = k < 0 ? -k : k;
        if (m != 1) os << m;
        os << "E8";
    }
    if (c.h_copies) os << (k != 0 ? "+" : "") << c.h_copies << 'H';
    if (k == 0 && c.h_copies == 0) os << '0';
    return os.str();
}

inline UnimodularClass classify_indefinite_unimodular(const FormInvariants& inv, bool smooth_spin) {
    if (!inv.unimodular) throw DomainError("form is not unimodular (det " + inv.determinant.str() + ")");
    if (inv.b_plus == 0 || inv.b_minus == 0)
        throw ClassificationUnsupported("definite unimodular forms are not classified (rank " + std::to_string(inv.rank) + ")");
    UnimodularClass c;
    if (inv.parity == Parity::odd) {
        c.shape = UnimodularClass::Shape::diagonal;
        c.plus_ones = inv.b_plus;
        c.minus_ones = inv.b_minus;
        return c;
    }
    if (inv.signature % 8 != 0)
        throw InconsistencyError("even unimodular form with signature " + std::to_string(inv.signature) + " not divisible by 8");
    c.shape = UnimodularClass::Shape::even;
    c.e8_copies = inv.signature / 8;
    std::size_t e8_rank = 8 * static_cast<std::size_t>(c.e8_copies < 0 ? -c.e8_copies : c.e8_copies);
    c.h_copies = (inv.rank - e8_rank) / 2;
    c.rohlin_violation = smooth_spin && (c.e8_copies % 2 != 0);
    if (c.rank() != inv.rank || c.signature() != inv.signature) throw InconsistencyError("classification arithmetic failed");
    return c;
}

// Largest totally isotropic subspace over Q: nullity + min(b+, b-).
inline std::size_t rational_isotropic_dim(const FormInvariants& inv) {
    return inv.nullity() + std::min(inv.b_plus, inv.b_minus);
}

namespace detail {

using modarith::u64;
using ModVector = std::vector<u64>;

class ModForm {
public:
    ModForm(const IntMatrix& g, u64 p) : p_(p), n_(g.rows()), g_(n_ * n_) {
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t j = 0; j < n_; ++j) g_[i * n_ + j] = modarith::reduce(g(i, j), p);
    }
    u64 p() const noexcept { return p_; }
    std::size_t n() const noexcept { return n_; }
    u64 entry(std::size_t i, std::size_t j) const { return g_[i * n_ + j]; }

    u64 pair(const ModVector& u, const ModVector& v) const {
        u64 s = 0;
        for (std::size_t i = 0; i < n_; ++i) {
            if (u[i] == 0) continue;
            u64 row = 0;
            for (std::size_t j = 0; j < n_; ++j)
                if (v[j]) row = (row + modarith::mulmod(g_[i * n_ + j], v[j], p_)) % p_;
            s = (s + modarith::mulmod(u[i], row, p_)) % p_;
        }
        return s;
    }
    ModVector axpy(const ModVector& x, u64 a, const ModVector& y) const {  // x + a*y
        ModVector r(n_);
        for (std::size_t i = 0; i < n_; ++i) r[i] = (x[i] + modarith::mulmod(a, y[i], p_)) % p_;
        return r;
    }
    ModVector scale(const ModVector& x, u64 a) const {
        ModVector r(n_);
        for (std::size_t i = 0; i < n_; ++i) r[i] = modarith::mulmod(a, x[i], p_);
        return r;
    }
    u64 neg(u64 a) const { return (p_ - a % p_) % p_; }
    u64 inv(u64 a) const { return modarith::inverse(a, p_); }

private:
    u64 p_;
    std::size_t n_;
    std::vector<u64> g_;
};

// Maximal linearly independent subset, in order.
inline std::vector<ModVector> independent_subset(const std::vector<ModVector>& vs, u64 p) {
    std::vector<ModVector> echelon, chosen;
    std::vector<std::size_t> lead;
    for (const auto& v : vs) {
        ModVector r = v;
        for (std::size_t e = 0; e < echelon.size(); ++e) {
            u64 f = r[lead[e]];
            if (f == 0) continue;
            for (std::size_t i = 0; i < r.size(); ++i) r[i] = (r[i] + p - modarith::mulmod(f, echelon[e][i], p)) % p;
        }
        std::size_t l = 0;
        while (l < r.size() && r[l] == 0) ++l;
        if (l == r.size()) continue;
        u64 inv = modarith::inverse(r[l], p);
        for (auto& x : r) x = modarith::mulmod(x, inv, p);
        echelon.push_back(std::move(r));
        lead.push_back(l);
        chosen.push_back(v);
    }
    return chosen;
}

// A nonzero isotropic vector in span(basis), on which the form is nondegenerate; odd p.
inline std::optional<ModVector> find_isotropic(const ModForm& f, const std::vector<ModVector>& basis) {
    std::vector<ModVector> orth;
    std::vector<u64> norms;
    for (const auto& b : basis) {
        ModVector w = b;
        for (std::size_t i = 0; i < orth.size(); ++i) {
            u64 c = modarith::mulmod(f.pair(b, orth[i]), f.inv(norms[i]), f.p());
            w = f.axpy(w, f.neg(c), orth[i]);
        }
        u64 q = f.pair(w, w);
        if (q == 0) return w;
        orth.push_back(std::move(w));
        norms.push_back(q);
    }
    const u64 p = f.p();
    if (orth.size() < 2) return std::nullopt;
    if (orth.size() == 2) {
        u64 t = modarith::mulmod(f.neg(norms[1]), f.inv(norms[0]), p);
        if (!modarith::is_square(t, p)) return std::nullopt;
        return f.axpy(orth[1], modarith::sqrt_mod(t, p), orth[0]);
    }
    // q0 x^2 + q1 y^2 + q2 = 0 always has a solution over F_p.
    for (u64 x = 0; x < p; ++x) {
        u64 rhs = (f.neg(norms[2]) + p - modarith::mulmod(norms[0], modarith::mulmod(x, x, p), p)) % p;
        u64 t = modarith::mulmod(rhs, f.inv(norms[1]), p);
        if (!modarith::is_square(t, p)) continue;
        ModVector v = f.axpy(orth[2], x, orth[0]);
        return f.axpy(v, modarith::sqrt_mod(t, p), orth[1]);
    }
    throw InconsistencyError("ternary form over F_p without an isotropic vector");
}

inline std::vector<std::size_t> pivot_columns(const ModForm& f) {
    const std::size_t n = f.n();
    const u64 p = f.p();
    std::vector<u64> a(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) a[i * n + j] = f.entry(i, j);
    std::vector<std::size_t> pivots;
    std::size_t rank = 0;
    for (std::size_t c = 0; c < n && rank < n; ++c) {
        std::size_t r = rank;
        while (r < n && a[r * n + c] == 0) ++r;
        if (r == n) continue;
        for (std::size_t j = 0; j < n; ++j) std::swap(a[rank * n + j], a[r * n + j]);
        u64 inv = modarith::inverse(a[rank * n + c], p);
        for (std::size_t i = rank + 1; i < n; ++i) {
            u64 m = modarith::mulmod(a[i * n + c], inv, p);
            if (m == 0) continue;
            for (std::size_t j = c; j < n; ++j) a[i * n + j] = (a[i * n + j] + p - modarith::mulmod(m, a[rank * n + j], p)) % p;
        }
        pivots.push_back(c);
        ++rank;
    }
    return pivots;
}

// Witt index of the nondegenerate restriction to span(basis): split hyperbolic planes until anisotropic.
inline std::size_t witt_index(const ModForm& f, std::vector<ModVector> basis) {
    std::size_t index = 0;
    for (;;) {
        auto v = find_isotropic(f, basis);
        if (!v) return index;
        std::optional<ModVector> w;
        for (const auto& b : basis)
            if (f.pair(*v, b) != 0) {
                w = b;
                break;
            }
        if (!w) throw InconsistencyError("isotropic vector in the radical of a nondegenerate space");
        *w = f.scale(*w, f.inv(f.pair(*v, *w)));
        // w <- w - (B(w,w)/2) v makes (v, w) a hyperbolic pair.
        *w = f.axpy(*w, f.neg(modarith::mulmod(f.pair(*w, *w), f.inv(2), f.p())), *v);
        std::vector<ModVector> projected;
        for (const auto& b : basis) {
            ModVector c = f.axpy(b, f.neg(f.pair(b, *w)), *v);
            c = f.axpy(c, f.neg(f.pair(b, *v)), *w);
            projected.push_back(std::move(c));
        }
        basis = independent_subset(projected, f.p());
        ++index;
    }
}

}  // namespace detail

// Largest totally isotropic subspace of the reduction mod p: nullity plus the Witt index of the
// nondegenerate part. For p = 2 every nondegenerate symmetric form of rank r has index floor(r/2).
inline std::size_t witt_isotropic_dim_mod_p(const SymIntForm& f, const Integer& p) {
    if (!is_prime(p)) throw DomainError(p.str() + " is not prime");
    if (p > (Integer(1) << 62)) throw DomainError("primes above 2^62 are not supported");
    const auto pp = p.convert_to<std::uint64_t>();
    const std::size_t d = f.dim();
    const std::size_t r = rank_mod(f.gram(), pp);
    if (pp == 2) return (d - r) + r / 2;
    // Pivot columns of a symmetric matrix index a nondegenerate principal block complementary to the radical.
    detail::ModForm mf(f.gram(), pp);
    std::vector<detail::ModVector> basis;
    for (std::size_t j : detail::pivot_columns(mf)) {
        detail::ModVector e(d, 0);
        e[j] = 1;
        basis.push_back(std::move(e));
    }
    if (basis.size() != r) throw InconsistencyError("pivot columns do not match the rank mod p");
    return (d - r) + detail::witt_index(mf, std::move(basis));
}

// Text format: "dim=<d>" then d rows of d integers.
inline void write_gram(std::ostream& os, const IntMatrix& g) {
    os << "dim=" << g.rows() << '\n' << to_string(g);
}

inline IntMatrix read_gram(std::istream& is) {
    std::string line;
    std::size_t lineno = 0, dim = 0;
    bool have_header = false;
    IntMatrix g;
    std::size_t row = 0;
    while (std::getline(is, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::vector<std::string> toks;
        for (std::string t; ls >> t;) toks.push_back(t);
        if (toks.empty()) continue;
        if (!have_header) {
            if (toks.size() != 1 || toks[0].rfind("dim=", 0) != 0) throw ParseError(lineno, "expected header 'dim=<d>'");
            Integer d;
            try {
                d = Integer(toks[0].substr(4));
            } catch (const std::exception&) {
                throw ParseError(lineno, "bad dimension '" + toks[0].substr(4) + "'");
            }
            if (d < 0 || d > 4096) throw ParseError(lineno, "dimension out of range");
            dim = d.convert_to<std::size_t>();
            g = IntMatrix(dim, dim);
            have_header = true;
            continue;
        }
        if (row >= dim) throw ParseError(lineno, "more than " + std::to_string(dim) + " rows");
        if (toks.size() != dim) throw ParseError(lineno, "expected " + std::to_string(dim) + " entries, got " + std::to_string(toks.size()));
        for (std::size_t j = 0; j < dim; ++j) {
            const std::string& t = toks[j];
            std::size_t s = (t[0] == '-' || t[0] == '+') ? 1 : 0;
            if (s == t.size() || t.find_first_not_of("0123456789", s) != std::string::npos)
                throw ParseError(lineno, "expected an integer, got '" + t + "'");
            g(row, j) = Integer(t[0] == '+' ? t.substr(1) : t);
        }
        ++row;
    }
    if (!have_header) throw ParseError(lineno + 1, "missing header 'dim=<d>'");
    if (row != dim) throw ParseError(lineno + 1, "expected " + std::to_string(dim) + " rows, got " + std::to_string(row));
    return g;
}

inline const char* invariants_tsv_header() { return "rank\tb+\tb-\tsigma\tdet\tparity\tunimodular\ttorsion"; }

inline std::string invariants_tsv_row(const FormInvariants& inv) {
    std::ostringstream os;
    os << inv.rank << '\t' << inv.b_plus << '\t' << inv.b_minus << '\t' << inv.signature << '\t' << inv.determinant << '\t'
       << to_string(inv.parity) << '\t' << (inv.unimodular ? "yes" : "no") << '\t';
    if (inv.torsion.empty()) os << '-';
    for (std::size_t i = 0; i < inv.torsion.size(); ++i) os << (i ? "," : "") << inv.torsion[i];
    return os.str();
}

}  // namespace geo4
