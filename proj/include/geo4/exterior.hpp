#pragma once

#include "matrix.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <istream>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

namespace geo4 {

inline constexpr unsigned kMaxRank = 16;

// Bit i set <=> x_{i+1} present.
using Mask = std::uint32_t;

// Lexicographic k-subset order for one ambient rank n.
class MonomialTable {
public:
    static const MonomialTable& get(unsigned n) {
        if (n > kMaxRank) throw DomainError("ambient rank above " + std::to_string(kMaxRank));
        static std::array<std::once_flag, kMaxRank + 1> flags;
        static std::array<std::unique_ptr<MonomialTable>, kMaxRank + 1> tables;
        std::call_once(flags[n], [n] { tables[n].reset(new MonomialTable(n)); });
        return *tables[n];
    }

    unsigned n() const noexcept { return n_; }
    std::size_t size(unsigned k) const { return by_degree_.at(k).size(); }
    Mask mask(unsigned k, std::size_t pos) const { return by_degree_.at(k).at(pos); }
    std::size_t position(Mask m) const { return position_[m]; }
    std::span<const Mask> masks(unsigned k) const { return by_degree_.at(k); }

private:
    explicit MonomialTable(unsigned n) : n_(n), by_degree_(n + 1), position_(std::size_t{1} << n) {
        for (unsigned k = 0; k <= n; ++k) {
            Mask m = 0;
            fill(k, 0, m);
        }
    }
    void fill(unsigned k, unsigned start, Mask m) {
        if (static_cast<unsigned>(std::popcount(m)) == k) {
            position_[m] = static_cast<std::uint32_t>(by_degree_[k].size());
            by_degree_[k].push_back(m);
            return;
        }
        for (unsigned i = start; i < n_; ++i) fill(k, i + 1, m | (Mask{1} << i));
    }

    unsigned n_;
    std::vector<std::vector<Mask>> by_degree_;
    std::vector<std::uint32_t> position_;
};

// A basis monomial x_{i1}...x_{ik} with 1-based increasing indices.
class MultiIndex {
public:
    MultiIndex(unsigned n, std::vector<unsigned> indices) : n_(n), indices_(std::move(indices)) {
        if (n_ < 1 || n_ > kMaxRank) throw DomainError("ambient rank out of range: " + std::to_string(n_));
        for (std::size_t j = 0; j < indices_.size(); ++j) {
            if (indices_[j] < 1 || indices_[j] > n_) throw DomainError("index out of range: " + std::to_string(indices_[j]));
            if (j && indices_[j] <= indices_[j - 1]) throw DomainError("indices must be strictly increasing");
        }
        // rank = C(n,k) - 1 - sum_j C(n - i_j, k - j + 1)
        const unsigned k = degree();
        std::uint64_t tail = 0;
        for (unsigned j = 0; j < k; ++j) tail += binom64(n_ - indices_[j], k - j);
        position_ = binom64(n_, k) - 1 - tail;
    }

    static MultiIndex from_position(unsigned n, unsigned k, std::uint64_t pos) {
        if (n < 1 || n > kMaxRank || k > n) throw DomainError("degree out of range");
        if (pos >= binom64(n, k)) throw DomainError("position out of range: " + std::to_string(pos));
        std::vector<unsigned> idx;
        unsigned next = 1;
        for (unsigned j = 0; j < k; ++j) {
            for (;; ++next) {
                std::uint64_t block = binom64(n - next, k - j - 1);
                if (pos < block) break;
                pos -= block;
            }
            idx.push_back(next++);
        }
        return MultiIndex(n, std::move(idx));
    }

    static MultiIndex from_mask(unsigned n, Mask m) {
        std::vector<unsigned> idx;
        for (unsigned i = 0; i < n; ++i)
            if (m >> i & 1u) idx.push_back(i + 1);
        return MultiIndex(n, std::move(idx));
    }

    unsigned n() const noexcept { return n_; }
    unsigned degree() const noexcept { return static_cast<unsigned>(indices_.size()); }
    const std::vector<unsigned>& indices() const noexcept { return indices_; }
    std::uint64_t rank_position() const noexcept { return position_; }
    Mask mask() const {
        Mask m = 0;
        for (unsigned i : indices_) m |= Mask{1} << (i - 1);
        return m;
    }
    friend bool operator==(const MultiIndex&, const MultiIndex&) = default;

private:
    unsigned n_;
    std::vector<unsigned> indices_;
    std::uint64_t position_ = 0;
};

// Sign of x_A ^ x_B relative to x_{A|B}: parity of pairs (a in A, b in B) with a > b.
inline int wedge_sign(Mask a, Mask b) {
    unsigned inversions = 0;
    for (Mask rest = b; rest; rest &= rest - 1) {
        unsigned j = static_cast<unsigned>(std::countr_zero(rest));
        inversions += static_cast<unsigned>(std::popcount(a >> j >> 1));
    }
    return (inversions & 1u) ? -1 : 1;
}

// Element of Lambda^k(Z^n), dense in the lexicographic monomial basis.
class KVector {
public:
    KVector(unsigned n, unsigned k) : n_(n), k_(k) {
        if (n < 1 || n > kMaxRank) throw DomainError("ambient rank out of range: " + std::to_string(n));
        if (k > n) throw DomainError("degree " + std::to_string(k) + " exceeds rank " + std::to_string(n));
        coeffs_.assign(binom64(n, k), Integer(0));
    }

    static KVector monomial(unsigned n, const std::vector<unsigned>& indices, const Integer& c = 1) {
        MultiIndex m(n, indices);
        KVector v(n, m.degree());
        v.coeffs_[m.rank_position()] = c;
        return v;
    }
    static KVector scalar(unsigned n, const Integer& c) {
        KVector v(n, 0);
        v.coeffs_[0] = c;
        return v;
    }
    static KVector from_coefficients(unsigned n, unsigned k, std::vector<Integer> coeffs) {
        KVector v(n, k);
        if (coeffs.size() != v.coeffs_.size()) throw DomainError("coefficient vector has wrong length");
        v.coeffs_ = std::move(coeffs);
        return v;
    }

    unsigned n() const noexcept { return n_; }
    unsigned degree() const noexcept { return k_; }
    std::size_t size() const noexcept { return coeffs_.size(); }
    const std::vector<Integer>& coeffs() const noexcept { return coeffs_; }
    const Integer& at(std::size_t pos) const { return coeffs_.at(pos); }
    void set(std::size_t pos, Integer value) { coeffs_.at(pos) = std::move(value); }
    Mask mask_at(std::size_t pos) const { return MonomialTable::get(n_).mask(k_, pos); }

    const Integer& coefficient(const MultiIndex& m) const {
        check_index(m);
        return coeffs_[m.rank_position()];
    }
    void add_term(const MultiIndex& m, const Integer& c) {
        check_index(m);
        coeffs_[m.rank_position()] += c;
    }
    void add_mask(Mask m, const Integer& c) { coeffs_[MonomialTable::get(n_).position(m)] += c; }

    bool is_zero() const {
        for (const auto& c : coeffs_)
            if (c != 0) return false;
        return true;
    }
    std::size_t support_size() const {
        std::size_t s = 0;
        for (const auto& c : coeffs_) s += (c != 0);
        return s;
    }
    Integer content() const {
        Integer g = 0;
        for (const auto& c : coeffs_) g = gcd(g, c);
        return g;
    }

    KVector& operator+=(const KVector& o) {
        check_same(o);
        for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += o.coeffs_[i];
        return *this;
    }
    KVector& operator-=(const KVector& o) {
        check_same(o);
        for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= o.coeffs_[i];
        return *this;
    }
    KVector& operator*=(const Integer& s) {
        for (auto& c : coeffs_) c *= s;
        return *this;
    }
    friend KVector operator+(KVector a, const KVector& b) { return a += b; }
    friend KVector operator-(KVector a, const KVector& b) { return a -= b; }
    friend KVector operator*(const Integer& s, KVector a) { return a *= s; }
    friend KVector operator-(KVector a) { return a *= Integer(-1); }
    friend bool operator==(const KVector&, const KVector&) = default;

private:
    void check_index(const MultiIndex& m) const {
        if (m.n() != n_ || m.degree() != k_) throw DomainError("monomial does not belong to this degree");
    }
    void check_same(const KVector& o) const {
        if (o.n_ != n_ || o.k_ != k_) throw DomainError("KVector shape mismatch");
    }

    unsigned n_, k_;
    std::vector<Integer> coeffs_;
};

inline KVector wedge(const KVector& u, const KVector& v) {
    if (u.n() != v.n()) throw DomainError("wedge of classes on different ambient ranks");
    if (u.degree() + v.degree() > u.n())
        throw DomainError("degree overflow: " + std::to_string(u.degree()) + " + " + std::to_string(v.degree()) + " > " +
                          std::to_string(u.n()));
    const auto& table = MonomialTable::get(u.n());
    KVector w(u.n(), u.degree() + v.degree());
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (u.at(i) == 0) continue;
        Mask a = table.mask(u.degree(), i);
        for (std::size_t j = 0; j < v.size(); ++j) {
            if (v.at(j) == 0) continue;
            Mask b = table.mask(v.degree(), j);
            if (a & b) continue;
            Integer term = u.at(i) * v.at(j);
            if (wedge_sign(a, b) < 0) term = -term;
            w.add_mask(a | b, term);
        }
    }
    return w;
}

// Evaluation against the orientation class: the coefficient of x_1...x_n.
inline Integer top_coefficient(const KVector& w) {
    if (w.degree() != w.n())
        throw DomainError("top coefficient needs degree " + std::to_string(w.n()) + ", got " + std::to_string(w.degree()));
    return w.at(0);
}

// Element of GL_n(Z), determinant checked exactly.
class BasisChange {
public:
    explicit BasisChange(IntMatrix m) : m_(std::move(m)) {
        if (!m_.square() || m_.rows() < 1 || m_.rows() > kMaxRank) throw DomainError("basis change must be n x n with 1 <= n <= 16");
        det_ = determinant(m_);
        if (det_ != 1 && det_ != -1) throw DomainError("basis change is not unimodular (det " + det_.str() + ")");
    }
    static BasisChange identity(unsigned n) { return BasisChange(IntMatrix::identity(n)); }

    unsigned n() const noexcept { return static_cast<unsigned>(m_.rows()); }
    const IntMatrix& matrix() const noexcept { return m_; }
    int det() const noexcept { return det_ > 0 ? 1 : -1; }

    BasisChange inverse() const { return BasisChange(inverse_unimodular(m_)); }
    BasisChange transpose() const { return BasisChange(m_.transpose()); }
    friend BasisChange operator*(const BasisChange& a, const BasisChange& b) { return BasisChange(a.m_ * b.m_); }

private:
    IntMatrix m_;
    Integer det_;
};

// Substitution x_i -> sum_j B_ij x_j, extended multiplicatively.
// This is a pullback: gl_action(B1*B2, u) == gl_action(B2, gl_action(B1, u)).
inline KVector gl_action(const BasisChange& b, const KVector& u) {
    const unsigned n = u.n();
    if (b.n() != n) throw DomainError("basis change rank does not match the class");
    std::vector<KVector> images;
    images.reserve(n);
    for (unsigned i = 0; i < n; ++i) {
        KVector li(n, 1);
        for (unsigned j = 0; j < n; ++j) li.set(j, b.matrix()(i, j));
        images.push_back(std::move(li));
    }
    const auto& table = MonomialTable::get(n);
    KVector out(n, u.degree());
    for (std::size_t pos = 0; pos < u.size(); ++pos) {
        if (u.at(pos) == 0) continue;
        Mask m = table.mask(u.degree(), pos);
        KVector acc = KVector::scalar(n, u.at(pos));
        for (unsigned i = 0; i < n; ++i)
            if (m >> i & 1u) acc = wedge(acc, images[i]);
        out += acc;
    }
    return out;
}

// Image of the class under the automorphism A of the torus group: det(A) * ((A^T)^{-1})^*(omega).
inline KVector pushforward_omega(const BasisChange& a, const KVector& omega) {
    if (a.n() != omega.n()) throw DomainError("basis change rank does not match the class");
    if (omega.n() < 4 || omega.degree() != omega.n() - 4) throw DomainError("pushforward expects a class of degree n-4");
    KVector out = gl_action(a.transpose().inverse(), omega);
    if (a.det() < 0) out *= Integer(-1);
    return out;
}

// Text format: "n=<n> k=<k>" then "i1 ... ik : coeff" per nonzero term, ascending positions.
inline void write_kvector(std::ostream& os, const KVector& v) {
    os << "n=" << v.n() << " k=" << v.degree() << '\n';
    const auto& table = MonomialTable::get(v.n());
    for (std::size_t pos = 0; pos < v.size(); ++pos) {
        if (v.at(pos) == 0) continue;
        Mask m = table.mask(v.degree(), pos);
        bool first = true;
        for (unsigned i = 0; i < v.n(); ++i)
            if (m >> i & 1u) {
                os << (first ? "" : " ") << (i + 1);
                first = false;
            }
        os << (first ? ": " : " : ") << v.at(pos) << '\n';
    }
}

inline std::string to_string(const KVector& v) {
    std::ostringstream os;
    write_kvector(os, v);
    return os.str();
}

namespace detail {

inline std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline Integer parse_integer(const std::string& tok, std::size_t line) {
    std::string t = trim(tok);
    std::size_t start = (!t.empty() && (t[0] == '-' || t[0] == '+')) ? 1 : 0;
    if (t.size() == start) throw ParseError(line, "expected an integer, got '" + tok + "'");
    for (std::size_t i = start; i < t.size(); ++i)
        if (t[i] < '0' || t[i] > '9') throw ParseError(line, "expected an integer, got '" + tok + "'");
    if (t[0] == '+') t.erase(0, 1);
    return Integer(t);
}

inline unsigned parse_header_field(const std::string& tok, const std::string& key, std::size_t line) {
    if (tok.rfind(key + "=", 0) != 0) throw ParseError(line, "expected '" + key + "=<value>', got '" + tok + "'");
    Integer v = parse_integer(tok.substr(key.size() + 1), line);
    if (v < 0 || v > 1000000) throw ParseError(line, key + " out of range");
    return v.convert_to<unsigned>();
}

}  // namespace detail

inline KVector read_kvector(std::istream& is) {
    std::string line;
    std::size_t lineno = 0;
    std::optional<KVector> v;
    std::vector<bool> seen;
    while (std::getline(is, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        if (!v) {
            std::istringstream hs(line);
            std::string a, b, extra;
            hs >> a >> b;
            if (hs >> extra) throw ParseError(lineno, "unexpected trailing header token '" + extra + "'");
            unsigned n = detail::parse_header_field(a, "n", lineno);
            unsigned k = detail::parse_header_field(b, "k", lineno);
            if (n < 1 || n > kMaxRank || k > n) throw ParseError(lineno, "header out of range (1 <= n <= 16, 0 <= k <= n)");
            v.emplace(n, k);
            seen.assign(v->size(), false);
            continue;
        }
        auto colon = line.find(':');
        if (colon == std::string::npos) throw ParseError(lineno, "expected 'i1 ... ik : coeff'");
        std::istringstream ls(line.substr(0, colon));
        std::vector<unsigned> idx;
        std::string tok;
        while (ls >> tok) {
            Integer x = detail::parse_integer(tok, lineno);
            if (x < 1 || x > v->n()) throw ParseError(lineno, "index " + x.str() + " out of range");
            idx.push_back(x.convert_to<unsigned>());
        }
        if (idx.size() != v->degree()) throw ParseError(lineno, "expected " + std::to_string(v->degree()) + " indices");
        for (std::size_t j = 1; j < idx.size(); ++j)
            if (idx[j] <= idx[j - 1]) throw ParseError(lineno, "indices must be strictly increasing");
        Integer c = detail::parse_integer(line.substr(colon + 1), lineno);
        MultiIndex m(v->n(), idx);
        if (seen[m.rank_position()]) throw ParseError(lineno, "duplicate monomial");
        seen[m.rank_position()] = true;
        v->set(m.rank_position(), c);
    }
    if (!v) throw ParseError(lineno + 1, "missing header 'n=<n> k=<k>'");
    return *v;
}

inline KVector parse_kvector(const std::string& text) {
    std::istringstream is(text);
    return read_kvector(is);
}

}  // namespace geo4
