#pragma once

#include "classes.hpp"
#include "exterior.hpp"
#include "forms.hpp"
#include "integer.hpp"
#include "matrix.hpp"
#include "oracle.hpp"

#include <array>
#include <atomic>
#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace geo4 {

// Classes omega in Lambda^4(Z^8) with unimodular pairing on Lambda^2(Z^8).

enum class SearchFamily { full_grid, decomposable_sums, random };

inline const char* to_string(SearchFamily f) {
    switch (f) {
        case SearchFamily::full_grid: return "full-grid";
        case SearchFamily::decomposable_sums: return "decomposable-sums";
        case SearchFamily::random: return "random";
    }
    return "?";
}

inline SearchFamily parse_family(const std::string& s) {
    if (s == "full-grid") return SearchFamily::full_grid;
    if (s == "decomposable-sums") return SearchFamily::decomposable_sums;
    if (s == "random") return SearchFamily::random;
    throw DomainError("unknown search family '" + s + "'");
}

inline constexpr std::uint64_t kDefaultSearchBudget = 50'000'000;

inline std::uint64_t search_budget_from_env(std::uint64_t fallback = kDefaultSearchBudget) {
    const char* v = std::getenv("GEO4_SEARCH_BUDGET");
    if (!v || !*v) return fallback;
    char* end = nullptr;
    unsigned long long b = std::strtoull(v, &end, 10);
    if (*end != '\0' || b == 0) throw ConfigError(std::string("GEO4_SEARCH_BUDGET must be a positive integer, got '") + v + "'");
    return b;
}

struct SearchSpec {
    std::int64_t coefficient_bound = 1;
    std::size_t support_bound = 7;
    SearchFamily family = SearchFamily::decomposable_sums;
    std::optional<std::uint64_t> seed;
    std::uint64_t trials = 0;
    bool dedupe = true;
    std::uint64_t budget = kDefaultSearchBudget;
    unsigned workers = 1;
    // Signature +-8 hits are appended here as soon as they are found.
    std::string certificate_path;
};

inline void check_spec(const SearchSpec& s) {
    if (s.coefficient_bound < 1) throw DomainError("coefficient bound must be positive");
    if (s.support_bound < 1 || s.support_bound > 70) throw DomainError("support bound must be in [1, 70]");
    if (s.budget < 1) throw DomainError("budget must be positive");
    if (s.workers < 1) throw DomainError("need at least one worker");
    if (s.family == SearchFamily::random) {
        if (!s.seed) throw DomainError("random family requires a seed");
        if (s.trials < 1) throw DomainError("random family requires a positive trial count");
    }
}

struct SearchHit {
    KVector omega{8, 4};
    IntMatrix gram;
    FormInvariants invariants;
    UnimodularClass classification;
    std::uint64_t candidate = 0;  // position in the family's candidate stream
};

struct SearchSummary {
    std::string family;
    Integer estimate = 0;
    std::uint64_t supports = 0;
    std::uint64_t examined = 0;
    std::uint64_t unimodular = 0;
    std::map<long, std::uint64_t> by_signature;
};

struct SearchResult {
    std::vector<SearchHit> hits;
    SearchSummary summary;
};

namespace detail {

inline constexpr unsigned kSearchRank = 8;
inline constexpr std::size_t kBlocks = 70;
inline constexpr std::size_t kPairs = 28;

struct Edge {
    std::uint8_t r, s;
    std::int8_t sign;
};

// Each term x_T pairs x_J with x_K exactly when J and K split the complement of T: three edges per term.
struct SearchTables {
    std::array<Mask, kBlocks> block_mask{};
    std::array<std::array<Edge, 3>, kBlocks> edges{};
    std::array<std::uint32_t, kBlocks> covers{};      // bitmask of pairs inside the complement
    std::array<int, kPairs> max_cover_block{};        // largest block index covering each pair

    static const SearchTables& get() {
        static const SearchTables t = build();
        return t;
    }

private:
    static SearchTables build() {
        SearchTables t;
        const auto& table = MonomialTable::get(kSearchRank);
        const Mask full = 0xFF;
        t.max_cover_block.fill(-1);
        for (std::size_t b = 0; b < kBlocks; ++b) {
            Mask m = table.mask(4, b);
            t.block_mask[b] = m;
            Mask c = full ^ m;
            std::array<unsigned, 4> idx{};
            unsigned k = 0;
            for (unsigned i = 0; i < kSearchRank; ++i)
                if (c >> i & 1u) idx[k++] = i;
            const std::array<std::array<int, 4>, 3> splits = {{{0, 1, 2, 3}, {0, 2, 1, 3}, {0, 3, 1, 2}}};
            for (std::size_t e = 0; e < 3; ++e) {
                Mask a = (Mask{1} << idx[splits[e][0]]) | (Mask{1} << idx[splits[e][1]]);
                Mask bb = (Mask{1} << idx[splits[e][2]]) | (Mask{1} << idx[splits[e][3]]);
                int sign = wedge_sign(a, bb) * wedge_sign(a | bb, m);
                auto r = static_cast<std::uint8_t>(table.position(a));
                auto s = static_cast<std::uint8_t>(table.position(bb));
                t.edges[b][e] = {r, s, static_cast<std::int8_t>(sign)};
                t.covers[b] |= (std::uint32_t{1} << r) | (std::uint32_t{1} << s);
            }
            for (std::size_t p = 0; p < kPairs; ++p)
                if (t.covers[b] >> p & 1u) t.max_cover_block[p] = static_cast<int>(b);
        }
        return t;
    }
};

inline constexpr std::uint32_t kAllPairs = (std::uint32_t{1} << kPairs) - 1;

// Sign-independent structure of a support: vertices matched by leaf stripping, plus the remaining core.
struct SupportStructure {
    bool singular = false;                        // some pair is isolated for every coefficient choice
    std::vector<std::uint8_t> matched_terms;      // term slots whose edge was forced by a leaf
    std::vector<std::uint8_t> core;               // surviving pair indices
    struct CoreEdge {
        std::uint8_t i, j, term;
        std::int8_t sign;
    };
    std::vector<CoreEdge> core_edges;             // indices into `core`
    bool core_odd = true;                         // det of the core mod 2 when every coefficient is odd
};

inline bool rank_full_mod2(std::vector<std::uint32_t> rows) {
    const std::size_t n = rows.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        while (piv < n && !(rows[piv] >> col & 1u)) ++piv;
        if (piv == n) return false;
        std::swap(rows[piv], rows[col]);
        for (std::size_t r = 0; r < n; ++r)
            if (r != col && (rows[r] >> col & 1u)) rows[r] ^= rows[col];
    }
    return true;
}

inline SupportStructure analyze_support(const std::uint8_t* terms, std::size_t count) {
    const auto& t = SearchTables::get();
    SupportStructure st;
    struct Adj {
        std::uint8_t other, term;
        std::int8_t sign;
    };
    std::array<std::vector<Adj>, kPairs> adj;
    for (std::size_t slot = 0; slot < count; ++slot)
        for (const auto& e : t.edges[terms[slot]]) {
            adj[e.r].push_back({e.s, static_cast<std::uint8_t>(slot), e.sign});
            adj[e.s].push_back({e.r, static_cast<std::uint8_t>(slot), e.sign});
        }
    std::array<bool, kPairs> removed{};
    std::array<int, kPairs> degree{};
    for (std::size_t v = 0; v < kPairs; ++v) degree[v] = static_cast<int>(adj[v].size());
    bool progress = true;
    while (progress) {
        progress = false;
        for (std::size_t v = 0; v < kPairs; ++v) {
            if (removed[v]) continue;
            if (degree[v] == 0) {
                st.singular = true;
                return st;
            }
            if (degree[v] != 1) continue;
            const Adj* partner = nullptr;
            for (const auto& a : adj[v])
                if (!removed[a.other]) partner = &a;
            const std::size_t u = partner->other;
            st.matched_terms.push_back(partner->term);
            removed[v] = removed[u] = true;
            for (std::size_t w : {v, u})
                for (const auto& a : adj[w])
                    if (!removed[a.other]) --degree[a.other];
            progress = true;
        }
    }
    std::array<int, kPairs> local{};
    local.fill(-1);
    for (std::size_t v = 0; v < kPairs; ++v)
        if (!removed[v]) {
            local[v] = static_cast<int>(st.core.size());
            st.core.push_back(static_cast<std::uint8_t>(v));
        }
    std::vector<std::uint32_t> rows(st.core.size(), 0);
    for (std::size_t v = 0; v < kPairs; ++v) {
        if (removed[v]) continue;
        for (const auto& a : adj[v]) {
            if (removed[a.other]) continue;
            rows[static_cast<std::size_t>(local[v])] |= std::uint32_t{1} << local[a.other];
            if (v < a.other)
                st.core_edges.push_back({static_cast<std::uint8_t>(local[v]), static_cast<std::uint8_t>(local[a.other]), a.term, a.sign});
        }
    }
    st.core_odd = rank_full_mod2(rows);
    return st;
}

// Whether the pairing for the given coefficients (indexed by term slot) has determinant +-1.
inline bool pairing_unimodular(const SupportStructure& st, const std::int64_t* coeffs) {
    if (st.singular) return false;
    for (auto slot : st.matched_terms)
        if (coeffs[slot] != 1 && coeffs[slot] != -1) return false;
    const std::size_t n = st.core.size();
    if (n == 0) return true;
    std::vector<std::uint32_t> rows2(n, 0);
    for (const auto& e : st.core_edges)
        if (coeffs[e.term] & 1) {
            rows2[e.i] |= std::uint32_t{1} << e.j;
            rows2[e.j] |= std::uint32_t{1} << e.i;
        }
    if (!rank_full_mod2(std::move(rows2))) return false;
    std::vector<std::int64_t> a(n * n, 0);
    std::vector<double> row_sq(n, 0.0);
    for (const auto& e : st.core_edges) {
        const std::int64_t w = e.sign * coeffs[e.term];
        a[e.i * n + e.j] = a[e.j * n + e.i] = w;
        const double w2 = static_cast<double>(w) * static_cast<double>(w);
        row_sq[e.i] += w2;
        row_sq[e.j] += w2;
    }
    double log_hadamard = 0;
    for (double r : row_sq) log_hadamard += std::log2(std::max(1.0, r));
    if (log_hadamard <= 80) {
        const std::int64_t det = bareiss<std::int64_t, __int128>(std::move(a), n);
        return det == 1 || det == -1;
    }
    std::vector<Integer> big(a.begin(), a.end());
    const Integer det = bareiss<Integer, Integer>(std::move(big), n);
    return det == 1 || det == -1;
}

inline KVector omega_from(const std::uint8_t* terms, const std::int64_t* coeffs, std::size_t count) {
    KVector w(kSearchRank, 4);
    for (std::size_t i = 0; i < count; ++i) w.set(terms[i], coeffs[i]);
    return w;
}

struct SupportList {
    std::size_t size = 0;
    std::vector<std::uint8_t> flat;  // size entries per support, increasing block indices
    std::size_t count() const { return size ? flat.size() / size : 0; }
};

// Supports of exactly `size` blocks whose complements cover every pair; `first_fixed` pins block 0.
// Stops once `limit` supports have been produced and reports whether it stopped early.
inline bool enumerate_covering_supports(std::size_t size, bool first_fixed, std::uint64_t limit, SupportList& out) {
    const auto& t = SearchTables::get();
    out.size = size;
    std::vector<std::uint8_t> chosen;
    std::uint64_t produced = 0;
    bool stopped = false;
    std::function<void(int, std::uint32_t)> rec = [&](int last, std::uint32_t covered) {
        if (stopped) return;
        if (chosen.size() == size) {
            if (covered != kAllPairs) return;
            if (produced++ >= limit) {
                stopped = true;
                return;
            }
            out.flat.insert(out.flat.end(), chosen.begin(), chosen.end());
            return;
        }
        const std::uint32_t uncovered = kAllPairs & ~covered;
        const std::size_t remaining = size - chosen.size();
        if (static_cast<std::size_t>(std::popcount(uncovered)) > 6 * remaining) return;
        int hi = static_cast<int>(kBlocks) - static_cast<int>(remaining);
        if (uncovered) hi = std::min(hi, t.max_cover_block[static_cast<std::size_t>(std::countr_zero(uncovered))]);
        for (int b = last + 1; b <= hi; ++b) {
            chosen.push_back(static_cast<std::uint8_t>(b));
            rec(b, covered | t.covers[static_cast<std::size_t>(b)]);
            chosen.pop_back();
            if (stopped) return;
        }
    };
    if (first_fixed) {
        if (size == 0) return false;
        chosen.push_back(0);
        rec(0, t.covers[0]);
    } else {
        rec(-1, 0);
    }
    return stopped;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

struct Candidate {
    std::vector<std::uint8_t> terms;
    std::vector<std::int64_t> coeffs;
};

inline Candidate random_candidate(const SearchSpec& spec, std::uint64_t trial) {
    std::mt19937_64 rng(splitmix64(*spec.seed + trial));
    const std::size_t s = std::uniform_int_distribution<std::size_t>(1, spec.support_bound)(rng);
    std::array<std::uint8_t, kBlocks> pool{};
    for (std::size_t i = 0; i < kBlocks; ++i) pool[i] = static_cast<std::uint8_t>(i);
    for (std::size_t i = 0; i < s; ++i) std::swap(pool[i], pool[std::uniform_int_distribution<std::size_t>(i, kBlocks - 1)(rng)]);
    Candidate c;
    c.terms.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(s));
    std::sort(c.terms.begin(), c.terms.end());
    std::uniform_int_distribution<std::int64_t> mag(1, spec.coefficient_bound);
    std::bernoulli_distribution neg(0.5);
    for (std::size_t i = 0; i < s; ++i) c.coeffs.push_back(neg(rng) ? -mag(rng) : mag(rng));
    return c;
}

// Coefficient pattern `index` in mixed radix: slot 0 ranges over 1..B when `first_positive`, other slots over +-1..+-B.
inline void decode_pattern(std::uint64_t index, std::size_t count, std::int64_t bound, bool first_positive, std::int64_t* out) {
    for (std::size_t i = 0; i < count; ++i) {
        const std::uint64_t radix = (i == 0 && first_positive) ? static_cast<std::uint64_t>(bound) : static_cast<std::uint64_t>(2 * bound);
        std::uint64_t digit = index % radix;
        index /= radix;
        if (i == 0 && first_positive) out[i] = static_cast<std::int64_t>(digit) + 1;
        else out[i] = digit < static_cast<std::uint64_t>(bound) ? static_cast<std::int64_t>(digit) + 1 : -static_cast<std::int64_t>(digit - bound) - 1;
    }
}

inline std::uint64_t pattern_count(std::size_t count, std::int64_t bound, bool first_positive) {
    Integer total = 1;
    for (std::size_t i = 0; i < count; ++i) total *= (i == 0 && first_positive) ? bound : 2 * bound;
    if (total > Integer(std::numeric_limits<std::uint64_t>::max())) throw BudgetError("pattern count overflow");
    return total.convert_to<std::uint64_t>();
}

// Leaf stripping is a congruence onto hyperbolic blocks, so the pairing has the signature of its core.
inline long core_signature(const SupportStructure& st, const std::int64_t* coeffs) {
    const std::size_t n = st.core.size();
    if (n == 0) return 0;
    IntMatrix m(n, n);
    for (const auto& e : st.core_edges) m(e.i, e.j) = m(e.j, e.i) = e.sign * coeffs[e.term];
    return SymIntForm(m).invariants().signature;
}

struct RawHit {
    std::uint64_t candidate;
    KVector omega;
    long signature;
};

struct ChunkResult {
    std::uint64_t examined = 0;
    std::map<long, std::uint64_t> by_signature;
    std::vector<RawHit> hits;
};

}  // namespace detail

inline SearchHit make_hit(const KVector& omega, std::uint64_t candidate) {
    SearchHit h;
    h.omega = omega;
    h.candidate = candidate;
    SymIntForm f(pairing_matrix(omega));
    h.gram = f.gram();
    h.invariants = f.invariants();
    if (!h.invariants.unimodular) throw InconsistencyError("fast determinant reported a unimodular pairing that is not unimodular");
    if (h.invariants.parity != Parity::even) throw InconsistencyError("pairing on Lambda^2 is odd; the pairing must be even");
    if (h.invariants.signature % 8 != 0)
        throw InconsistencyError("even unimodular hit with signature " + std::to_string(h.invariants.signature) + " not divisible by 8");
    h.classification = classify_indefinite_unimodular(h.invariants, false);
    return h;
}

// Text form: the class, its Gram matrix, the invariants row and the classification, closed by `end`.
inline void write_certificate(std::ostream& os, const SearchHit& h) {
    os << "# candidate " << h.candidate << '\n';
    write_kvector(os, h.omega);
    write_gram(os, h.gram);
    os << invariants_tsv_header() << '\n' << invariants_tsv_row(h.invariants) << '\n';
    os << "class " << to_string(h.classification) << '\n' << "end\n";
}

namespace detail {

inline std::string strip_line_prefix(const std::string& what) {
    auto colon = what.find(": ");
    return what.rfind("line ", 0) == 0 && colon != std::string::npos ? what.substr(colon + 2) : what;
}

inline FormInvariants parse_invariants_row(const std::string& row, std::size_t line) {
    std::vector<std::string> f;
    std::stringstream ss(row);
    for (std::string tok; std::getline(ss, tok, '\t');) f.push_back(tok);
    if (f.size() != 8) throw ParseError(line, "invariants row needs 8 tab-separated fields");
    FormInvariants inv;
    auto num = [&](const std::string& s) { return detail::parse_integer(s, line); };
    inv.rank = num(f[0]).convert_to<std::size_t>();
    inv.b_plus = num(f[1]).convert_to<std::size_t>();
    inv.b_minus = num(f[2]).convert_to<std::size_t>();
    inv.signature = num(f[3]).convert_to<long>();
    inv.determinant = num(f[4]);
    if (f[5] != "even" && f[5] != "odd") throw ParseError(line, "parity must be even or odd");
    inv.parity = f[5] == "even" ? Parity::even : Parity::odd;
    if (f[6] != "yes" && f[6] != "no") throw ParseError(line, "unimodular must be yes or no");
    inv.unimodular = f[6] == "yes";
    if (f[7] != "-") {
        std::stringstream ts(f[7]);
        for (std::string tok; std::getline(ts, tok, ',');) inv.torsion.push_back(num(tok));
    }
    inv.dim = inv.rank;
    return inv;
}

inline UnimodularClass parse_class(const std::string& text, std::size_t line) {
    UnimodularClass c;
    c.shape = UnimodularClass::Shape::even;
    std::string s = text;
    auto plus = s.find('+');
    std::string e8 = s, h;
    if (s.find("E8") == std::string::npos) {
        e8.clear();
        h = s;
    } else if (plus != std::string::npos) {
        e8 = s.substr(0, plus);
        h = s.substr(plus + 1);
    }
    if (!e8.empty()) {
        bool neg = e8[0] == '-';
        std::string mult = e8.substr(neg ? 1 : 0, e8.find("E8") - (neg ? 1 : 0));
        if (e8.substr(e8.find("E8")) != "E8") throw ParseError(line, "bad classification '" + text + "'");
        long m = mult.empty() ? 1 : detail::parse_integer(mult, line).convert_to<long>();
        c.e8_copies = neg ? -m : m;
    }
    if (!h.empty()) {
        if (h == "0") return c;
        if (h.back() != 'H') throw ParseError(line, "bad classification '" + text + "'");
        c.h_copies = detail::parse_integer(h.substr(0, h.size() - 1), line).convert_to<std::size_t>();
    }
    return c;
}

}  // namespace detail

inline std::vector<SearchHit> read_certificates(std::istream& is) {
    std::vector<SearchHit> out;
    std::string line;
    std::size_t lineno = 0;
    std::vector<std::pair<std::size_t, std::string>> block;
    std::uint64_t candidate = 0;
    auto flush = [&]() {
        if (block.empty()) return;
        std::size_t i = 0;
        std::ostringstream kv, gram;
        std::size_t start = block.front().first;
        while (i < block.size() && block[i].second.rfind("dim=", 0) != 0) kv << block[i++].second << '\n';
        if (i == block.size()) throw ParseError(start, "certificate lacks a Gram matrix");
        std::size_t gram_start = block[i].first;
        while (i < block.size() && block[i].second != invariants_tsv_header()) gram << block[i++].second << '\n';
        SearchHit h;
        h.candidate = std::exchange(candidate, 0);
        std::istringstream kvs(kv.str());
        try {
            h.omega = read_kvector(kvs);
        } catch (const ParseError& e) {
            throw ParseError(start + e.line() - 1, detail::strip_line_prefix(e.what()));
        }
        std::istringstream gs(gram.str());
        try {
            h.gram = read_gram(gs);
        } catch (const ParseError& e) {
            throw ParseError(gram_start + e.line() - 1, detail::strip_line_prefix(e.what()));
        }
        if (i + 3 > block.size()) throw ParseError(start, "certificate lacks invariants or classification");
        h.invariants = detail::parse_invariants_row(block[i + 1].second, block[i + 1].first);
        h.invariants.dim = h.gram.rows();
        const std::string& cls = block[i + 2].second;
        if (cls.rfind("class ", 0) != 0) throw ParseError(block[i + 2].first, "expected 'class <name>'");
        h.classification = detail::parse_class(cls.substr(6), block[i + 2].first);
        if (i + 3 != block.size()) throw ParseError(block[i + 3].first, "unexpected line after classification");
        out.push_back(std::move(h));
        block.clear();
    };
    while (std::getline(is, line)) {
        ++lineno;
        std::string body = line;
        if (!body.empty() && body.back() == '\r') body.pop_back();
        if (body.rfind("# candidate ", 0) == 0) {
            const std::string digits = detail::trim(body.substr(12));
            auto [end, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), candidate);
            if (ec != std::errc() || end != digits.data() + digits.size()) throw ParseError(lineno, "bad candidate index '" + digits + "'");
            continue;
        }
        if (detail::trim(body).empty()) continue;
        if (detail::trim(body) == "end") {
            if (block.empty()) throw ParseError(lineno, "empty certificate");
            flush();
            continue;
        }
        block.emplace_back(lineno, body);
    }
    if (!block.empty()) throw ParseError(lineno, "certificate not closed by 'end'");
    return out;
}

struct Verification {
    bool ok = true;
    std::string reason;
    explicit operator bool() const { return ok; }
};

// Independent re-check: brute-force Gram, two determinant methods, classification arithmetic.
inline Verification verify_hit(const SearchHit& h) {
    auto fail = [](std::string why) { return Verification{false, std::move(why)}; };
    if (h.omega.n() != 8 || h.omega.degree() != 4) return fail("class is not a degree-4 element on Z^8");
    if (h.gram.rows() != 28 || h.gram.cols() != 28) return fail("Gram matrix is not 28x28");
    for (std::size_t r = 0; r < 28; ++r)
        for (std::size_t s = 0; s < 28; ++s) {
            Integer e = oracle::pairing_entry(h.omega, r, s);
            if (e != h.gram(r, s))
                return fail("Gram entry (" + std::to_string(r) + "," + std::to_string(s) + "): stored " + h.gram(r, s).str() +
                            ", recomputed " + e.str());
        }
    Integer det_modular = determinant_modular(h.gram);
    Integer det_bareiss = determinant(h.gram);
    if (det_modular != det_bareiss) return fail("modular and fraction-free determinants disagree");
    if (det_modular != 1 && det_modular != -1) return fail("pairing is not unimodular (det " + det_modular.str() + ")");
    FormInvariants inv = SymIntForm(h.gram).invariants();
    if (inv.determinant != det_modular) return fail("elimination determinant disagrees with the modular determinant");
    if (inv.rank != 28) return fail("rank " + std::to_string(inv.rank) + " is not 28");
    if (inv.parity != Parity::even) return fail("pairing is odd");
    if (!(inv == h.invariants)) return fail("stored invariants " + invariants_tsv_row(h.invariants) + " differ from recomputed " +
                                            invariants_tsv_row(inv));
    if (inv.signature % 8 != 0) return fail("even unimodular form with signature not divisible by 8");
    const auto& c = h.classification;
    if (c.shape != UnimodularClass::Shape::even) return fail("classification is not of even type");
    const long k = c.e8_copies < 0 ? -c.e8_copies : c.e8_copies;
    if (28 != 8 * k + 2 * static_cast<long>(c.h_copies)) return fail("classification rank 8|k| + 2l is not 28");
    if (8 * c.e8_copies != inv.signature) return fail("classification signature disagrees with the form");
    return {};
}

namespace detail {

template <class Work>
std::vector<ChunkResult> run_chunks(std::size_t chunks, unsigned workers, const Work& work) {
    std::vector<ChunkResult> results(chunks);
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto loop = [&] {
        for (;;) {
            std::size_t c = next.fetch_add(1);
            if (c >= chunks) return;
            try {
                results[c] = work(c);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                next = chunks;
                return;
            }
        }
    };
    if (workers <= 1) {
        loop();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(loop);
    }
    if (error) std::rethrow_exception(error);
    return results;
}

}  // namespace detail

// Every candidate with unimodular pairing becomes a hit; dedupe keeps the earliest per invariant signature.
inline SearchResult run_search(const SearchSpec& spec) {
    using namespace detail;
    check_spec(spec);
    SearchResult result;
    SearchSummary& sum = result.summary;
    sum.family = to_string(spec.family);
    std::mutex sink_mutex;
    // An even unimodular pairing of rank 28 is determined by its signature, so hits dedupe on signature alone.
    auto on_hit = [&](ChunkResult& r, const SupportStructure& st, const std::uint8_t* terms, const std::int64_t* coeffs, std::size_t count,
                      std::uint64_t cand) {
        const long sig = core_signature(st, coeffs);
        const bool first_in_chunk = r.by_signature[sig]++ == 0;
        KVector omega = omega_from(terms, coeffs, count);
        if (sig != 0) {
            SearchHit h = make_hit(omega, cand);
            std::lock_guard lock(sink_mutex);
            std::string path = spec.certificate_path.empty() ? std::string("geo4-sigma8.cert") : spec.certificate_path;
            std::ofstream out(path, std::ios::app);
            write_certificate(out, h);
        }
        if (!spec.dedupe || first_in_chunk) r.hits.push_back({cand, std::move(omega), sig});
    };

    std::vector<ChunkResult> chunks;
    if (spec.family == SearchFamily::random) {
        sum.estimate = spec.trials;
        if (sum.estimate > spec.budget)
            throw BudgetError("estimated " + sum.estimate.str() + " candidates exceeds the budget " + std::to_string(spec.budget));
        constexpr std::uint64_t kChunk = 4096;
        const std::size_t n_chunks = static_cast<std::size_t>((spec.trials + kChunk - 1) / kChunk);
        chunks = run_chunks(n_chunks, spec.workers, [&](std::size_t c) {
            ChunkResult r;
            const std::uint64_t lo = c * kChunk, hi = std::min<std::uint64_t>(spec.trials, lo + kChunk);
            for (std::uint64_t trial = lo; trial < hi; ++trial) {
                Candidate cand = random_candidate(spec, trial);
                ++r.examined;
                SupportStructure st = analyze_support(cand.terms.data(), cand.terms.size());
                if (st.singular) continue;
                if (pairing_unimodular(st, cand.coeffs.data())) on_hit(r, st, cand.terms.data(), cand.coeffs.data(), cand.terms.size(), trial);
            }
            return r;
        });
    } else {
        const bool first_fixed = spec.family == SearchFamily::decomposable_sums;
        if (spec.family == SearchFamily::full_grid) {
            for (std::size_t s = 1; s <= spec.support_bound; ++s)
                sum.estimate += binomial(70, static_cast<unsigned>(s)) * boost::multiprecision::pow(Integer(2 * spec.coefficient_bound), static_cast<unsigned>(s));
            if (sum.estimate > spec.budget)
                throw BudgetError("estimated " + sum.estimate.str() + " candidates exceeds the budget " + std::to_string(spec.budget));
        }
        std::vector<SupportList> lists;
        Integer counted = 0;
        for (std::size_t s = 1; s <= spec.support_bound; ++s) {
            const std::uint64_t patterns = pattern_count(s, spec.coefficient_bound, first_fixed);
            const std::uint64_t room = counted >= spec.budget ? 0 : (Integer(spec.budget) - counted).convert_to<std::uint64_t>() / patterns;
            SupportList list;
            bool over = enumerate_covering_supports(s, first_fixed, room, list);
            counted += Integer(list.count()) * patterns;
            if (over)
                throw BudgetError("decomposable-sums candidates exceed the budget " + std::to_string(spec.budget) + " (counting stopped at support size " +
                                  std::to_string(s) + ")");
            lists.push_back(std::move(list));
        }
        if (spec.family == SearchFamily::decomposable_sums) sum.estimate = counted;
        struct Job {
            std::size_t list, first, last;
            std::uint64_t base;  // candidate index of the first pattern of `first`
        };
        std::vector<Job> jobs;
        std::uint64_t base = 0;
        constexpr std::size_t kSupportsPerChunk = 256;
        for (std::size_t li = 0; li < lists.size(); ++li) {
            const auto& l = lists[li];
            const std::uint64_t patterns = pattern_count(l.size, spec.coefficient_bound, first_fixed);
            for (std::size_t f = 0; f < l.count(); f += kSupportsPerChunk) {
                std::size_t last = std::min(l.count(), f + kSupportsPerChunk);
                jobs.push_back({li, f, last, base});
                base += (last - f) * patterns;
            }
            sum.supports += l.count();
        }
        chunks = run_chunks(jobs.size(), spec.workers, [&](std::size_t c) {
            const Job& job = jobs[c];
            const auto& l = lists[job.list];
            const std::uint64_t patterns = pattern_count(l.size, spec.coefficient_bound, first_fixed);
            ChunkResult r;
            std::vector<std::int64_t> coeffs(l.size);
            std::uint64_t cand = job.base;
            for (std::size_t si = job.first; si < job.last; ++si) {
                const std::uint8_t* terms = l.flat.data() + si * l.size;
                SupportStructure st = analyze_support(terms, l.size);
                r.examined += patterns;
                if (st.singular || (spec.coefficient_bound == 1 && !st.core_odd)) {
                    cand += patterns;
                    continue;
                }
                for (std::uint64_t pat = 0; pat < patterns; ++pat, ++cand) {
                    decode_pattern(pat, l.size, spec.coefficient_bound, first_fixed, coeffs.data());
                    if (pairing_unimodular(st, coeffs.data())) on_hit(r, st, terms, coeffs.data(), l.size, cand);
                }
            }
            return r;
        });
    }

    std::set<long> seen;
    for (auto& chunk : chunks) {
        sum.examined += chunk.examined;
        for (const auto& [sig, n] : chunk.by_signature) {
            sum.unimodular += n;
            sum.by_signature[sig] += n;
        }
        for (auto& raw : chunk.hits) {
            if (spec.dedupe && !seen.insert(raw.signature).second) continue;
            SearchHit h = make_hit(raw.omega, raw.candidate);
            if (h.invariants.signature != raw.signature)
                throw InconsistencyError("core signature " + std::to_string(raw.signature) + " disagrees with full signature " +
                                         std::to_string(h.invariants.signature));
            result.hits.push_back(std::move(h));
        }
    }
    return result;
}

inline void write_summary(std::ostream& os, const SearchSummary& s) {
    os << "family\t" << s.family << '\n'
       << "estimate\t" << s.estimate << '\n'
       << "supports\t" << s.supports << '\n'
       << "examined\t" << s.examined << '\n'
       << "unimodular\t" << s.unimodular << '\n';
    for (const auto& [sig, n] : s.by_signature) os << "signature " << sig << '\t' << n << '\n';
    auto it8 = s.by_signature.find(8), itm8 = s.by_signature.find(-8);
    std::uint64_t e8 = (it8 == s.by_signature.end() ? 0 : it8->second) + (itm8 == s.by_signature.end() ? 0 : itm8->second);
    if (e8 == 0) os << "signature +-8\tnone found (not a proof of nonexistence)\n";
    else os << "signature +-8\t" << e8 << " found; certificates written\n";
}

}  // namespace geo4
