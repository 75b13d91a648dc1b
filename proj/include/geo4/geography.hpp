#pragma once

#include "classes.hpp"
#include "constructions.hpp"
#include "forms.hpp"
#include "integer.hpp"

#include <algorithm>
#include <cstdint>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace geo4 {

struct GeographyPoint {
    std::int64_t sigma = 0;
    std::int64_t chi = 0;
    friend bool operator==(const GeographyPoint&, const GeographyPoint&) = default;
    friend auto operator<=>(const GeographyPoint&, const GeographyPoint&) = default;
};

struct RealizedPoint {
    GeographyPoint point;
    std::string witness;
};

enum class AlphaKind { zero, torsion, multiple, primitive, general };

inline const char* to_string(AlphaKind k) {
    switch (k) {
        case AlphaKind::zero: return "zero";
        case AlphaKind::torsion: return "torsion";
        case AlphaKind::multiple: return "multiple";
        case AlphaKind::primitive: return "primitive";
        case AlphaKind::general: return "general";
    }
    return "?";
}

struct ModPDims {
    std::int64_t h1 = 0;  // dim H^1(G; Z/p)
    std::int64_t h2 = 0;  // dim H^2(G; Z/p)
};

// Quantities extracted once from the pairing on Lambda^2(Z^n).
struct PairingBounds {
    std::int64_t b_plus = 0, b_minus = 0;
    std::int64_t isotropic = 0;  // rational
    std::int64_t dim = 0;
    bool unimodular = false;
    std::int64_t signature = 0;
    std::map<std::int64_t, std::int64_t> witt;  // prime -> isotropic dimension mod p
    Integer unfactored = 1;                     // part of the elementary divisors left unfactored
};

struct GroupProfile {
    std::string name;
    std::int64_t beta1 = 0;
    std::int64_t beta2 = 0;
    std::optional<std::int64_t> deficiency;
    bool l2_b1_vanishes = false;
    AlphaKind alpha_kind = AlphaKind::general;
    std::int64_t multiple_prime = 0;  // p when alpha_kind == multiple
    std::optional<PairingForm> pairing;
    std::optional<PairingBounds> pairing_bounds;
    std::map<std::int64_t, ModPDims> modp_dims;

    // Z^n: H^*(G) is the exterior algebra, so H^2(G) injects with the pairing as restricted form.
    std::optional<std::int64_t> torus_rank;
    // Dimension of an isotropic subspace of the image of H^2(G) valid for every class.
    std::int64_t isotropic_dim = 0;
    bool symmetric = false;
    std::vector<RealizedPoint> realized;
    std::string q_exact_tag;
    std::vector<std::int64_t> q_exact_params;
};

inline std::int64_t choose2(std::int64_t n) { return n * (n - 1) / 2; }

inline PairingBounds analyze_pairing(const PairingForm& pf, std::int64_t extra_prime = 0) {
    const FormInvariants& inv = pf.form.invariants();
    PairingBounds pb;
    pb.b_plus = static_cast<std::int64_t>(inv.b_plus);
    pb.b_minus = static_cast<std::int64_t>(inv.b_minus);
    pb.isotropic = static_cast<std::int64_t>(rational_isotropic_dim(inv));
    pb.dim = static_cast<std::int64_t>(inv.dim);
    pb.unimodular = inv.unimodular;
    pb.signature = inv.signature;
    std::vector<Integer> primes;
    for (const auto& d : inv.torsion) {
        Factorization f = prime_divisors(d);
        pb.unfactored *= f.unfactored;
        primes.insert(primes.end(), f.primes.begin(), f.primes.end());
    }
    if (extra_prime > 1) primes.emplace_back(extra_prime);
    for (const auto& p : primes) {
        if (p > Integer(std::uint64_t{1} << 62)) continue;
        auto pi = to_i64(p);
        if (!pb.witt.count(pi)) pb.witt[pi] = static_cast<std::int64_t>(witt_isotropic_dim_mod_p(pf.form, p));
    }
    return pb;
}

inline std::optional<ModPDims> modp_dims_for(const GroupProfile& g, std::int64_t p) {
    if (auto it = g.modp_dims.find(p); it != g.modp_dims.end()) return it->second;
    if (g.torus_rank) return ModPDims{*g.torus_rank, choose2(*g.torus_rank)};
    return std::nullopt;
}

inline void check_profile(const GroupProfile& g) {
    if (g.beta1 < 0 || g.beta2 < 0) throw ConfigError(g.name + ": Betti numbers must be nonnegative");
    if (g.torus_rank) {
        const auto n = *g.torus_rank;
        if (n < 0) throw ConfigError(g.name + ": torus rank must be nonnegative");
        if (g.beta1 != n || g.beta2 != choose2(n))
            throw ConfigError(g.name + ": a rank-" + std::to_string(n) + " torus profile needs beta1 = " + std::to_string(n) +
                              " and beta2 = " + std::to_string(choose2(n)));
    }
    if (g.alpha_kind == AlphaKind::multiple) {
        if (g.multiple_prime < 2 || !modarith::is_prime(static_cast<std::uint64_t>(g.multiple_prime)))
            throw ConfigError(g.name + ": a multiple class needs a prime");
        if (!modp_dims_for(g, g.multiple_prime))
            throw ConfigError(g.name + ": multiple(" + std::to_string(g.multiple_prime) + ") class without mod-p cohomology dimensions");
    }
    if (g.pairing) {
        if (!g.torus_rank || static_cast<std::int64_t>(g.pairing->n) != *g.torus_rank)
            throw ConfigError(g.name + ": a pairing needs a torus profile of the same rank");
        if (!g.pairing_bounds) throw ConfigError(g.name + ": pairing bounds not computed");
    }
    if (g.isotropic_dim < 0 || g.isotropic_dim > g.beta2)
        throw ConfigError(g.name + ": isotropic dimension exceeds beta2");
    for (const auto& r : g.realized)
        if ((r.point.chi - r.point.sigma) % 2 != 0)
            throw ConfigError(g.name + ": realized point (" + std::to_string(r.point.sigma) + "," + std::to_string(r.point.chi) +
                              ") violates chi = sigma mod 2");
}

inline std::int64_t round_to_parity(std::int64_t value, std::int64_t sigma) {
    return ((value - sigma) % 2 != 0) ? value + 1 : value;
}

// Minimal b+ + b- subject to b+ - b- = sigma and b+- >= max(b+-(form), m).
inline std::int64_t min_beta2(const PairingBounds& pb, std::int64_t sigma, std::int64_t m) {
    const std::int64_t lo_plus = std::max(pb.b_plus, m);
    const std::int64_t lo_minus = std::max(pb.b_minus, m);
    const std::int64_t b_minus = std::max(lo_minus, lo_plus - sigma);
    return 2 * b_minus + sigma;
}

inline std::int64_t effective_isotropic_dim(const GroupProfile& g) {
    std::int64_t m = g.isotropic_dim;
    if (g.pairing_bounds) m = std::max(m, g.pairing_bounds->isotropic);
    return m;
}

// A lower-bound rule: returns a bound on chi, or nothing when it does not apply.
struct BoundRule {
    std::string name;
    std::string citation;
    std::function<std::optional<std::int64_t>(const GroupProfile&, std::int64_t)> evaluate;
};

inline const std::vector<BoundRule>& bound_rules() {
    static const std::vector<BoundRule> rules = {
        {"half-plane", "signature half-planes: chi >= |sigma| - 2 beta1(G) + 2",
         [](const GroupProfile& g, std::int64_t s) -> std::optional<std::int64_t> { return std::abs(s) - 2 * g.beta1 + 2; }},
        {"betti", "surjectivity on H_2: chi >= beta2(G) - 2 beta1(G) + 2",
         [](const GroupProfile& g, std::int64_t) -> std::optional<std::int64_t> { return g.beta2 - 2 * g.beta1 + 2; }},
        {"torsion-class", "zero or torsion class: chi >= |sigma| + 2 - 2 beta1(G) + 2 beta2(G)",
         [](const GroupProfile& g, std::int64_t s) -> std::optional<std::int64_t> {
             if (g.alpha_kind != AlphaKind::zero && g.alpha_kind != AlphaKind::torsion) return std::nullopt;
             return std::abs(s) + 2 - 2 * g.beta1 + 2 * g.beta2;
         }},
        {"mod-p-class", "class divisible by p: chi >= 2 - 2 dim H^1(G;Z/p) + 2 dim H^2(G;Z/p)",
         [](const GroupProfile& g, std::int64_t) -> std::optional<std::int64_t> {
             if (g.alpha_kind != AlphaKind::multiple) return std::nullopt;
             auto d = modp_dims_for(g, g.multiple_prime);
             if (!d) throw ConfigError(g.name + ": multiple class without mod-p dimensions");
             return 2 - 2 * d->h1 + 2 * d->h2;
         }},
        {"l2", "vanishing first L2-Betti number: chi >= |sigma|",
         [](const GroupProfile& g, std::int64_t s) -> std::optional<std::int64_t> {
             if (!g.l2_b1_vanishes) return std::nullopt;
             return std::abs(s);
         }},
        {"isotropic", "isotropic subspace of dimension m in H^2(M): beta2 >= 2m + |sigma|",
         [](const GroupProfile& g, std::int64_t s) -> std::optional<std::int64_t> {
             const std::int64_t m = effective_isotropic_dim(g);
             if (m <= 0) return std::nullopt;
             return 2 - 2 * g.beta1 + std::abs(s) + 2 * m;
         }},
        {"full-rank-evenness", "beta2(M) = C(n,2) forces H^2(M) = H^2(G) with the even pairing as unimodular form",
         [](const GroupProfile& g, std::int64_t s) -> std::optional<std::int64_t> {
             if (!g.torus_rank) return std::nullopt;
             const std::int64_t n = *g.torus_rank;
             const std::int64_t c = choose2(n);
             bool possible;
             if (g.pairing_bounds)
                 possible = g.pairing_bounds->unimodular && g.pairing_bounds->signature == s;
             else
                 possible = c % 2 == 0 && s % 8 == 0 && (c == 0 || n >= 4);
             if (c == 0) possible = possible && s == 0;
             return 2 - 2 * n + c + (possible ? 0 : 1);
         }},
        {"pairing-inertia", "b+-(M) >= max(b+-(pairing), isotropic dimension)",
         [](const GroupProfile& g, std::int64_t s) -> std::optional<std::int64_t> {
             if (!g.pairing_bounds) return std::nullopt;
             return 2 - 2 * g.beta1 + min_beta2(*g.pairing_bounds, s, effective_isotropic_dim(g));
         }},
        {"pairing-mod-p", "isotropic reduction mod p: beta2(M) >= 2 * isotropic dimension of the pairing mod p",
         [](const GroupProfile& g, std::int64_t) -> std::optional<std::int64_t> {
             if (!g.pairing_bounds || g.pairing_bounds->witt.empty()) return std::nullopt;
             std::int64_t w = 0;
             for (const auto& [p, dim] : g.pairing_bounds->witt) w = std::max(w, dim);
             return 2 - 2 * g.beta1 + 2 * w;
         }},
    };
    return rules;
}

inline const BoundRule& bound_rule(const std::string& name) {
    for (const auto& r : bound_rules())
        if (r.name == name) return r;
    throw DomainError("unknown bound rule '" + name + "'");
}

struct LowerBound {
    std::int64_t value = 0;            // rounded to the parity of sigma
    std::int64_t raw = 0;              // maximum before rounding
    std::vector<std::string> active;   // rules attaining the maximum
};

inline LowerBound lower_bound(const GroupProfile& g, std::int64_t sigma) {
    std::optional<std::int64_t> best;
    std::vector<std::string> active;
    for (const auto& rule : bound_rules()) {
        auto v = rule.evaluate(g, sigma);
        if (!v) continue;
        if (!best || *v > *best) {
            best = v;
            active.assign(1, rule.name);
        } else if (*v == *best) {
            active.push_back(rule.name);
        }
    }
    return {round_to_parity(*best, sigma), *best, active};
}

inline std::string join(const std::vector<std::string>& parts, const std::string& sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? sep : "") + parts[i];
    return out;
}

// Closed interval of integers; hi absent means unbounded above.
struct Range {
    std::int64_t lo = 0;
    std::optional<std::int64_t> hi;
    bool exact() const { return hi && *hi == lo; }
    bool contains(std::int64_t v) const { return v >= lo && (!hi || v <= *hi); }
    friend bool operator==(const Range&, const Range&) = default;
};

inline std::string to_string(const Range& r) {
    if (r.exact()) return std::to_string(r.lo);
    return "[" + std::to_string(r.lo) + "," + (r.hi ? std::to_string(*r.hi) : std::string("inf")) + "]";
}

enum class RowStatus { exact, interval, derived };

inline const char* to_string(RowStatus s) {
    switch (s) {
        case RowStatus::exact: return "exact";
        case RowStatus::interval: return "interval";
        case RowStatus::derived: return "derived";
    }
    return "?";
}

struct QRow {
    std::int64_t sigma = 0;
    std::int64_t lower = 0;
    std::optional<std::int64_t> upper;
    RowStatus status = RowStatus::interval;
    std::string active_rule;
    std::string witness;

    bool exact() const { return upper && *upper == lower; }
    Range range() const { return {lower, upper}; }
};

struct QFunction {
    std::int64_t window = 0;
    std::vector<QRow> rows;  // sigma = -window .. window
    std::vector<RealizedPoint> realized;

    const QRow& at(std::int64_t sigma) const {
        if (sigma < -window || sigma > window) throw DomainError("sigma " + std::to_string(sigma) + " outside the window");
        return rows[static_cast<std::size_t>(sigma + window)];
    }
};

inline std::string describe_witness(const RealizedPoint& r, std::int64_t sigma) {
    const std::int64_t d = sigma - r.point.sigma;
    if (d == 0) return r.witness;
    return r.witness + " # " + std::to_string(std::abs(d)) + (d > 0 ? " CP2" : " -CP2");
}

// Upper bounds are the cone closure of the realized points under (sigma +- 1, chi + 1).
inline QFunction assemble_q(const std::function<LowerBound(std::int64_t)>& lower, const std::vector<RealizedPoint>& realized,
                            std::int64_t window) {
    if (window < 1) throw DomainError("window must be positive");
    for (const auto& r : realized) {
        if ((r.point.chi - r.point.sigma) % 2 != 0)
            throw InconsistencyError("realized point " + r.witness + " violates chi = sigma mod 2");
        LowerBound lb = lower(r.point.sigma);
        if (r.point.chi < lb.value)
            throw ContradictionError("realized point " + r.witness + " at (" + std::to_string(r.point.sigma) + "," +
                                     std::to_string(r.point.chi) + ") lies below the lower bound " + std::to_string(lb.value) +
                                     " from " + join(lb.active, ","));
    }
    QFunction qf;
    qf.window = window;
    qf.realized = realized;
    qf.rows.reserve(static_cast<std::size_t>(2 * window + 1));
    for (std::int64_t s = -window; s <= window; ++s) {
        LowerBound lb = lower(s);
        QRow row;
        row.sigma = s;
        row.lower = lb.value;
        row.active_rule = join(lb.active, ",");
        for (const auto& r : realized) {
            std::int64_t u = r.point.chi + std::abs(s - r.point.sigma);
            if (!row.upper || u < *row.upper) {
                row.upper = u;
                row.witness = describe_witness(r, s);
            }
        }
        if (row.upper && *row.upper < row.lower)
            throw ContradictionError("upper bound " + std::to_string(*row.upper) + " below lower bound " + std::to_string(row.lower) +
                                     " at sigma " + std::to_string(s));
        row.status = row.exact() ? RowStatus::exact : RowStatus::interval;
        qf.rows.push_back(std::move(row));
    }
    return qf;
}

// q_{G,-alpha}(sigma) = q_{G,alpha}(-sigma)
inline QFunction mirror(const QFunction& qf) {
    QFunction out = qf;
    std::reverse(out.rows.begin(), out.rows.end());
    for (auto& r : out.rows) r.sigma = -r.sigma;
    for (auto& r : out.realized) {
        r.point.sigma = -r.point.sigma;
        r.witness = r.witness.rfind('-', 0) == 0 ? r.witness.substr(1) : "-" + r.witness;
    }
    return out;
}

inline std::vector<RealizedPoint> mirrored(std::vector<RealizedPoint> pts) {
    for (auto& r : pts) {
        r.point.sigma = -r.point.sigma;
        r.witness = r.witness.rfind('-', 0) == 0 ? r.witness.substr(1) : "-" + r.witness;
    }
    return pts;
}

inline std::vector<RealizedPoint> with_mirrors(const std::vector<RealizedPoint>& pts) {
    std::vector<RealizedPoint> out = pts;
    for (const auto& r : mirrored(pts)) {
        bool seen = std::any_of(out.begin(), out.end(), [&](const RealizedPoint& x) { return x.point == r.point; });
        if (!seen) out.push_back(r);
    }
    return out;
}

// Union of cones {(a, q(a))} + {(k - l, k + l)}.
struct ConeSet {
    std::vector<GeographyPoint> apexes;

    bool contains(std::int64_t sigma, std::int64_t chi) const {
        if ((chi - sigma) % 2 != 0) return false;
        return std::any_of(apexes.begin(), apexes.end(),
                           [&](const GeographyPoint& a) { return chi >= a.chi + std::abs(sigma - a.sigma); });
    }
};

struct WindowError : DomainError {
    WindowError(const std::string& what, std::int64_t required) : DomainError(what), required_(required) {}
    std::int64_t required() const noexcept { return required_; }

private:
    std::int64_t required_;
};

inline constexpr std::int64_t kDefaultWindow = 64;
inline constexpr std::int64_t kStabilizationSteps = 8;

struct DerivedInvariants {
    Range q;                      // min over sigma
    Range p;                      // stabilized q(sigma) - sigma, sigma -> +inf
    Range p_negative;             // stabilized q(sigma) + sigma, sigma -> -inf
    std::vector<std::int64_t> minimum_points;
    ConeSet cones;
};

namespace detail {

inline std::optional<std::int64_t> stable_offset(const QFunction& qf, bool upper, int side) {
    std::optional<std::int64_t> value;
    for (std::int64_t i = 0; i < kStabilizationSteps; ++i) {
        const std::int64_t s = side * (qf.window - i);
        const QRow& r = qf.at(s);
        std::optional<std::int64_t> v = upper ? r.upper : std::optional<std::int64_t>(r.lower);
        if (!v) return std::nullopt;
        std::int64_t off = *v - side * s;
        if (value && *value != off) throw WindowError("window too small", 0);
        value = off;
    }
    return value;
}

}  // namespace detail

inline bool stabilized(const QFunction& qf) {
    if (qf.window < kStabilizationSteps) return false;
    try {
        for (int side : {1, -1})
            for (bool upper : {false, true}) detail::stable_offset(qf, upper, side);
    } catch (const WindowError&) {
        return false;
    }
    return true;
}

inline DerivedInvariants derived_invariants(const QFunction& qf) {
    if (!stabilized(qf))
        throw WindowError("window too small: q(sigma) -+ sigma has not stabilized within |sigma| <= " + std::to_string(qf.window), 0);
    DerivedInvariants d;
    std::int64_t qlo = qf.rows.front().lower;
    std::optional<std::int64_t> qhi;
    for (const auto& r : qf.rows) {
        qlo = std::min(qlo, r.lower);
        if (r.upper) qhi = qhi ? std::min(*qhi, *r.upper) : *r.upper;
    }
    d.q = {qlo, qhi};
    d.p = {*detail::stable_offset(qf, false, 1), detail::stable_offset(qf, true, 1)};
    d.p_negative = {*detail::stable_offset(qf, false, -1), detail::stable_offset(qf, true, -1)};
    for (std::int64_t s = -qf.window + 1; s < qf.window; ++s) {
        const QRow &l = qf.at(s - 1), &m = qf.at(s), &r = qf.at(s + 1);
        if (!(l.exact() && m.exact() && r.exact())) continue;
        if (l.lower == m.lower + 1 && r.lower == m.lower + 1) {
            d.minimum_points.push_back(s);
            d.cones.apexes.push_back({s, m.lower});
        }
    }
    return d;
}

// f(t) = min of chi + t sigma over the geography; absent (minus infinity) outside [-1, 1].
inline std::optional<std::pair<Rational, std::optional<Rational>>> f_value(const QFunction& qf, const Rational& t) {
    if (t < -1 || t > 1) return std::nullopt;
    if (!stabilized(qf)) throw WindowError("window too small for f(t)", 0);
    std::optional<Rational> lo, hi;
    for (const auto& r : qf.rows) {
        Rational l = Rational(r.lower) + t * r.sigma;
        if (!lo || l < *lo) lo = l;
        if (r.upper) {
            Rational u = Rational(*r.upper) + t * r.sigma;
            if (!hi || u < *hi) hi = u;
        }
    }
    return std::make_pair(*lo, hi);
}

// Closed forms for the groups whose geography is settled or bracketed.
inline Range q_exact(const std::string& tag, const std::vector<std::int64_t>& params, std::int64_t sigma) {
    const std::int64_t a = std::abs(sigma);
    auto want = [&](std::size_t count) {
        if (params.size() != count)
            throw DomainError("q_exact " + tag + " takes " + std::to_string(count) + " parameter(s)");
    };
    auto exact = [](std::int64_t v) { return Range{v, v}; };
    auto bracket = [&](std::int64_t lo, std::int64_t hi) {
        std::int64_t l = round_to_parity(lo, sigma);
        return Range{l, hi};
    };
    if (tag == "trivial") return want(0), exact(a + 2);
    if (tag == "free") {
        want(1);
        return exact(a + 2 - 2 * params[0]);
    }
    if (tag == "surface") {
        want(1);
        if (params[0] < 1) throw DomainError("surface genus must be positive");
        return exact(a + 2 * (2 - 2 * params[0]));
    }
    if (tag == "closed3") {
        want(1);
        return exact(a + 2 - 2 * params[0]);
    }
    if (tag == "knot") return want(0), exact(a);
    if (tag == "zn") {
        want(1);
        switch (params[0]) {
            case 0:
            case 3: return exact(a + 2);
            case 1:
            case 2:
            case 4: return exact(a);
            case 5: return exact(a + 6);
            case 6: return exact(a == 0 ? 6 : a == 1 ? 7 : a + 4);
            default: throw NotImplementedError("closed form for Z^" + std::to_string(params[0]) + " is known only at sigma = 0");
        }
    }
    if (tag == "znzero") {
        want(1);
        if (sigma != 0) throw NotImplementedError("the minimal Euler characteristic of Z^n is tabulated only at sigma = 0");
        const std::int64_t n = params[0];
        if (n < 0) throw DomainError("rank must be nonnegative");
        if (n == 3) return exact(2);
        if (n == 5) return exact(6);
        const std::int64_t c = choose2(n);
        return exact(2 - 2 * n + c + c % 2);
    }
    if (tag == "z4") {
        want(1);
        const std::int64_t k = std::abs(params[0]);
        if (k == 0) return exact(a + 6);
        if (k == 1) return exact(a);
        return bracket(std::max<std::int64_t>(6, a), a + 6);
    }
    if (tag == "z5") {
        want(1);
        const std::int64_t k = std::abs(params[0]);
        if (k == 0) return exact(a + 12);
        if (k == 1) return exact(a + 6);
        return bracket(std::max<std::int64_t>(12, a + 6), a + 12);
    }
    if (tag == "z6") {
        want(3);
        std::int64_t x = params[0], y = params[1], z = params[2];
        if (x < 0 || y < 0 || !divides(Integer(x), Integer(y)) || !divides(Integer(y), Integer(z)))
            throw DomainError("z6 closed forms need a normal triple a|b|c with a, b >= 0");
        if (z < 0) return q_exact(tag, {x, y, -z}, -sigma);
        if (x == 0) return exact(a + 20);
        if (x == 1 && y == 0) return exact(a + 14);
        if (x == 1 && y == 1 && z == 0) return exact(a + 10);
        if (x == 1 && y == 1 && z == 1) {
            if (sigma == -2 || sigma == 0) return exact(6);
            if (a == 1) return exact(7);
            if (sigma <= -2) return exact(4 - sigma);
            return Range{4 + sigma, 6 + sigma};
        }
        std::int64_t s = x > 1 ? 20 : y > 1 ? 14 : 10;
        std::int64_t lo = std::max(s, 4 + a);
        if (z == 0) lo = std::max(lo, 10 + a);
        if (y == 0) lo = std::max(lo, 14 + a);
        return bracket(lo, s + a);
    }
    throw NotImplementedError("no closed form for group tag '" + tag + "'");
}

inline QFunction resolve(const GroupProfile& g, std::int64_t window = kDefaultWindow) {
    check_profile(g);
    std::vector<RealizedPoint> pts = g.symmetric ? with_mirrors(g.realized) : g.realized;
    if (g.deficiency) {
        RealizedPoint d{{0, 2 - 2 * *g.deficiency}, "pdouble:" + std::to_string(g.beta1) + "," + std::to_string(*g.deficiency)};
        if (std::none_of(pts.begin(), pts.end(), [&](const RealizedPoint& r) { return r.point == d.point; })) pts.push_back(d);
    }
    QFunction qf = assemble_q([&](std::int64_t s) { return lower_bound(g, s); }, pts, window);
    if (!g.q_exact_tag.empty()) {
        for (auto& row : qf.rows) {
            std::optional<Range> closed;
            try {
                closed = q_exact(g.q_exact_tag, g.q_exact_params, row.sigma);
            } catch (const NotImplementedError&) {
            }
            if (!closed) continue;
            if (row.exact() && !closed->exact()) row.status = RowStatus::derived;
            if (row.exact() && !closed->contains(row.lower))
                throw ContradictionError(g.name + ": engine value " + std::to_string(row.lower) + " at sigma " +
                                         std::to_string(row.sigma) + " lies outside the closed form " + to_string(*closed));
        }
    }
    return qf;
}

// Smallest window (up to a cap) on which the profile's q-function stabilizes.
inline std::int64_t required_window(const GroupProfile& g, std::int64_t start = kDefaultWindow, std::int64_t cap = std::int64_t{1} << 20) {
    std::int64_t lo = std::max<std::int64_t>(start, kStabilizationSteps), hi = lo;
    while (!stabilized(resolve(g, hi))) {
        lo = hi;
        hi *= 2;
        if (hi > cap) throw WindowError("no stabilization up to window " + std::to_string(cap), cap);
    }
    if (hi == lo) return hi;
    while (hi - lo > 1) {
        std::int64_t mid = lo + (hi - lo) / 2;
        (stabilized(resolve(g, mid)) ? hi : lo) = mid;
    }
    return hi;
}

inline DerivedInvariants derived_invariants(const GroupProfile& g, std::int64_t window = kDefaultWindow) {
    QFunction qf = resolve(g, window);
    if (!stabilized(qf)) {
        std::int64_t need = required_window(g, window);
        throw WindowError("window too small: " + g.name + " stabilizes only for window >= " + std::to_string(need), need);
    }
    return derived_invariants(qf);
}

// Builtin profiles.

inline RealizedPoint realized_from_recipe(const std::string& key) {
    Block b = evaluate_named(key);
    return {{b.sigma, b.chi}, key};
}

inline RealizedPoint realized_from_block(const std::string& spec) {
    Block b = block_by_name(spec);
    return {{b.sigma, b.chi}, spec};
}

inline GroupProfile torus_base(std::int64_t n) {
    if (n < 0) throw DomainError("rank must be nonnegative");
    GroupProfile g;
    g.name = "Z^" + std::to_string(n);
    g.beta1 = n;
    g.beta2 = choose2(n);
    g.torus_rank = n;
    g.l2_b1_vanishes = n >= 1;
    g.alpha_kind = n < 4 ? AlphaKind::zero : AlphaKind::general;
    // x1 ^ x_j pair to zero; rank 7 for n >= 5 by pulling back the Z^5 metabolizer.
    if (n >= 4) g.isotropic_dim = std::max<std::int64_t>(n - 1, n >= 5 ? 7 : 0);
    g.symmetric = true;
    return g;
}

// Points and lines of P^k over F_p when n counts points of some P^k with p an odd prime.
inline std::vector<ProjectivePlan> projective_plans_for(std::int64_t n) {
    std::vector<ProjectivePlan> out;
    for (std::int64_t p = 3; p + 1 <= n; p += 2) {
        if (!modarith::is_prime(static_cast<std::uint64_t>(p))) continue;
        std::int64_t count = 1 + p, pk = p;
        for (std::int64_t k = 1; count <= n; ++k) {
            if (count == n && k >= 2) out.push_back({p, k, sym_product((p + 1) / 2, true)});
            pk *= p;
            count += pk;
        }
    }
    return out;
}

inline GroupProfile torus_group_profile(std::int64_t n) {
    GroupProfile g = torus_base(n);
    switch (n) {
        case 0: g.realized = {realized_from_recipe("trivial")}; break;
        case 1: g.realized = {realized_from_recipe("z1")}; break;
        case 2: g.realized = {realized_from_recipe("z2")}; break;
        case 3: g.realized = {realized_from_recipe("z3")}; break;
        case 4: g.realized = {realized_from_recipe("z4_T")}; break;
        case 5: g.realized = {realized_from_recipe("z5_k1")}; break;
        default: g.realized = {realized_from_block("kl:" + std::to_string(n))};
    }
    if (n >= 2 && n % 2 == 0) g.realized.push_back(realized_from_block("-sym2:" + std::to_string(n / 2)));
    for (const auto& plan : projective_plans_for(n)) {
        Block w = projective_construction(plan);
        g.realized.push_back({{w.sigma, w.chi}, "projective:" + std::to_string(plan.p) + "," + std::to_string(plan.k) + ",-sym2:" +
                                                    std::to_string((plan.p + 1) / 2)});
    }
    g.q_exact_tag = n <= 6 ? "zn" : "znzero";
    g.q_exact_params = {n};
    return g;
}

inline void attach_pairing(GroupProfile& g, const KVector& omega) {
    g.pairing = pairing_gram(omega);
    g.pairing_bounds = analyze_pairing(*g.pairing, g.alpha_kind == AlphaKind::multiple ? g.multiple_prime : 0);
}

inline std::int64_t smallest_prime_factor(std::int64_t k) {
    for (std::int64_t q = 2; q * q <= k; ++q)
        if (k % q == 0) return q;
    return k;
}

inline GroupProfile z4_class_profile(std::int64_t k) {
    k = std::abs(k);
    GroupProfile g = torus_base(4);
    g.name = "Z^4, class " + std::to_string(k) + "[T]";
    g.alpha_kind = k == 0 ? AlphaKind::zero : k == 1 ? AlphaKind::primitive : AlphaKind::multiple;
    if (k > 1) g.multiple_prime = smallest_prime_factor(k);
    attach_pairing(g, KVector::scalar(4, k));
    g.realized = {realized_from_recipe(k == 0 ? "z4_0" : k == 1 ? "z4_T" : "z4_kT")};
    g.q_exact_tag = "z4";
    g.q_exact_params = {k};
    return g;
}

inline GroupProfile z5_class_profile(std::int64_t k) {
    k = std::abs(k);
    GroupProfile g = torus_base(5);
    g.name = "Z^5, class " + std::to_string(k) + " x1";
    g.alpha_kind = k == 0 ? AlphaKind::zero : k == 1 ? AlphaKind::primitive : AlphaKind::multiple;
    if (k > 1) g.multiple_prime = smallest_prime_factor(k);
    attach_pairing(g, KVector::monomial(5, {1}, k));
    g.realized = {realized_from_recipe(k == 0 ? "z5_k0" : k == 1 ? "z5_k1" : "z5_kbig")};
    g.q_exact_tag = "z5";
    g.q_exact_params = {k};
    return g;
}

inline GroupProfile z6_class_profile(const Integer& a0, const Integer& b0, const Integer& c0) {
    NormalTriple t = normal_form_6(canonical_omega6(a0, b0, c0));
    const std::int64_t a = to_i64(t.a), b = to_i64(t.b), c = to_i64(t.c);
    GroupProfile g = torus_base(6);
    g.name = "Z^6, class (" + std::to_string(a) + "," + std::to_string(b) + "," + std::to_string(c) + ")";
    g.symmetric = c == 0;
    if (a == 0) g.alpha_kind = AlphaKind::zero;
    else if (a > 1) g.alpha_kind = AlphaKind::multiple, g.multiple_prime = smallest_prime_factor(a);
    else g.alpha_kind = AlphaKind::primitive;
    attach_pairing(g, canonical_omega6(t.a, t.b, t.c));
    std::vector<RealizedPoint> pts;
    const std::int64_t cc = std::abs(c);
    if (a != 1) pts = {realized_from_recipe("z6_general")};
    else if (b == 0) pts = {realized_from_recipe("z6_100")};
    else if (b != 1) pts = {realized_from_recipe("z6_c1")};
    else if (cc == 0) pts = {realized_from_recipe("z6_ab1")};
    else if (cc != 1) pts = {realized_from_recipe("z6_ab1")};
    else pts = {realized_from_recipe("z6_abc1"), realized_from_recipe("s6")};
    g.realized = c < 0 ? mirrored(pts) : pts;
    g.q_exact_tag = "z6";
    g.q_exact_params = {a, b, c};
    return g;
}

inline std::vector<std::int64_t> parse_int_list(const std::string& s, const std::string& what) {
    std::vector<std::int64_t> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        tok = detail::trim(tok);
        std::size_t used = 0;
        try {
            out.push_back(std::stoll(tok, &used));
        } catch (const std::exception&) {
            used = std::string::npos;
        }
        if (used != tok.size()) throw DomainError(what + ": bad integer '" + tok + "'");
    }
    return out;
}

inline GroupProfile builtin_profile(const std::string& spec) {
    auto sep = spec.find_first_of(":=");
    const std::string head = spec.substr(0, sep);
    const std::vector<std::int64_t> args = sep == std::string::npos ? std::vector<std::int64_t>{} : parse_int_list(spec.substr(sep + 1), spec);
    auto want = [&](std::size_t n) {
        if (args.size() != n) throw DomainError("profile " + head + " takes " + std::to_string(n) + " parameter(s)");
    };
    if (head == "trivial") {
        want(0);
        GroupProfile g = torus_group_profile(0);
        g.name = "trivial";
        g.q_exact_tag = "trivial";
        g.q_exact_params = {};
        return g;
    }
    if (head == "free") {
        want(1);
        const std::int64_t n = args[0];
        if (n < 0) throw DomainError("free group rank must be nonnegative");
        GroupProfile g;
        g.name = "F_" + std::to_string(n);
        g.beta1 = n;
        g.alpha_kind = AlphaKind::zero;
        g.l2_b1_vanishes = n <= 1;
        g.symmetric = true;
        g.realized = {n == 0 ? realized_from_recipe("trivial")
                             : RealizedPoint{{0, 2 - 2 * n}, std::to_string(n) + " x S1xS3"}};
        g.q_exact_tag = "free";
        g.q_exact_params = {n};
        return g;
    }
    if (head == "surface") {
        want(1);
        const std::int64_t genus = args[0];
        if (genus < 1) throw DomainError("surface genus must be positive");
        GroupProfile g;
        g.name = "surface genus " + std::to_string(genus);
        g.beta1 = 2 * genus;
        g.beta2 = 1;
        g.alpha_kind = AlphaKind::zero;
        g.l2_b1_vanishes = genus == 1;
        g.symmetric = true;
        g.realized = {realized_from_block("FgxS2:" + std::to_string(genus))};
        g.q_exact_tag = "surface";
        g.q_exact_params = {genus};
        return g;
    }
    if (head == "knot") {
        want(0);
        GroupProfile g;
        g.name = "knot group";
        g.beta1 = 1;
        g.deficiency = 1;
        g.alpha_kind = AlphaKind::zero;
        g.l2_b1_vanishes = true;
        g.symmetric = true;
        g.q_exact_tag = "knot";
        return g;
    }
    if (head == "z4_k") return want(1), z4_class_profile(args[0]);
    if (head == "z5_k") return want(1), z5_class_profile(args[0]);
    if (head == "z6_abc") return want(3), z6_class_profile(args[0], args[1], args[2]);
    if (head.size() > 1 && head[0] == 'z' && std::all_of(head.begin() + 1, head.end(), [](char ch) { return ch >= '0' && ch <= '9'; })) {
        want(0);
        return torus_group_profile(std::stoll(head.substr(1)));
    }
    throw DomainError("unknown builtin profile '" + spec + "'");
}

inline bool parse_bool(const std::string& v, std::size_t line) {
    if (v == "true" || v == "yes" || v == "1") return true;
    if (v == "false" || v == "no" || v == "0") return false;
    throw ParseError(line, "expected a boolean, got '" + v + "'");
}

inline std::int64_t parse_i64(const std::string& v, std::size_t line) {
    std::size_t used = 0;
    std::int64_t out = 0;
    try {
        out = std::stoll(v, &used);
    } catch (const std::exception&) {
        used = std::string::npos;
    }
    if (used != v.size()) throw ParseError(line, "expected an integer, got '" + v + "'");
    return out;
}

// key=value lines; `base` starts from a builtin profile, repeatable keys: modp, omega_term, realized, recipe, block.
inline GroupProfile read_profile(std::istream& is) {
    GroupProfile g;
    std::string line;
    std::size_t lineno = 0;
    std::vector<std::pair<std::vector<unsigned>, Integer>> omega_terms;
    std::optional<std::size_t> omega_line;
    bool any_key = false;
    while (std::getline(is, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) throw ParseError(lineno, "expected key=value");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        const bool first_key = !any_key;
        any_key = true;
        try {
            if (key == "base") {
                if (!first_key) throw ParseError(lineno, "base must come before every other key");
                g = builtin_profile(value);
            } else if (key == "name") {
                g.name = value;
            } else if (key == "beta1") {
                g.beta1 = parse_i64(value, lineno);
            } else if (key == "beta2") {
                g.beta2 = parse_i64(value, lineno);
            } else if (key == "deficiency") {
                g.deficiency = parse_i64(value, lineno);
            } else if (key == "l2_b1_vanishes") {
                g.l2_b1_vanishes = parse_bool(value, lineno);
            } else if (key == "symmetric") {
                g.symmetric = parse_bool(value, lineno);
            } else if (key == "alpha_kind") {
                auto colon = value.find(':');
                std::string kind = value.substr(0, colon);
                g.multiple_prime = 0;
                if (kind == "zero") g.alpha_kind = AlphaKind::zero;
                else if (kind == "torsion") g.alpha_kind = AlphaKind::torsion;
                else if (kind == "primitive") g.alpha_kind = AlphaKind::primitive;
                else if (kind == "general") g.alpha_kind = AlphaKind::general;
                else if (kind == "multiple") {
                    if (colon == std::string::npos) throw ParseError(lineno, "multiple needs a prime: multiple:p");
                    g.alpha_kind = AlphaKind::multiple;
                    g.multiple_prime = parse_i64(value.substr(colon + 1), lineno);
                } else throw ParseError(lineno, "unknown alpha kind '" + kind + "'");
            } else if (key == "torus_rank") {
                g.torus_rank = parse_i64(value, lineno);
            } else if (key == "isotropic_dim") {
                g.isotropic_dim = parse_i64(value, lineno);
            } else if (key == "modp") {
                std::stringstream ss(value);
                std::string p, h1, h2;
                if (!std::getline(ss, p, ':') || !std::getline(ss, h1, ':') || !std::getline(ss, h2))
                    throw ParseError(lineno, "modp expects p:h1:h2");
                g.modp_dims[parse_i64(p, lineno)] = {parse_i64(h1, lineno), parse_i64(h2, lineno)};
            } else if (key == "omega_term") {
                auto colon = value.find(':');
                if (colon == std::string::npos) throw ParseError(lineno, "omega_term expects 'i1 ... ik : coeff'");
                std::istringstream idx(value.substr(0, colon));
                std::vector<unsigned> ids;
                std::string tok;
                while (idx >> tok) ids.push_back(static_cast<unsigned>(parse_i64(tok, lineno)));
                omega_terms.emplace_back(ids, detail::parse_integer(detail::trim(value.substr(colon + 1)), lineno));
                omega_line = lineno;
            } else if (key == "realized") {
                std::vector<std::string> parts;
                std::stringstream ss(value);
                std::string tok;
                while (parts.size() < 2 && std::getline(ss, tok, ',')) parts.push_back(detail::trim(tok));
                if (parts.size() != 2) throw ParseError(lineno, "realized expects sigma,chi[,witness]");
                std::string rest;
                std::getline(ss, rest, '\0');
                rest = detail::trim(rest);
                g.realized.push_back({{parse_i64(parts[0], lineno), parse_i64(parts[1], lineno)}, rest.empty() ? "profile point" : rest});
            } else if (key == "recipe") {
                g.realized.push_back(realized_from_recipe(value));
            } else if (key == "block") {
                g.realized.push_back(realized_from_block(value));
            } else if (key == "q_exact") {
                auto colon = value.find(':');
                g.q_exact_tag = value.substr(0, colon);
                g.q_exact_params = colon == std::string::npos ? std::vector<std::int64_t>{} : parse_int_list(value.substr(colon + 1), "q_exact");
            } else {
                throw ParseError(lineno, "unknown profile key '" + key + "'");
            }
        } catch (const ParseError&) {
            throw;
        } catch (const DomainError& e) {
            throw ParseError(lineno, e.what());
        }
    }
    if (!omega_terms.empty()) {
        if (!g.torus_rank) throw ParseError(*omega_line, "omega_term needs torus_rank");
        const auto n = static_cast<unsigned>(*g.torus_rank);
        if (n < 4 || n > kMaxRank) throw ParseError(*omega_line, "omega needs torus rank in [4, " + std::to_string(kMaxRank) + "]");
        KVector omega(n, n - 4);
        try {
            for (const auto& [ids, c] : omega_terms) {
                if (ids.size() != n - 4) throw DomainError("omega_term must have n-4 indices");
                omega.add_term(MultiIndex(n, ids), c);
            }
        } catch (const DomainError& e) {
            throw ParseError(*omega_line, e.what());
        }
        attach_pairing(g, omega);
    } else if (g.pairing && g.pairing_bounds) {
        g.pairing_bounds = analyze_pairing(*g.pairing, g.alpha_kind == AlphaKind::multiple ? g.multiple_prime : 0);
    }
    if (g.name.empty()) g.name = "profile";
    check_profile(g);
    return g;
}

inline GroupProfile parse_profile(const std::string& text) {
    std::istringstream is(text);
    return read_profile(is);
}

inline const char* qfunction_tsv_header() { return "sigma\tlower\tupper\tstatus\tactive_rule\twitness"; }

inline void write_qfunction(std::ostream& os, const QFunction& qf) {
    os << qfunction_tsv_header() << '\n';
    for (const auto& r : qf.rows)
        os << r.sigma << '\t' << r.lower << '\t' << (r.upper ? std::to_string(*r.upper) : std::string("inf")) << '\t'
           << to_string(r.status) << '\t' << r.active_rule << '\t' << (r.witness.empty() ? "-" : r.witness) << '\n';
}

}  // namespace geo4
