#pragma once

#include "integer.hpp"

#include <algorithm>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

namespace geo4 {

// (beta1, chi, sigma) bookkeeping for a closed oriented 4-manifold; beta2 = chi - 2 + 2 beta1.
struct Block {
    std::string name;
    std::int64_t beta1 = 0;
    std::int64_t chi = 0;
    std::int64_t sigma = 0;

    std::int64_t beta2() const noexcept { return chi - 2 + 2 * beta1; }
    friend bool operator==(const Block& a, const Block& b) {
        return a.beta1 == b.beta1 && a.chi == b.chi && a.sigma == b.sigma;
    }
};

inline void check_block(const Block& b) {
    if (b.beta1 < 0) throw DomainError(b.name + ": first Betti number driven negative");
    if (b.beta2() < 0) throw DomainError(b.name + ": negative second Betti number");
    if ((b.chi - b.sigma) % 2 != 0) throw InconsistencyError(b.name + ": chi and sigma have different parity");
}

inline std::string to_string(const Block& b) {
    std::ostringstream os;
    os << "beta1=" << b.beta1 << " beta2=" << b.beta2() << " chi=" << b.chi << " sigma=" << b.sigma;
    return os.str();
}

// Sym^2 of the genus-k surface: fundamental group Z^{2k}.
inline Block sym_product(std::int64_t k, bool reversed = false) {
    if (k < 1) throw DomainError("symmetric product needs genus >= 1, got " + std::to_string(k));
    Block b{(reversed ? "-sym2:" : "sym2:") + std::to_string(k), 2 * k, 2 * k * k - 5 * k + 3, 1 - k};
    if (reversed) b.sigma = -b.sigma;
    check_block(b);
    return b;
}

// Signature-zero realizers of the minimal Euler characteristic for Z^n.
inline Block minimal_torus_group_block(std::int64_t n) {
    if (n < 0) throw DomainError("rank must be nonnegative");
    std::int64_t c2 = n * (n - 1) / 2;
    std::int64_t chi = 2 - 2 * n + c2 + (c2 % 2);
    if (n == 3) chi = 2;
    if (n == 5) chi = 6;
    Block b{"kl:" + std::to_string(n), n, chi, 0};
    check_block(b);
    return b;
}

namespace detail {

inline std::vector<std::int64_t> parse_params(const std::string& s, const std::string& name) {
    std::vector<std::int64_t> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stoll(tok, &used));
            if (used != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw DomainError("block " + name + ": bad parameter '" + tok + "'");
        }
    }
    return out;
}

}  // namespace detail

// Named building blocks; parameters follow a colon, comma-separated.
inline Block block_by_name(const std::string& spec) {
    auto colon = spec.find(':');
    std::string name = spec.substr(0, colon);
    std::vector<std::int64_t> args = colon == std::string::npos ? std::vector<std::int64_t>{} : detail::parse_params(spec.substr(colon + 1), name);
    auto want = [&](std::size_t count) {
        if (args.size() != count)
            throw DomainError("block " + name + " takes " + std::to_string(count) + " parameter(s), got " + std::to_string(args.size()));
    };
    Block b{spec};
    if (name == "S4") want(0), b.chi = 2;
    else if (name == "CP2") want(0), b.chi = 3, b.sigma = 1;
    else if (name == "-CP2") want(0), b.chi = 3, b.sigma = -1;
    else if (name == "S2xS2") want(0), b.chi = 4;
    else if (name == "S1xS3") want(0), b.beta1 = 1;
    else if (name == "T2xS2") want(0), b.beta1 = 2;
    else if (name == "T4") want(0), b.beta1 = 4;
    else if (name == "FgxFh") {
        want(2);
        if (args[0] < 0 || args[1] < 0) throw DomainError("genus must be nonnegative");
        b.beta1 = 2 * args[0] + 2 * args[1];
        b.chi = (2 - 2 * args[0]) * (2 - 2 * args[1]);
    } else if (name == "FgxS2") {
        want(1);
        if (args[0] < 0) throw DomainError("genus must be nonnegative");
        b.beta1 = 2 * args[0];
        b.chi = 2 * (2 - 2 * args[0]);
    } else if (name == "sym2" || name == "-sym2") {
        want(1);
        Block s = sym_product(args[0], name == "-sym2");
        s.name = spec;
        return s;
    } else if (name == "kl") {
        want(1);
        Block s = minimal_torus_group_block(args[0]);
        s.name = spec;
        return s;
    } else if (name == "N3xS1") {
        // N x S^1 for a closed 3-manifold N with first Betti number h
        want(1);
        if (args[0] < 0) throw DomainError("Betti number must be nonnegative");
        b.beta1 = args[0] + 1;
    } else if (name == "pdouble") {
        // boundary of (2-handlebody of a presentation) x I
        want(2);
        if (args[0] < 0) throw DomainError("Betti number must be nonnegative");
        b.beta1 = args[0];
        b.chi = 2 - 2 * args[1];
    } else if (name == "custom") {
        want(3);
        b.beta1 = args[0];
        b.chi = args[1];
        b.sigma = args[2];
    } else {
        throw DomainError("unknown block '" + name + "'");
    }
    check_block(b);
    return b;
}

inline Block connected_sum(const std::vector<Block>& parts) {
    if (parts.empty()) throw DomainError("connected sum of nothing");
    Block out{"sum", 0, 0, 0};
    for (const auto& p : parts) {
        out.beta1 += p.beta1;
        out.chi += p.chi;
        out.sigma += p.sigma;
    }
    out.chi -= 2 * static_cast<std::int64_t>(parts.size() - 1);
    check_block(out);
    return out;
}

// Surgery on a circle representing a generator: the generator dies, beta2 is unchanged.
inline Block kill_generator(Block b, std::int64_t count = 1) {
    b.beta1 -= count;
    b.chi += 2 * count;
    check_block(b);
    return b;
}

// Surgery on a null-homologous circle (a commutator): beta1 is unchanged, beta2 grows by 2.
inline Block kill_commutator(Block b, std::int64_t count = 1) {
    b.chi += 2 * count;
    check_block(b);
    return b;
}

inline Block add_cp2(Block b, int sign, std::int64_t count = 1) {
    b.chi += count;
    b.sigma += sign * count;
    check_block(b);
    return b;
}

inline Block add_s2xs2(Block b, std::int64_t count = 1) {
    b.chi += 2 * count;
    check_block(b);
    return b;
}

struct Recipe {
    struct PushBlock {
        std::string name;
        std::int64_t count = 1;
    };
    struct Sum {};
    struct KillGenerator {
        std::int64_t count;
    };
    struct KillCommutator {
        std::int64_t count;
    };
    struct AddCP2 {
        int sign;
        std::int64_t count;
    };
    struct AddS2xS2 {
        std::int64_t count;
    };
    using Step = std::variant<PushBlock, Sum, KillGenerator, KillCommutator, AddCP2, AddS2xS2>;

    std::vector<Step> steps;
    std::string citation;
};

// Steps act on a stack of blocks: `block` pushes, `sum` replaces the stack by its connected sum,
// the remaining steps modify the single block on the stack.
inline Block evaluate(const Recipe& r) {
    if (r.steps.empty()) throw DomainError("empty recipe");
    if (!std::holds_alternative<Recipe::PushBlock>(r.steps.front())) throw DomainError("recipe must start with a block");
    std::vector<Block> stack;
    auto single = [&](const char* what) -> Block& {
        if (stack.size() != 1)
            throw DomainError(std::string(what) + " needs exactly one block on the stack (use 'sum'), found " + std::to_string(stack.size()));
        return stack.front();
    };
    for (const auto& step : r.steps) {
        std::visit(
            [&](const auto& s) {
                using S = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<S, Recipe::PushBlock>) {
                    Block b = block_by_name(s.name);
                    for (std::int64_t i = 0; i < s.count; ++i) stack.push_back(b);
                } else if constexpr (std::is_same_v<S, Recipe::Sum>) {
                    Block b = connected_sum(stack);
                    stack.assign(1, b);
                } else if constexpr (std::is_same_v<S, Recipe::KillGenerator>) {
                    Block& b = single("kill-gen");
                    b = kill_generator(b, s.count);
                } else if constexpr (std::is_same_v<S, Recipe::KillCommutator>) {
                    Block& b = single("kill-comm");
                    b = kill_commutator(b, s.count);
                } else if constexpr (std::is_same_v<S, Recipe::AddCP2>) {
                    Block& b = single("cp2");
                    b = add_cp2(b, s.sign, s.count);
                } else {
                    Block& b = single("s2xs2");
                    b = add_s2xs2(b, s.count);
                }
            },
            step);
    }
    Block out = single("result");
    out.name = "recipe";
    return out;
}

inline Recipe read_recipe(std::istream& is) {
    Recipe r;
    std::string line;
    std::size_t lineno = 0;
    auto count_arg = [&](std::istringstream& ls, bool required) -> std::int64_t {
        std::string tok;
        if (!(ls >> tok)) {
            if (required) throw ParseError(lineno, "missing count");
            return 1;
        }
        std::size_t used = 0;
        std::int64_t v = 0;
        try {
            v = std::stoll(tok, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != tok.size() || v < 0) throw ParseError(lineno, "expected a nonnegative count, got '" + tok + "'");
        return v;
    };
    while (std::getline(is, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string op;
        if (!(ls >> op)) continue;
        if (op == "block") {
            std::string name;
            if (!(ls >> name)) throw ParseError(lineno, "block needs a name");
            r.steps.push_back(Recipe::PushBlock{name, count_arg(ls, false)});
        } else if (op == "sum") {
            r.steps.push_back(Recipe::Sum{});
        } else if (op == "kill-gen") {
            r.steps.push_back(Recipe::KillGenerator{count_arg(ls, true)});
        } else if (op == "kill-comm") {
            r.steps.push_back(Recipe::KillCommutator{count_arg(ls, true)});
        } else if (op == "cp2") {
            std::string sign;
            if (!(ls >> sign) || (sign != "+" && sign != "-")) throw ParseError(lineno, "cp2 needs a sign '+' or '-'");
            r.steps.push_back(Recipe::AddCP2{sign == "+" ? 1 : -1, count_arg(ls, true)});
        } else if (op == "s2xs2") {
            r.steps.push_back(Recipe::AddS2xS2{count_arg(ls, true)});
        } else {
            throw ParseError(lineno, "unknown recipe step '" + op + "'");
        }
        std::string extra;
        if (ls >> extra) throw ParseError(lineno, "unexpected token '" + extra + "'");
    }
    if (r.steps.empty()) throw ParseError(lineno + 1, "empty recipe");
    return r;
}

inline Recipe parse_recipe(const std::string& text, std::string citation = {}) {
    std::istringstream is(text);
    Recipe r = read_recipe(is);
    r.citation = std::move(citation);
    return r;
}

// Transcribed constructions. Each starts from a connected sum and records its surgeries by kind.
struct NamedRecipe {
    std::string key;
    std::string text;
    std::string citation;
    std::int64_t sigma, chi;  // expected result
};

inline const std::vector<NamedRecipe>& named_recipes() {
    static const std::vector<NamedRecipe> table = {
        {"trivial", "block S4\n", "4-sphere", 0, 2},
        {"z1", "block S1xS3\n", "S1 x S3", 0, 0},
        {"z2", "block T2xS2\n", "T2 x S2", 0, 0},
        {"z3", "block T4\nkill-gen 1\n", "surgery on a T4 generator", 0, 2},
        {"z4_T", "block T4\n", "4-torus", 0, 0},
        {"z4_kT", "block T4\nblock S1xS3\nsum\nkill-gen 1\nkill-comm 3\n", "T4 # S1xS3 with 4 surgeries, class k[T]", 0, 6},
        {"z4_0", "block T4\nblock S1xS3\nsum\nkill-gen 1\nkill-comm 3\n", "T4 # S1xS3 with 4 surgeries, class 0", 0, 6},
        {"z5_k0", "block T4\nblock T2xS2\nsum\nkill-gen 1\nkill-comm 6\n", "T4 # T2xS2 with 7 surgeries, k = 0", 0, 12},
        {"z5_k1", "block T4\nblock T2xS2\nsum\nkill-gen 1\nkill-comm 3\n", "T4 # T2xS2 with 4 surgeries, k = 1", 0, 6},
        {"z5_kbig", "block T4\nblock T2xS2\nsum\nkill-gen 1\nkill-comm 6\n", "T4 # T2xS2 with 7 surgeries, k > 1", 0, 12},
        {"z6_general", "block FgxFh:2,1\nblock T4\nsum\nkill-gen 4\nkill-comm 7\n", "(F2 x F1) # T4 with 4 + 7 surgeries", 0, 20},
        {"z6_c1", "block FgxFh:2,1\nblock T4\nsum\nkill-gen 4\nkill-comm 4\n", "(F2 x F1) # T4 with 4 + 4 surgeries, c = 1", 0, 14},
        {"z6_ab1", "block FgxFh:2,1\nblock T4\nsum\nkill-gen 4\nkill-comm 2\n", "(F2 x F1) # T4 with 4 + 2 surgeries, a = b = 1", 0, 10},
        {"z6_abc1", "block FgxFh:2,1\nblock T4\nsum\nkill-gen 4\n", "(F2 x F1) # T4 with 4 surgeries, a = b = c = 1", 0, 6},
        {"z6_100", "block T4\nblock S1xS3 2\nsum\nkill-comm 9\n", "T4 # 2(S1 x S3) with 9 surgeries, class x1x2", 0, 14},
        {"s6", "block sym2:3\n", "symmetric product S6", -2, 6},
        {"z156_kl", "block kl:156\n", "minimal Euler characteristic realizer for Z^156", 0, 11780},
        {"z156_sym", "block -sym2:78\n", "reversed symmetric product S156", 77, 11781},
    };
    return table;
}

inline const NamedRecipe& named_recipe(const std::string& key) {
    for (const auto& r : named_recipes())
        if (r.key == key) return r;
    throw DomainError("unknown recipe '" + key + "'");
}

inline Block evaluate_named(const std::string& key) {
    const auto& nr = named_recipe(key);
    return evaluate(parse_recipe(nr.text, nr.citation));
}

// Finite projective spaces P^k over a field with p elements.
struct ProjectiveCounts {
    Integer points, lines;
    friend bool operator==(const ProjectiveCounts&, const ProjectiveCounts&) = default;
};

inline bool is_prime_power(std::int64_t p) {
    if (p < 2) return false;
    std::int64_t q = 2;
    while (q * q <= p && p % q != 0) ++q;
    if (p % q != 0) return true;
    while (p % q == 0) p /= q;
    return p == 1;
}

inline ProjectiveCounts projective_counts(std::int64_t p, std::int64_t k) {
    if (!is_prime_power(p)) throw DomainError(std::to_string(p) + " is not a prime power");
    if (k < 1) throw DomainError("projective dimension must be at least 1");
    Integer P = p;
    Integer pk1 = boost::multiprecision::pow(P, static_cast<unsigned>(k + 1)) - 1;
    Integer pk = boost::multiprecision::pow(P, static_cast<unsigned>(k)) - 1;
    Integer n = pk1 / (P - 1);
    Integer num = pk1 * pk, den = (P + 1) * (P - 1) * (P - 1);
    if (pk1 % (P - 1) != 0 || num % den != 0) throw InconsistencyError("projective counts are not integral");
    return {n, num / den};
}

// Points of P^k(F_p) as normalized coordinate vectors and lines as sorted point-index sets; p prime.
struct ProjectiveSpace {
    std::vector<std::vector<std::int64_t>> points;
    std::vector<std::vector<std::size_t>> lines;
};

inline ProjectiveSpace enumerate_projective_space(std::int64_t p, std::int64_t k) {
    if (!modarith::is_prime(static_cast<std::uint64_t>(p))) throw DomainError("enumeration needs a prime field");
    if (k < 1) throw DomainError("projective dimension must be at least 1");
    const std::size_t dim = static_cast<std::size_t>(k + 1);
    ProjectiveSpace ps;
    std::map<std::vector<std::int64_t>, std::size_t> index;
    // Normalized: first nonzero coordinate equals 1.
    std::vector<std::int64_t> v(dim, 0);
    std::int64_t total = 1;
    for (std::size_t i = 0; i < dim; ++i) total *= p;
    for (std::int64_t code = 1; code < total; ++code) {
        std::int64_t c = code;
        for (std::size_t i = 0; i < dim; ++i) {
            v[dim - 1 - i] = c % p;
            c /= p;
        }
        auto first = std::find_if(v.begin(), v.end(), [](std::int64_t x) { return x != 0; });
        if (*first != 1) continue;
        index[v] = ps.points.size();
        ps.points.push_back(v);
    }
    auto normalize = [&](std::vector<std::int64_t> w) {
        auto first = std::find_if(w.begin(), w.end(), [](std::int64_t x) { return x != 0; });
        std::int64_t inv = static_cast<std::int64_t>(modarith::inverse(static_cast<std::uint64_t>(*first), static_cast<std::uint64_t>(p)));
        for (auto& x : w) x = x * inv % p;
        return w;
    };
    std::set<std::vector<std::size_t>> lines;
    for (std::size_t a = 0; a < ps.points.size(); ++a)
        for (std::size_t b = a + 1; b < ps.points.size(); ++b) {
            std::vector<std::size_t> line{a, b};
            for (std::int64_t t = 1; t < p; ++t) {
                std::vector<std::int64_t> w(dim);
                for (std::size_t i = 0; i < dim; ++i) w[i] = (ps.points[a][i] + t * ps.points[b][i]) % p;
                line.push_back(index.at(normalize(w)));
            }
            std::sort(line.begin(), line.end());
            if (line.front() == a) lines.insert(line);
        }
    ps.lines.assign(lines.begin(), lines.end());
    return ps;
}

struct ProjectivePlan {
    std::int64_t p;
    std::int64_t k;
    Block x;  // fundamental group Z^{p+1}
};

inline void check_plan(const ProjectivePlan& plan) {
    if (!is_prime_power(plan.p)) throw DomainError(std::to_string(plan.p) + " is not a prime power");
    if (plan.k < 1) throw DomainError("projective dimension must be at least 1");
    if (plan.x.beta1 != plan.p + 1)
        throw DomainError("block must have first Betti number p+1 = " + std::to_string(plan.p + 1) + ", got " + std::to_string(plan.x.beta1));
}

// Closed form: beta1 = n, beta2 = L beta2(X), sigma = L sigma(X).
inline Block projective_construction_formula(const ProjectivePlan& plan) {
    check_plan(plan);
    auto [n, L] = projective_counts(plan.p, plan.k);
    const auto nn = to_i64(n), ll = to_i64(L);
    Block w{"projective", nn, 2 - 2 * nn + ll * plan.x.beta2(), ll * plan.x.sigma};
    check_block(w);
    return w;
}

// Replay: one copy of X per line, connected sum, then one generator-identifying surgery for every
// repeated occurrence of a point. Uses the enumerated incidence structure for prime p.
inline Block projective_construction_replay(const ProjectivePlan& plan) {
    check_plan(plan);
    ProjectiveSpace ps = enumerate_projective_space(plan.p, plan.k);
    std::vector<Block> copies(ps.lines.size(), plan.x);
    Block y = connected_sum(copies);
    std::vector<std::int64_t> occurrences(ps.points.size(), 0);
    for (const auto& line : ps.lines) {
        if (static_cast<std::int64_t>(line.size()) != plan.p + 1) throw InconsistencyError("line with the wrong number of points");
        for (auto pt : line) ++occurrences[pt];
    }
    std::int64_t identifications = 0;
    for (auto c : occurrences) {
        if (c == 0) throw InconsistencyError("point on no line");
        identifications += c - 1;
    }
    Block w = kill_generator(y, identifications);
    if (w.beta1 != static_cast<std::int64_t>(ps.points.size())) throw InconsistencyError("replay left the wrong number of generators");
    w.name = "projective";
    return w;
}

inline Block projective_construction(const ProjectivePlan& plan) {
    Block formula = projective_construction_formula(plan);
    if (modarith::is_prime(static_cast<std::uint64_t>(plan.p))) {
        Block replay = projective_construction_replay(plan);
        if (!(replay == formula))
            throw InconsistencyError("surgery replay " + to_string(replay) + " disagrees with the formula " + to_string(formula));
    }
    return formula;
}

// Asymptotic (beta2(W) - sigma(W)) / n^2 for X = -S_{p+1}.
inline Rational p_ratio_bound(std::int64_t p) {
    if (!modarith::is_prime(static_cast<std::uint64_t>(p))) throw DomainError(std::to_string(p) + " is not prime");
    Integer P = p;
    return Rational(P * P + 3, 2 * (P * P + P));
}

struct RatioMinimum {
    std::int64_t prime;
    Rational value;
};

inline RatioMinimum minimize_p_ratio(std::int64_t bound) {
    std::optional<RatioMinimum> best;
    for (std::int64_t p = 2; p <= bound; ++p) {
        if (!modarith::is_prime(static_cast<std::uint64_t>(p))) continue;
        Rational r = p_ratio_bound(p);
        if (!best || r < best->value) best = RatioMinimum{p, r};
    }
    if (!best) throw DomainError("no prime up to " + std::to_string(bound));
    return *best;
}


}  // namespace geo4
