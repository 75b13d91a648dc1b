#include "geo4/geography.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace geo4;

namespace {

constexpr std::int64_t kWindow = 24;

const std::vector<std::string>& builtins() {
    static const std::vector<std::string> names = {
        "trivial", "free:0", "free:1",  "free:3",  "surface:1", "surface:2", "knot",      "z1",          "z2",
        "z3",      "z4",     "z5",      "z6",      "z7",        "z8",        "z4_k=0",    "z4_k=1",      "z4_k=2",
        "z4_k=6",  "z5_k=0", "z5_k=1",  "z5_k=3",  "z6_abc=0,0,0", "z6_abc=1,0,0", "z6_abc=1,1,0", "z6_abc=1,1,1",
        "z6_abc=1,2,4", "z6_abc=2,2,0"};
    return names;
}

std::string exact_profile(const QFunction& qf, std::int64_t offset) {
    for (const auto& r : qf.rows) {
        std::int64_t want = std::abs(r.sigma) + offset;
        if (!r.exact() || r.lower != want) return "sigma " + std::to_string(r.sigma) + ": " + to_string(r.range());
    }
    return {};
}

}  // namespace

TEST(GeographyTables, ClosedForms) {
    EXPECT_EQ(exact_profile(resolve(builtin_profile("trivial"), 16), 2), "");
    EXPECT_EQ(exact_profile(resolve(builtin_profile("z1"), 16), 0), "");
    EXPECT_EQ(exact_profile(resolve(builtin_profile("z2"), 16), 0), "");
    EXPECT_EQ(exact_profile(resolve(builtin_profile("z3"), 16), 2), "");
    EXPECT_EQ(exact_profile(resolve(builtin_profile("z4"), 16), 0), "");
    EXPECT_EQ(exact_profile(resolve(builtin_profile("z5"), 16), 6), "");
    EXPECT_EQ(exact_profile(resolve(builtin_profile("z5_k=0"), 16), 12), "");
    EXPECT_EQ(exact_profile(resolve(builtin_profile("z6_abc=0,0,0"), 16), 20), "");
    EXPECT_EQ(exact_profile(resolve(builtin_profile("z6_abc=1,0,0"), 16), 14), "");
    EXPECT_EQ(exact_profile(resolve(builtin_profile("z6_abc=1,1,0"), 16), 10), "");
}

TEST(GeographyTables, TorusOfRankSix) {
    QFunction qf = resolve(builtin_profile("z6"), 16);
    EXPECT_EQ(qf.at(0).range(), (Range{6, 6}));
    EXPECT_EQ(qf.at(1).range(), (Range{7, 7}));
    EXPECT_EQ(qf.at(-1).range(), (Range{7, 7}));
    for (std::int64_t s = 2; s <= 16; ++s) {
        EXPECT_EQ(qf.at(s).range(), (Range{s + 4, s + 4}));
        EXPECT_EQ(qf.at(-s).range(), (Range{s + 4, s + 4}));
    }
}

TEST(GeographyTables, OpenSpotsAreIntervals) {
    QFunction z4 = resolve(builtin_profile("z4_k=2"), 16);
    for (std::int64_t s = 2; s <= 16; s += 2) EXPECT_FALSE(z4.at(s).exact()) << s;
    QFunction z5 = resolve(builtin_profile("z5_k=2"), 16);
    EXPECT_TRUE(z5.at(0).exact());
    for (std::int64_t s = 2; s <= 16; ++s) EXPECT_FALSE(z5.at(s).exact()) << s;
}

TEST(GeographyProperties, ExactValuesHaveSignatureParity) {
    for (const auto& name : builtins()) {
        QFunction qf = resolve(builtin_profile(name), kWindow);
        for (const auto& r : qf.rows) {
            EXPECT_EQ(((r.lower - r.sigma) % 2 + 2) % 2, 0) << name << " sigma " << r.sigma;
            if (r.upper) { EXPECT_EQ(((*r.upper - r.sigma) % 2 + 2) % 2, 0) << name << " sigma " << r.sigma; }
        }
    }
}

TEST(GeographyProperties, UnitStepsAcrossExactStretches) {
    for (const auto& name : builtins()) {
        QFunction qf = resolve(builtin_profile(name), kWindow);
        for (std::size_t i = 1; i < qf.rows.size(); ++i) {
            const auto &a = qf.rows[i - 1], &b = qf.rows[i];
            if (a.exact() && b.exact()) { EXPECT_EQ(std::abs(b.lower - a.lower), 1) << name << " at sigma " << b.sigma; }
        }
    }
}

TEST(GeographyProperties, SymmetricProfilesAreReflectionInvariant) {
    for (const auto& name : builtins()) {
        GroupProfile g = builtin_profile(name);
        if (!g.symmetric) continue;
        QFunction qf = resolve(g, kWindow);
        for (std::int64_t s = 1; s <= kWindow; ++s) EXPECT_EQ(qf.at(s).range(), qf.at(-s).range()) << name << " sigma " << s;
    }
}

TEST(GeographyProperties, MirrorIsAnInvolutionAndReflects) {
    for (const auto& name : builtins()) {
        QFunction qf = resolve(builtin_profile(name), kWindow);
        QFunction m = mirror(qf);
        for (std::int64_t s = -kWindow; s <= kWindow; ++s) ASSERT_EQ(m.at(s).range(), qf.at(-s).range());
        QFunction mm = mirror(m);
        for (std::int64_t s = -kWindow; s <= kWindow; ++s) ASSERT_EQ(mm.at(s).range(), qf.at(s).range());
        for (std::size_t i = 0; i < qf.realized.size(); ++i) ASSERT_EQ(mm.realized[i].witness, qf.realized[i].witness);
    }
}

TEST(GeographyProperties, OppositeClassIsTheMirror) {
    QFunction plus = resolve(builtin_profile("z6_abc=1,1,1"), kWindow);
    QFunction minus = resolve(builtin_profile("z6_abc=1,1,-1"), kWindow);
    QFunction m = mirror(plus);
    for (std::int64_t s = -kWindow; s <= kWindow; ++s) {
        EXPECT_EQ(minus.at(s).lower, m.at(s).lower) << s;
        EXPECT_EQ(minus.at(s).upper, m.at(s).upper) << s;
    }
}

TEST(GeographyProperties, ConeReconstructionMatchesUpperBounds) {
    for (const auto& name : builtins()) {
        GroupProfile g = builtin_profile(name);
        QFunction qf = resolve(g, kWindow);
        DerivedInvariants d = derived_invariants(qf);
        for (const auto& r : qf.rows) {
            const std::int64_t top = (r.upper ? *r.upper : r.lower) + 6;
            for (std::int64_t chi = r.lower - 4; chi <= top; ++chi) {
                bool by_q = r.upper && chi >= *r.upper && ((chi - r.sigma) % 2 == 0);
                ASSERT_EQ(d.cones.contains(r.sigma, chi), by_q) << name << " at (" << r.sigma << "," << chi << ")";
            }
        }
    }
}

TEST(GeographyProperties, MoreRealizedPointsNeverRaiseValues) {
    for (const auto& name : builtins()) {
        GroupProfile g = builtin_profile(name);
        g.q_exact_tag.clear();
        QFunction before = resolve(g, kWindow);
        for (std::int64_t s : {-7, 0, 3, 12}) {
            GroupProfile h = g;
            const auto& row = before.at(s);
            std::int64_t chi = row.upper ? *row.upper : row.lower + 2;
            if (chi - 2 >= row.lower) chi -= 2;
            h.realized.push_back({{s, chi}, "extra"});
            QFunction after = resolve(h, kWindow);
            for (std::int64_t t = -kWindow; t <= kWindow; ++t) {
                ASSERT_EQ(after.at(t).lower, before.at(t).lower);
                if (before.at(t).upper) { ASSERT_LE(*after.at(t).upper, *before.at(t).upper) << name; }
            }
        }
    }
}

TEST(GeographyProperties, StrongerLowerBoundsNeverLowerValues) {
    for (const auto& name : builtins()) {
        GroupProfile g = builtin_profile(name);
        g.realized.clear();
        g.deficiency.reset();
        g.q_exact_tag.clear();
        QFunction before = resolve(g, kWindow);
        for (std::int64_t extra : {1, 3, 9}) {
            GroupProfile h = g;
            h.isotropic_dim += extra;
            if (h.torus_rank) {
                if (h.isotropic_dim > h.beta2) continue;  // torus profiles pin beta2 to C(n,2)
            } else {
                h.beta2 += extra;
            }
            QFunction after = resolve(h, kWindow);
            for (std::int64_t t = -kWindow; t <= kWindow; ++t) ASSERT_GE(after.at(t).lower, before.at(t).lower) << name << " " << t;
        }
    }
}

TEST(GeographyProperties, RealizedPointBelowBoundIsAContradiction) {
    GroupProfile g = builtin_profile("z5");
    g.realized.push_back({{0, 2}, "impossible"});
    EXPECT_THROW(resolve(g, 8), ContradictionError);
    GroupProfile h = builtin_profile("z5");
    h.realized.push_back({{0, 7}, "wrong parity"});
    EXPECT_THROW(resolve(h, 8), ConfigError);
}

TEST(DerivedInvariants, WindowTooSmallIsReported) {
    GroupProfile g = builtin_profile("z4");
    try {
        derived_invariants(g, 4);
        FAIL() << "expected WindowError";
    } catch (const WindowError& e) {
        EXPECT_GT(e.required(), 4);
        EXPECT_NO_THROW(derived_invariants(g, e.required()));
    }
    EXPECT_THROW(resolve(g, 0), DomainError);
}

TEST(DerivedInvariants, SmallTori) {
    auto z5 = derived_invariants(builtin_profile("z5"));
    EXPECT_EQ(z5.q, (Range{6, 6}));
    EXPECT_EQ(z5.p, (Range{6, 6}));
    auto trivial = derived_invariants(builtin_profile("trivial"));
    EXPECT_EQ(trivial.q, (Range{2, 2}));
    EXPECT_EQ(trivial.p, (Range{2, 2}));
    EXPECT_EQ(trivial.minimum_points, std::vector<std::int64_t>{0});
}

TEST(QFunctionText, HeaderAndRows) {
    std::ostringstream os;
    write_qfunction(os, resolve(builtin_profile("trivial"), 1));
    EXPECT_EQ(os.str().substr(0, os.str().find('\n')), qfunction_tsv_header());
    std::istringstream lines(os.str());
    std::string line;
    std::size_t count = 0;
    while (std::getline(lines, line)) ++count;
    EXPECT_EQ(count, 4u);
}

TEST(ProfileText, BaseAndOverrides) {
    GroupProfile g = parse_profile("base = z5\nname = custom\nrealized = 0, 6, five-torus example\n");
    EXPECT_EQ(g.name, "custom");
    EXPECT_EQ(resolve(g, 8).at(0).range(), (Range{6, 6}));
    GroupProfile h = parse_profile("torus_rank = 6\nbeta1 = 6\nbeta2 = 15\nomega_term = 1 2 : 1\nomega_term = 3 4 : 1\n");
    ASSERT_TRUE(h.pairing_bounds);
    // x1x2 + x3x4 pairs 11 of the 15 monomials: four hyperbolic pairs plus x56 against x12 and x34.
    EXPECT_EQ(h.pairing_bounds->b_plus, 5);
    EXPECT_EQ(h.pairing_bounds->b_minus, 5);
}

TEST(ProfileText, ParseErrorsCarryLineNumbers) {
    auto line_of = [](const std::string& text) -> std::size_t {
        try {
            parse_profile(text);
        } catch (const ParseError& e) {
            return e.line();
        }
        return 0;
    };
    EXPECT_EQ(line_of("name = x\nbeta1 = two\n"), 2u);
    EXPECT_EQ(line_of("name = x\n\nbogus = 1\n"), 3u);
    EXPECT_EQ(line_of("beta1 = 1\nbase = z4\n"), 2u);
    EXPECT_EQ(line_of("base = z9x\n"), 1u);
    EXPECT_EQ(line_of("beta1 = 1\nno equals sign\n"), 2u);
    EXPECT_EQ(line_of("torus_rank = 6\nomega_term = 1 2 3 : 1\n"), 2u);
    EXPECT_EQ(line_of("alpha_kind = multiple\n"), 1u);
}

TEST(BuiltinProfiles, UnknownNamesAreDomainErrors) {
    EXPECT_THROW(builtin_profile("nonsense"), DomainError);
    EXPECT_THROW(builtin_profile("free"), DomainError);
    EXPECT_THROW(builtin_profile("free:-1"), DomainError);
    EXPECT_THROW(builtin_profile("z6_abc=1,1"), DomainError);
}
