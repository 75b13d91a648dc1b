#include "geo4/exterior.hpp"
#include "geo4/oracle.hpp"
#include "geo4/sampling.hpp"

#include <gtest/gtest.h>

#include <algorithm>

using namespace geo4;
using sampling::Rng;

namespace {

KVector mono(unsigned n, std::vector<unsigned> idx, Integer c = 1) { return KVector::monomial(n, idx, c); }

BasisChange random_basis_change(Rng& rng, unsigned n, bool allow_negative = true) {
    return BasisChange(sampling::random_unimodular(rng, n, 3 * n, allow_negative));
}

}  // namespace

TEST(MonomialRanking, LexicographicOrderMatchesEnumeration) {
    for (unsigned n = 1; n <= 9; ++n)
        for (unsigned k = 0; k <= n; ++k) {
            std::vector<bool> choose(n, false);
            std::fill(choose.begin(), choose.begin() + k, true);
            std::uint64_t expected = 0;
            do {
                std::vector<unsigned> idx;
                for (unsigned i = 0; i < n; ++i)
                    if (choose[i]) idx.push_back(i + 1);
                MultiIndex m(n, idx);
                ASSERT_EQ(m.rank_position(), expected) << "n=" << n << " k=" << k;
                ASSERT_EQ(MultiIndex::from_position(n, k, expected), m);
                ASSERT_EQ(MultiIndex::from_mask(n, m.mask()), m);
                ++expected;
            } while (std::prev_permutation(choose.begin(), choose.end()));
            EXPECT_EQ(expected, binom64(n, k));
        }
}

TEST(MonomialRanking, RejectsBadIndices) {
    EXPECT_THROW(MultiIndex(4, {2, 1}), DomainError);
    EXPECT_THROW(MultiIndex(4, {0, 1}), DomainError);
    EXPECT_THROW(MultiIndex(4, {1, 5}), DomainError);
    EXPECT_THROW(MultiIndex(4, {3, 3}), DomainError);
    EXPECT_THROW(KVector(17, 1), DomainError);
    EXPECT_THROW(KVector(3, 4), DomainError);
}

TEST(Wedge, KnownProducts) {
    EXPECT_EQ(wedge(mono(4, {1}), mono(4, {2})), mono(4, {1, 2}));
    EXPECT_EQ(wedge(mono(4, {2}), mono(4, {1})), mono(4, {1, 2}, -1));
    EXPECT_EQ(wedge(mono(4, {1, 3}), mono(4, {2, 4})), mono(4, {1, 2, 3, 4}, -1));
    EXPECT_EQ(wedge(mono(4, {1, 2}), mono(4, {3, 4})), mono(4, {1, 2, 3, 4}));
    EXPECT_EQ(wedge(mono(4, {1, 2}), mono(4, {2, 3})), KVector(4, 4));
    EXPECT_EQ(wedge(KVector::scalar(3, 5), mono(3, {2})), mono(3, {2}, 5));
    EXPECT_THROW(wedge(mono(4, {1}), mono(5, {1})), DomainError);
}

TEST(Wedge, SquareOfMonomialVanishes) {
    for (unsigned n = 1; n <= 8; ++n)
        for (unsigned k = 1; k <= n; ++k)
            for (std::uint64_t pos = 0; pos < binom64(n, k); ++pos) {
                KVector m = KVector::monomial(n, MultiIndex::from_position(n, k, pos).indices());
                if (2 * k <= n)
                    ASSERT_TRUE(wedge(m, m).is_zero());
                else
                    ASSERT_THROW(wedge(m, m), DomainError);
            }
}

TEST(Wedge, SquareOfOddDegreeVanishes) {
    Rng rng(11);
    for (int t = 0; t < 300; ++t) {
        unsigned n = static_cast<unsigned>(sampling::uniform(rng, 2, 8));
        unsigned k = 1 + 2 * static_cast<unsigned>(sampling::uniform(rng, 0, (n / 2 - 1) / 2));
        KVector u = sampling::random_kvector(rng, n, k, 9);
        ASSERT_TRUE(wedge(u, u).is_zero()) << to_string(u);
    }
}

TEST(Wedge, GradedAnticommutativity) {
    Rng rng(12);
    for (int t = 0; t < 1000; ++t) {
        unsigned n = static_cast<unsigned>(sampling::uniform(rng, 1, 8));
        unsigned j = static_cast<unsigned>(sampling::uniform(rng, 0, n));
        unsigned k = static_cast<unsigned>(sampling::uniform(rng, 0, n - j));
        KVector u = sampling::random_kvector(rng, n, j, 9), v = sampling::random_kvector(rng, n, k, 9);
        KVector expected = wedge(v, u);
        if ((j * k) % 2) expected = -expected;
        ASSERT_EQ(wedge(u, v), expected);
    }
}

TEST(Wedge, Associativity) {
    Rng rng(13);
    for (int t = 0; t < 200; ++t) {
        unsigned n = static_cast<unsigned>(sampling::uniform(rng, 1, 8));
        unsigned a = static_cast<unsigned>(sampling::uniform(rng, 0, n));
        unsigned b = static_cast<unsigned>(sampling::uniform(rng, 0, n - a));
        unsigned c = static_cast<unsigned>(sampling::uniform(rng, 0, n - a - b));
        KVector x = sampling::random_kvector(rng, n, a, 5), y = sampling::random_kvector(rng, n, b, 5),
                z = sampling::random_kvector(rng, n, c, 5);
        ASSERT_EQ(wedge(wedge(x, y), z), wedge(x, wedge(y, z)));
    }
}

TEST(Wedge, AgreesWithPermutationOracleOnRandomVectors) {
    Rng rng(14);
    for (int t = 0; t < 2000; ++t) {
        unsigned n = static_cast<unsigned>(sampling::uniform(rng, 1, 8));
        unsigned j = static_cast<unsigned>(sampling::uniform(rng, 0, n));
        unsigned k = static_cast<unsigned>(sampling::uniform(rng, 0, n - j));
        KVector u = sampling::random_kvector(rng, n, j, 20), v = sampling::random_kvector(rng, n, k, 20);
        ASSERT_EQ(wedge(u, v), oracle::wedge(u, v));
    }
}

TEST(Wedge, BilinearAndCompatibleWithBigCoefficients) {
    Integer big = Integer(1) << 200;
    KVector u = mono(5, {1, 2}, big) + mono(5, {3, 4}, 3), v = mono(5, {5}, big);
    KVector expected = mono(5, {1, 2, 5}, big * big) + mono(5, {3, 4, 5}, 3 * big);
    EXPECT_EQ(wedge(u, v), expected);
    EXPECT_EQ(wedge(2 * u, v), 2 * expected);
}

TEST(OracleSortSign, CountsAdjacentTranspositions) {
    std::vector<unsigned> s{3, 1, 2};
    EXPECT_EQ(oracle::sort_sign(s), 1);
    EXPECT_EQ(s, (std::vector<unsigned>{1, 2, 3}));
    std::vector<unsigned> t{2, 1};
    EXPECT_EQ(oracle::sort_sign(t), -1);
    std::vector<unsigned> r{1, 1};
    EXPECT_EQ(oracle::sort_sign(r), 0);
}

TEST(GlAction, IdentityAndPermutation) {
    KVector w = mono(4, {1, 2}) + mono(4, {3, 4}, 5);
    EXPECT_EQ(gl_action(BasisChange::identity(4), w), w);
    IntMatrix swap12 = IntMatrix::identity(4);
    swap12(0, 0) = swap12(1, 1) = 0;
    swap12(0, 1) = swap12(1, 0) = 1;
    EXPECT_EQ(gl_action(BasisChange(swap12), mono(4, {1, 2})), mono(4, {1, 2}, -1));
    EXPECT_THROW(BasisChange(IntMatrix{{2, 0}, {0, 1}}), DomainError);
}

TEST(GlAction, RespectsProducts) {
    Rng rng(15);
    for (int t = 0; t < 100; ++t) {
        unsigned n = static_cast<unsigned>(sampling::uniform(rng, 2, 7));
        unsigned j = static_cast<unsigned>(sampling::uniform(rng, 0, n));
        unsigned k = static_cast<unsigned>(sampling::uniform(rng, 0, n - j));
        KVector u = sampling::random_kvector(rng, n, j, 4), v = sampling::random_kvector(rng, n, k, 4);
        BasisChange b = random_basis_change(rng, n);
        ASSERT_EQ(gl_action(b, wedge(u, v)), wedge(gl_action(b, u), gl_action(b, v)));
    }
}

TEST(GlAction, ComposesAsPullback) {
    Rng rng(16);
    for (int t = 0; t < 100; ++t) {
        unsigned n = static_cast<unsigned>(sampling::uniform(rng, 2, 7));
        unsigned k = static_cast<unsigned>(sampling::uniform(rng, 0, n));
        KVector u = sampling::random_kvector(rng, n, k, 4);
        BasisChange b1 = random_basis_change(rng, n), b2 = random_basis_change(rng, n);
        ASSERT_EQ(gl_action(b1 * b2, u), gl_action(b2, gl_action(b1, u)));
        ASSERT_EQ(gl_action(b1.inverse(), gl_action(b1, u)), u);
    }
}

TEST(GlAction, TopDegreeScalesByDeterminant) {
    Rng rng(17);
    for (int t = 0; t < 50; ++t) {
        unsigned n = static_cast<unsigned>(sampling::uniform(rng, 1, 8));
        BasisChange b = random_basis_change(rng, n);
        std::vector<unsigned> all(n);
        for (unsigned i = 0; i < n; ++i) all[i] = i + 1;
        ASSERT_EQ(gl_action(b, KVector::monomial(n, all)), KVector::monomial(n, all, b.det()));
    }
}

TEST(Pushforward, RequiresDegreeNMinusFour) {
    EXPECT_THROW(pushforward_omega(BasisChange::identity(6), mono(6, {1})), DomainError);
    KVector w = mono(6, {1, 2});
    EXPECT_EQ(pushforward_omega(BasisChange::identity(6), w), w);
}

TEST(KVectorText, RoundTrip) {
    Rng rng(18);
    for (int t = 0; t < 200; ++t) {
        unsigned n = static_cast<unsigned>(sampling::uniform(rng, 1, 10));
        unsigned k = static_cast<unsigned>(sampling::uniform(rng, 0, n));
        KVector u = sampling::random_kvector(rng, n, k, 1000);
        ASSERT_EQ(parse_kvector(to_string(u)), u);
    }
}

TEST(KVectorText, AcceptsCommentsAndBlankLines) {
    KVector w = parse_kvector("# a class\n\nn=6 k=2\n1 2 : 2   # first\n3 4 : -3\n");
    EXPECT_EQ(w, mono(6, {1, 2}, 2) + mono(6, {3, 4}, -3));
    EXPECT_EQ(to_string(w), "n=6 k=2\n1 2 : 2\n3 4 : -3\n");
    EXPECT_EQ(parse_kvector("n=3 k=0\n: 7\n"), KVector::scalar(3, 7));
}

TEST(KVectorText, ParseErrorsCarryLineNumbers) {
    auto line_of = [](const std::string& text) -> std::size_t {
        try {
            parse_kvector(text);
        } catch (const ParseError& e) {
            return e.line();
        }
        return 0;
    };
    EXPECT_EQ(line_of(""), 1u);
    EXPECT_EQ(line_of("n=6\n"), 1u);
    EXPECT_EQ(line_of("n=6 k=2\n1 2 : 1\n2 1 : 1\n"), 3u);
    EXPECT_EQ(line_of("n=6 k=2\n1 2 : 1\n\n1 2 : 4\n"), 4u);
    EXPECT_EQ(line_of("n=6 k=2\n1 7 : 1\n"), 2u);
    EXPECT_EQ(line_of("n=6 k=2\n1 2 3 : 1\n"), 2u);
    EXPECT_EQ(line_of("n=6 k=2\n1 2 : x\n"), 2u);
    EXPECT_EQ(line_of("n=6 k=2\n1 2 1\n"), 2u);
    EXPECT_EQ(line_of("n=17 k=2\n"), 1u);
}
