#include "geo4/constructions.hpp"
#include "geo4/sampling.hpp"

#include <gtest/gtest.h>

#include <set>

using namespace geo4;
using sampling::Rng;

namespace {

Block custom(std::int64_t beta1, std::int64_t chi, std::int64_t sigma) {
    return block_by_name("custom:" + std::to_string(beta1) + "," + std::to_string(chi) + "," + std::to_string(sigma));
}

void expect_well_formed(const Block& b) {
    EXPECT_EQ(((b.chi - b.sigma) % 2 + 2) % 2, 0) << to_string(b);
    EXPECT_GE(b.beta2(), 0) << to_string(b);
    EXPECT_EQ(b.beta2(), b.chi - 2 + 2 * b.beta1);
}

}  // namespace

TEST(Blocks, StandardManifolds) {
    EXPECT_EQ(to_string(block_by_name("S4")), "beta1=0 beta2=0 chi=2 sigma=0");
    EXPECT_EQ(to_string(block_by_name("CP2")), "beta1=0 beta2=1 chi=3 sigma=1");
    EXPECT_EQ(to_string(block_by_name("T4")), "beta1=4 beta2=6 chi=0 sigma=0");
    EXPECT_EQ(block_by_name("FgxFh:2,1").chi, 0);
    EXPECT_EQ(block_by_name("FgxFh:2,1").beta1, 6);
    EXPECT_EQ(block_by_name("FgxS2:3").chi, -8);
    for (const char* name : {"S4", "CP2", "-CP2", "S2xS2", "S1xS3", "T2xS2", "T4", "FgxFh:2,3", "FgxS2:2", "sym2:3", "-sym2:3",
                             "kl:7", "N3xS1:2", "pdouble:3,1"})
        expect_well_formed(block_by_name(name));
}

TEST(Blocks, SymmetricProductOfGenusThree) {
    Block s = block_by_name("sym2:3");
    EXPECT_EQ(s.beta1, 6);
    EXPECT_EQ(s.sigma, -2);
    EXPECT_EQ(s.chi, 6);
    Block r = block_by_name("-sym2:3");
    EXPECT_EQ(r.sigma, 2);
    EXPECT_EQ(r.chi, 6);
}

TEST(Blocks, ErrorsAreDomainErrors) {
    EXPECT_THROW(block_by_name("nonsense"), DomainError);
    EXPECT_THROW(block_by_name("FgxFh:1"), DomainError);
    EXPECT_THROW(block_by_name("FgxS2:-1"), DomainError);
    EXPECT_THROW(block_by_name("sym2:0"), DomainError);
    EXPECT_THROW(block_by_name("custom:0,3,0"), InconsistencyError);
    EXPECT_THROW(kill_generator(block_by_name("S4")), DomainError);
    EXPECT_THROW(connected_sum({}), DomainError);
}

TEST(Operations, BettiBookkeeping) {
    Block t4 = block_by_name("T4"), s = block_by_name("S1xS3");
    Block sum = connected_sum({t4, s});
    EXPECT_EQ(sum.beta1, 5);
    EXPECT_EQ(sum.beta2(), 6);
    Block g = kill_generator(sum);
    EXPECT_EQ(g.beta1, 4);
    EXPECT_EQ(g.beta2(), 6);
    Block c = kill_commutator(g, 3);
    EXPECT_EQ(c.beta2(), 12);
    EXPECT_EQ(add_cp2(c, -1, 2).sigma, -2);
    EXPECT_EQ(add_s2xs2(c).beta2(), 14);
}

TEST(Operations, RandomRecipesStayWellFormed) {
    Rng rng(41);
    const std::vector<std::string> names{"S4", "CP2", "-CP2", "S2xS2", "S1xS3", "T2xS2", "T4", "FgxFh:1,2", "sym2:2", "-sym2:4"};
    for (int t = 0; t < 300; ++t) {
        std::vector<Block> parts;
        auto count = sampling::uniform(rng, 1, 4);
        for (int i = 0; i < count; ++i) parts.push_back(block_by_name(names[static_cast<std::size_t>(sampling::uniform(rng, 0, 9))]));
        Block b = connected_sum(parts);
        if (b.beta1 > 0) b = kill_generator(b, sampling::uniform(rng, 0, b.beta1));
        b = kill_commutator(b, sampling::uniform(rng, 0, 3));
        b = add_cp2(b, sampling::uniform(rng, 0, 1) ? 1 : -1, sampling::uniform(rng, 0, 3));
        b = add_s2xs2(b, sampling::uniform(rng, 0, 2));
        expect_well_formed(b);
    }
}

TEST(Recipes, TextFormat) {
    Recipe r = parse_recipe("# comment\nblock T4\nblock S1xS3 2\nsum\nkill-comm 9\ncp2 - 1\n");
    Block b = evaluate(r);
    EXPECT_EQ(b.beta1, 6);
    EXPECT_EQ(b.chi, 15);
    EXPECT_EQ(b.sigma, -1);
    auto line_of = [](const std::string& text) -> std::size_t {
        try {
            parse_recipe(text);
        } catch (const ParseError& e) {
            return e.line();
        }
        return 0;
    };
    EXPECT_EQ(line_of(""), 1u);
    EXPECT_EQ(line_of("block T4\nfrobnicate\n"), 2u);
    EXPECT_EQ(line_of("block T4\n\nkill-gen\n"), 3u);
    EXPECT_EQ(line_of("block T4\ncp2 x 1\n"), 2u);
    EXPECT_EQ(line_of("block T4\nkill-gen -1\n"), 2u);
    EXPECT_EQ(line_of("block T4\nsum extra\n"), 2u);
}

TEST(Recipes, EvaluationErrors) {
    EXPECT_THROW(evaluate(parse_recipe("block T4\nblock S4\nkill-gen 1\n")), DomainError);
    EXPECT_THROW(evaluate(parse_recipe("block S4\nkill-gen 1\n")), DomainError);
    EXPECT_THROW(evaluate(parse_recipe("block nonsense\n")), DomainError);
    EXPECT_THROW(evaluate_named("nonsense"), DomainError);
}

TEST(Recipes, NamedRecipesReproduceTheirPoints) {
    for (const auto& r : named_recipes()) {
        Block b = evaluate_named(r.key);
        EXPECT_EQ(b.sigma, r.sigma) << r.key;
        EXPECT_EQ(b.chi, r.chi) << r.key;
        expect_well_formed(b);
    }
}

TEST(Recipes, CitedPoints) {
    auto point = [](const std::string& key) {
        Block b = evaluate_named(key);
        return std::pair{b.sigma, b.chi};
    };
    EXPECT_EQ(point("z4_T"), (std::pair<std::int64_t, std::int64_t>{0, 0}));
    EXPECT_EQ(point("z5_k1"), (std::pair<std::int64_t, std::int64_t>{0, 6}));
    EXPECT_EQ(point("z5_k0"), (std::pair<std::int64_t, std::int64_t>{0, 12}));
    EXPECT_EQ(point("z6_general"), (std::pair<std::int64_t, std::int64_t>{0, 20}));
    EXPECT_EQ(point("z6_c1"), (std::pair<std::int64_t, std::int64_t>{0, 14}));
    EXPECT_EQ(point("z6_ab1"), (std::pair<std::int64_t, std::int64_t>{0, 10}));
    EXPECT_EQ(point("z6_abc1"), (std::pair<std::int64_t, std::int64_t>{0, 6}));
    EXPECT_EQ(point("z156_kl"), (std::pair<std::int64_t, std::int64_t>{0, 11780}));
    EXPECT_EQ(point("z156_sym"), (std::pair<std::int64_t, std::int64_t>{77, 11781}));
    Block plan = projective_construction({5, 3, block_by_name("-sym2:3")});
    EXPECT_EQ(plan.sigma, 1612);
    EXPECT_EQ(plan.chi, 12586);
    EXPECT_EQ(plan.beta1, 156);
}

TEST(Projective, FanoPlaneByEnumeration) {
    ProjectiveSpace fano = enumerate_projective_space(2, 2);
    EXPECT_EQ(fano.points.size(), 7u);
    EXPECT_EQ(fano.lines.size(), 7u);
    // Any two points lie on exactly one line.
    for (std::size_t a = 0; a < 7; ++a)
        for (std::size_t b = a + 1; b < 7; ++b) {
            int on = 0;
            for (const auto& l : fano.lines) on += std::count(l.begin(), l.end(), a) && std::count(l.begin(), l.end(), b);
            EXPECT_EQ(on, 1);
        }
    EXPECT_EQ(projective_counts(2, 2), (ProjectiveCounts{7, 7}));
    EXPECT_EQ(projective_counts(5, 3), (ProjectiveCounts{156, 806}));
}

TEST(Projective, CountsMatchEnumeration) {
    for (std::int64_t p : {2, 3, 5, 7})
        for (std::int64_t k = 1; k <= (p <= 3 ? 4 : 3); ++k) {
            ProjectiveSpace ps = enumerate_projective_space(p, k);
            auto c = projective_counts(p, k);
            EXPECT_EQ(Integer(ps.points.size()), c.points) << p << "," << k;
            EXPECT_EQ(Integer(ps.lines.size()), c.lines) << p << "," << k;
        }
}

TEST(Projective, ReplayMatchesFormulaOnRandomPlans) {
    Rng rng(42);
    const std::vector<std::int64_t> primes{2, 3, 5, 7};
    for (int t = 0; t < 20; ++t) {
        std::int64_t p = primes[static_cast<std::size_t>(sampling::uniform(rng, 0, 3))];
        std::int64_t k = sampling::uniform(rng, 1, 3);
        std::int64_t chi = 2 * sampling::uniform(rng, -3, 6), sigma = 2 * sampling::uniform(rng, -4, 4);
        while (chi - 2 + 2 * (p + 1) < 0) chi += 2;
        ProjectivePlan plan{p, k, custom(p + 1, chi, sigma)};
        EXPECT_EQ(projective_construction_replay(plan), projective_construction_formula(plan)) << p << "," << k;
    }
}

TEST(Projective, PlanErrors) {
    EXPECT_THROW(projective_construction({6, 2, custom(7, 0, 0)}), DomainError);
    EXPECT_THROW(projective_construction({5, 0, custom(6, 0, 0)}), DomainError);
    EXPECT_THROW(projective_construction({5, 2, block_by_name("T4")}), DomainError);
    EXPECT_NO_THROW(projective_construction({4, 2, custom(5, 0, 0)}));
    EXPECT_TRUE(is_prime_power(9));
    EXPECT_FALSE(is_prime_power(12));
    EXPECT_FALSE(is_prime_power(1));
}

TEST(Ratio, MinimumAtSeven) {
    RatioMinimum m = minimize_p_ratio(50);
    EXPECT_EQ(m.prime, 7);
    EXPECT_EQ(m.value, Rational(13, 28));
    EXPECT_EQ(p_ratio_bound(5), Rational(7, 15));
    EXPECT_THROW(p_ratio_bound(9), DomainError);
}

TEST(Ratio, DecreasingThenIncreasing) {
    std::vector<std::int64_t> primes;
    for (std::int64_t p = 2; p <= 50; ++p)
        if (modarith::is_prime(static_cast<std::uint64_t>(p))) primes.push_back(p);
    std::size_t argmin = 0;
    for (std::size_t i = 1; i < primes.size(); ++i)
        if (p_ratio_bound(primes[i]) < p_ratio_bound(primes[argmin])) argmin = i;
    EXPECT_EQ(primes[argmin], 7);
    for (std::size_t i = 1; i < primes.size(); ++i) {
        if (i <= argmin) EXPECT_LT(p_ratio_bound(primes[i]), p_ratio_bound(primes[i - 1])) << primes[i];
        else EXPECT_GT(p_ratio_bound(primes[i]), p_ratio_bound(primes[i - 1])) << primes[i];
    }
}
