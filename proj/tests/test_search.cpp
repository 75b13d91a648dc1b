#include "geo4/oracle.hpp"
#include "geo4/sampling.hpp"
#include "geo4/search.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>

using namespace geo4;
using sampling::Rng;

namespace {

SearchSpec decomposable() {
    SearchSpec s;
    s.family = SearchFamily::decomposable_sums;
    s.coefficient_bound = 1;
    s.support_bound = 7;
    return s;
}

const SearchResult& decomposable_result() {
    static const SearchResult r = run_search(decomposable());
    return r;
}

SearchSpec random_spec(unsigned workers) {
    SearchSpec s;
    s.family = SearchFamily::random;
    s.seed = 7;
    s.trials = 20000;
    s.coefficient_bound = 1;
    s.support_bound = 12;
    s.dedupe = false;
    s.workers = workers;
    return s;
}

std::string fingerprint(const SearchResult& r) {
    std::ostringstream os;
    for (const auto& h : r.hits) write_certificate(os, h);
    write_summary(os, r.summary);
    return os.str();
}

struct EnvGuard {
    explicit EnvGuard(const char* value) {
        if (value) setenv("GEO4_SEARCH_BUDGET", value, 1);
        else unsetenv("GEO4_SEARCH_BUDGET");
    }
    ~EnvGuard() { unsetenv("GEO4_SEARCH_BUDGET"); }
};

}  // namespace

TEST(Search, DecomposableSumsFindHyperbolicHit) {
    const auto& r = decomposable_result();
    ASSERT_FALSE(r.hits.empty());
    EXPECT_EQ(r.summary.examined, 9328416u);
    EXPECT_EQ(r.summary.by_signature.count(8) + r.summary.by_signature.count(-8), 0u);
    const SearchHit& h = r.hits.front();
    EXPECT_EQ(h.invariants.rank, 28u);
    EXPECT_EQ(h.invariants.signature, 0);
    EXPECT_EQ(to_string(h.classification), "14H");
    EXPECT_TRUE(verify_hit(h).ok) << verify_hit(h).reason;
}

TEST(Search, EveryHitIsEvenUnimodularOfRank28) {
    for (const auto& r : {decomposable_result(), run_search(random_spec(1))})
        for (const auto& h : r.hits) {
            EXPECT_EQ(h.invariants.rank, 28u);
            EXPECT_TRUE(h.invariants.unimodular);
            EXPECT_EQ(h.invariants.parity, Parity::even);
            EXPECT_EQ(h.invariants.signature % 8, 0);
            EXPECT_EQ(h.gram, oracle::pairing_matrix(h.omega));
        }
}

TEST(Search, InvariantsSurviveRandomPushforwards) {
    const SearchHit& h = decomposable_result().hits.front();
    Rng rng(51);
    for (int t = 0; t < 100; ++t) {
        BasisChange a(sampling::random_unimodular(rng, 8, 12));
        KVector moved = pushforward_omega(a, h.omega);
        FormInvariants inv = SymIntForm(pairing_matrix(moved)).invariants();
        ASSERT_EQ(inv, h.invariants) << "trial " << t;
        ASSERT_TRUE(verify_hit(make_hit(moved, 0)).ok);
    }
}

TEST(Search, FastFilterAgreesWithFullDeterminant) {
    detail::SupportList supports;
    detail::enumerate_covering_supports(7, true, 3000, supports);
    ASSERT_GT(supports.count(), 0u);
    Rng rng(52);
    std::size_t unimodular = 0;
    for (std::size_t i = 0; i < supports.count(); ++i) {
        const std::uint8_t* terms = &supports.flat[i * supports.size];
        auto st = detail::analyze_support(terms, supports.size);
        for (int rep = 0; rep < 3; ++rep) {
            std::vector<std::int64_t> coeffs(supports.size);
            for (auto& c : coeffs) c = sampling::uniform(rng, 0, 3) ? (sampling::uniform(rng, 0, 1) ? 1 : -1) : sampling::uniform(rng, -3, 3);
            KVector w = detail::omega_from(terms, coeffs.data(), supports.size);
            IntMatrix g = pairing_matrix(w);
            Integer det = determinant(g);
            bool full = det == 1 || det == -1;
            bool zero_coeff = std::find(coeffs.begin(), coeffs.end(), 0) != coeffs.end();
            if (zero_coeff) continue;
            ASSERT_EQ(detail::pairing_unimodular(st, coeffs.data()), full) << to_string(w);
            if (full) {
                ++unimodular;
                ASSERT_EQ(detail::core_signature(st, coeffs.data()), SymIntForm(g).invariants().signature);
            }
        }
    }
    EXPECT_GT(unimodular, 0u);
}

TEST(Search, DeterministicAcrossWorkerCounts) {
    ASSERT_GT(run_search(random_spec(1)).hits.size(), 10u);
    EXPECT_EQ(fingerprint(run_search(random_spec(1))), fingerprint(run_search(random_spec(4))));
    EXPECT_EQ(fingerprint(run_search(random_spec(3))), fingerprint(run_search(random_spec(3))));
    SearchSpec d = decomposable();
    d.workers = 3;
    EXPECT_EQ(fingerprint(run_search(d)), fingerprint(decomposable_result()));
}

TEST(Search, DifferentSeedsGiveDifferentStreams) {
    SearchSpec a = random_spec(1), b = random_spec(1);
    b.seed = 8;
    EXPECT_NE(fingerprint(run_search(a)), fingerprint(run_search(b)));
}

TEST(Verification, CorruptedCertificatesAreRejected) {
    const SearchHit& good = decomposable_result().hits.front();
    SearchHit gram = good;
    gram.gram(0, 27) += 1;
    gram.gram(27, 0) += 1;
    EXPECT_FALSE(verify_hit(gram).ok);
    SearchHit omega = good;
    omega.omega.set(0, omega.omega.at(0) + 1);
    EXPECT_FALSE(verify_hit(omega).ok);
    SearchHit inv = good;
    inv.invariants.signature = 8;
    EXPECT_FALSE(verify_hit(inv).ok);
    SearchHit cls = good;
    cls.classification.h_copies = 13;
    EXPECT_FALSE(verify_hit(cls).ok);
    SearchHit shape = good;
    shape.gram = IntMatrix(27, 27);
    EXPECT_FALSE(verify_hit(shape).ok);
    SearchHit zero = good;
    zero.omega = KVector(8, 4);
    EXPECT_FALSE(verify_hit(zero).ok);
}

TEST(Certificates, RoundTrip) {
    std::stringstream ss;
    for (const auto& h : decomposable_result().hits) write_certificate(ss, h);
    auto back = read_certificates(ss);
    ASSERT_EQ(back.size(), decomposable_result().hits.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
        EXPECT_EQ(back[i].omega, decomposable_result().hits[i].omega);
        EXPECT_EQ(back[i].gram, decomposable_result().hits[i].gram);
        EXPECT_EQ(back[i].invariants, decomposable_result().hits[i].invariants);
        EXPECT_EQ(back[i].candidate, decomposable_result().hits[i].candidate);
        EXPECT_TRUE(verify_hit(back[i]).ok);
    }
}

TEST(Certificates, ParseErrorsCarryLineNumbers) {
    std::ostringstream os;
    write_certificate(os, decomposable_result().hits.front());
    const std::string text = os.str();
    auto line_of = [](const std::string& t) -> std::size_t {
        std::istringstream is(t);
        try {
            read_certificates(is);
        } catch (const ParseError& e) {
            return e.line();
        }
        return 0;
    };
    // Truncated: no closing `end`.
    EXPECT_GT(line_of(text.substr(0, text.rfind("end"))), 0u);
    // Corrupted class line.
    std::string bad = text;
    bad.replace(bad.find("class 14H"), 9, "class 14Q");
    std::size_t class_line = 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(text.find("class 14H")), '\n'));
    EXPECT_EQ(line_of(bad), class_line);
    // Bad omega entry on line 3.
    std::string omega = text;
    auto second = omega.find('\n', omega.find('\n') + 1) + 1;
    omega.insert(second, "x");
    EXPECT_EQ(line_of(omega), 3u);
}

TEST(Budget, FullGridIsRefusedBeforeComputing) {
    SearchSpec s;
    s.family = SearchFamily::full_grid;
    s.coefficient_bound = 2;
    s.support_bound = 10;
    EXPECT_THROW(run_search(s), BudgetError);
    s.support_bound = 2;
    s.coefficient_bound = 1;
    EXPECT_NO_THROW(run_search(s));
}

TEST(Budget, EnvironmentOverride) {
    {
        EnvGuard g(nullptr);
        EXPECT_EQ(search_budget_from_env(), kDefaultSearchBudget);
    }
    {
        EnvGuard g("1234");
        EXPECT_EQ(search_budget_from_env(), 1234u);
    }
    {
        EnvGuard g("12x");
        EXPECT_THROW(search_budget_from_env(), ConfigError);
    }
    {
        EnvGuard g("0");
        EXPECT_THROW(search_budget_from_env(), ConfigError);
    }
}

TEST(SearchSpecs, InvalidSpecsAreDomainErrors) {
    SearchSpec s = random_spec(1);
    s.seed.reset();
    EXPECT_THROW(check_spec(s), DomainError);
    s = random_spec(1);
    s.trials = 0;
    EXPECT_THROW(check_spec(s), DomainError);
    s = decomposable();
    s.workers = 0;
    EXPECT_THROW(check_spec(s), DomainError);
    s.workers = 1;
    s.coefficient_bound = 0;
    EXPECT_THROW(check_spec(s), DomainError);
    EXPECT_THROW(parse_family("everything"), DomainError);
    EXPECT_EQ(parse_family("full-grid"), SearchFamily::full_grid);
}

TEST(Summary, ReportsAbsenceOfSignatureEight) {
    std::ostringstream os;
    write_summary(os, decomposable_result().summary);
    EXPECT_NE(os.str().find("none found (not a proof of nonexistence)"), std::string::npos);
}

TEST(Search, SigmaEightSinkIsNotCreatedWithoutHits) {
    auto path = std::filesystem::temp_directory_path() / "geo4-test-sigma8.cert";
    std::filesystem::remove(path);
    SearchSpec s = random_spec(2);
    s.trials = 2000;
    s.certificate_path = path.string();
    SearchResult r = run_search(s);
    bool any8 = r.summary.by_signature.count(8) || r.summary.by_signature.count(-8);
    EXPECT_EQ(std::filesystem::exists(path), any8);
}
