#include "geo4/cli.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace geo4;
namespace fs = std::filesystem;

namespace {

struct CliRun {
    int code;
    std::string out, err;
};

CliRun cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    int code = run_cli(std::move(args), out, err);
    return {code, out.str(), err.str()};
}

std::string data(const std::string& name) { return std::string(GEO4_DATA_DIR) + "/" + name; }

std::string temp_file(const std::string& name, const std::string& content) {
    fs::path p = fs::temp_directory_path() / ("geo4-cli-" + name);
    std::ofstream(p) << content;
    return p.string();
}

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream is(text);
    for (std::string l; std::getline(is, l);) out.push_back(l);
    return out;
}

std::vector<std::string> fields(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream is(line);
    for (std::string f; std::getline(is, f, '\t');) out.push_back(f);
    return out;
}

}  // namespace

TEST(Cli, UsageErrors) {
    EXPECT_EQ(cli({}).code, exit_usage);
    EXPECT_EQ(cli({"frobnicate"}).code, exit_usage);
    EXPECT_EQ(cli({"pairing"}).code, exit_usage);
    EXPECT_EQ(cli({"pairing", data("omega6_example.txt"), "--bogus"}).code, exit_usage);
    EXPECT_EQ(cli({"pairing", "/nonexistent/file"}).code, exit_usage);
    EXPECT_EQ(cli({"geography"}).code, exit_usage);
    EXPECT_EQ(cli({"geography", "--profile", "z4", "--window", "-3"}).code, exit_usage);
    EXPECT_EQ(cli({"search", "--family", "everything"}).code, exit_usage);
    EXPECT_EQ(cli({"construct"}).code, exit_usage);
    EXPECT_EQ(cli({"construct", "--named", "s6", "--plan", "5,3,-sym2:3"}).code, exit_usage);
    CliRun help = cli({"--help"});
    EXPECT_EQ(help.code, exit_ok);
    EXPECT_NE(help.out.find("normal-form"), std::string::npos);
}

TEST(Cli, NormalFormOfWorkedExample) {
    CliRun r = cli({"normal-form", data("omega6_example.txt")});
    ASSERT_EQ(r.code, exit_ok) << r.err;
    auto l = lines(r.out);
    ASSERT_EQ(l.size(), 7u);
    EXPECT_EQ(l[0], "1 6 0");
    CliRun five = cli({"normal-form", data("omega5_example.txt")});
    ASSERT_EQ(five.code, exit_ok) << five.err;
    EXPECT_EQ(lines(five.out).at(0), "2");
    EXPECT_EQ(lines(five.out).size(), 6u);
    std::string wrong = temp_file("deg3.txt", "n=6 k=3\n1 2 3 : 1\n");
    EXPECT_EQ(cli({"normal-form", wrong}).code, exit_domain);
}

TEST(Cli, ParseErrorsReportLineNumbers) {
    std::string bad = temp_file("bad-omega.txt", "n=6 k=2\n1 2 : 1\n2 1 : 1\n");
    CliRun r = cli({"pairing", bad});
    EXPECT_EQ(r.code, exit_parse);
    EXPECT_NE(r.err.find("line 3"), std::string::npos) << r.err;
    std::string gram = temp_file("bad-gram.txt", "dim=2\n0 1\n1 z\n");
    CliRun g = cli({"invariants", gram});
    EXPECT_EQ(g.code, exit_parse);
    EXPECT_NE(g.err.find("line 3"), std::string::npos) << g.err;
    std::string profile = temp_file("bad-profile.txt", "name = x\nbeta1 = many\n");
    CliRun p = cli({"geography", "--profile", profile});
    EXPECT_EQ(p.code, exit_parse);
    EXPECT_NE(p.err.find("line 2"), std::string::npos) << p.err;
    std::string recipe = temp_file("bad-recipe.txt", "block T4\nteleport 3\n");
    EXPECT_EQ(cli({"construct", recipe}).code, exit_parse);
}

TEST(Cli, ContradictionsAreDistinctFromParseErrors) {
    std::string profile = temp_file("contradiction.txt", "base = z5\nrealized = 0, 2, impossible\n");
    CliRun r = cli({"geography", "--profile", profile, "--window", "8"});
    EXPECT_EQ(r.code, exit_internal);
    EXPECT_NE(r.code, exit_parse);
    EXPECT_NE(r.err.find("below the lower bound"), std::string::npos) << r.err;
}

TEST(Cli, PairingAndInvariants) {
    CliRun p = cli({"pairing", data("omega6_canonical.txt")});
    ASSERT_EQ(p.code, exit_ok);
    EXPECT_EQ(lines(p.out).at(0), "dim=15");
    EXPECT_EQ(lines(p.out).size(), 16u);
    std::string gram = temp_file("pairing-gram.txt", p.out);
    CliRun i = cli({"invariants", gram});
    ASSERT_EQ(i.code, exit_ok) << i.err;
    EXPECT_EQ(i.out, std::string(invariants_tsv_header()) + "\n15\t7\t8\t-1\t2\teven\tno\t2\n");
    CliRun h = cli({"invariants", data("gram_hyperbolic.txt")});
    EXPECT_EQ(lines(h.out).at(1), "2\t1\t1\t0\t-1\teven\tyes\t-");
}

TEST(Cli, GeographyTableForTripleOne) {
    CliRun r = cli({"geography", "--profile", "z6_abc=1,1,1", "--window", "16"});
    ASSERT_EQ(r.code, exit_ok) << r.err;
    auto l = lines(r.out);
    ASSERT_EQ(l.size(), 34u);
    EXPECT_EQ(l[0], qfunction_tsv_header());
    for (std::size_t i = 1; i < l.size(); ++i) {
        auto f = fields(l[i]);
        ASSERT_EQ(f.size(), 6u);
        const long sigma = std::stol(f[0]);
        if (sigma == -2) { EXPECT_EQ(f[1] + " " + f[2], "6 6"); }
        if (sigma == 0) { EXPECT_EQ(f[1] + " " + f[2], "6 6"); }
        if (sigma >= 2) { EXPECT_TRUE(f[3] == "interval" || f[3] == "derived") << l[i]; }
        EXPECT_FALSE(f[4].empty()) << l[i];
    }
    CliRun file = cli({"geography", "--profile", data("profile_z6_111.txt"), "--window", "16"});
    ASSERT_EQ(file.code, exit_ok) << file.err;
    auto lf = lines(file.out);
    ASSERT_EQ(lf.size(), l.size());
    for (std::size_t i = 0; i < l.size(); ++i) {
        auto a = fields(l[i]), b = fields(lf[i]);
        EXPECT_EQ(std::vector<std::string>(a.begin(), a.begin() + 4), std::vector<std::string>(b.begin(), b.begin() + 4));
    }
}

TEST(Cli, GeographyDerivedInvariants) {
    CliRun r = cli({"geography", "--profile", "z5", "--derived"});
    ASSERT_EQ(r.code, exit_ok) << r.err;
    EXPECT_NE(r.out.find("\nq\t6\np\t6\n"), std::string::npos) << r.out;
    CliRun small = cli({"geography", "--profile", "z4", "--window", "4", "--derived"});
    EXPECT_EQ(small.code, exit_domain);
    EXPECT_TRUE(small.out.empty());
    EXPECT_EQ(cli({"geography", "--profile", "nonsense"}).code, exit_domain);
}

TEST(Cli, OutputIsByteStable) {
    for (const std::vector<std::string>& args :
         {std::vector<std::string>{"geography", "--profile", "z6", "--window", "20", "--derived"},
          std::vector<std::string>{"normal-form", data("omega6_example.txt")},
          std::vector<std::string>{"search", "--family", "random", "--seed", "3", "--trials", "3000", "--coeff-bound", "2",
                                   "--support-bound", "9", "--no-dedupe", "--workers", "4"}}) {
        CliRun a = cli(args), b = cli(args);
        EXPECT_EQ(a.code, exit_ok) << a.err;
        EXPECT_EQ(a.out, b.out);
    }
}

TEST(Cli, Construct) {
    CliRun f = cli({"construct", data("recipe_z6_100.txt")});
    ASSERT_EQ(f.code, exit_ok) << f.err;
    EXPECT_EQ(f.out, "beta1=6 beta2=24 chi=14 sigma=0\n");
    EXPECT_EQ(cli({"construct", "--named", "s6"}).out, "beta1=6 beta2=16 chi=6 sigma=-2\n");
    EXPECT_EQ(cli({"construct", "--plan", "5,3,-sym2:3"}).out, "beta1=156 beta2=12896 chi=12586 sigma=1612\n");
    EXPECT_EQ(cli({"construct", "--plan", "6,3,-sym2:3"}).code, exit_domain);
    EXPECT_EQ(cli({"construct", "--plan", "5"}).code, exit_domain);
    EXPECT_EQ(cli({"construct", "--named", "nonsense"}).code, exit_domain);
}

TEST(Cli, SearchWritesAndVerifiesCertificates) {
    fs::path out = fs::temp_directory_path() / "geo4-cli-hits.cert";
    fs::remove(out);
    CliRun r = cli({"search", "--out", out.string()});
    ASSERT_EQ(r.code, exit_ok) << r.err;
    EXPECT_NE(r.out.find("signature 0\t129024"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("class 14H"), std::string::npos);
    CliRun v = cli({"search", "--verify", out.string()});
    EXPECT_EQ(v.code, exit_ok) << v.out << v.err;
    EXPECT_EQ(v.out, "certificate 1\tverified\n");

    std::ifstream in(out);
    std::string text((std::istreambuf_iterator<char>(in)), {});
    auto pos = text.find("class 14H");
    std::string tampered = text;
    // Flip one Gram entry: the first row of the matrix follows the "dim=28" header.
    auto dim = tampered.find("dim=28\n") + 7;
    tampered[dim] = tampered[dim] == '0' ? '1' : '0';
    CliRun bad = cli({"search", "--verify", temp_file("tampered.cert", tampered)});
    EXPECT_EQ(bad.code, exit_mismatch);
    EXPECT_NE(bad.out.find("REJECTED"), std::string::npos);
    std::string broken = text.substr(0, pos);
    EXPECT_EQ(cli({"search", "--verify", temp_file("broken.cert", broken)}).code, exit_parse);
}

TEST(Cli, SearchBudget) {
    CliRun r = cli({"search", "--family", "full-grid", "--coeff-bound", "2", "--support-bound", "10"});
    EXPECT_EQ(r.code, exit_domain);
    EXPECT_NE(r.err.find("exceeds the budget"), std::string::npos);
    setenv("GEO4_SEARCH_BUDGET", "10", 1);
    CliRun e = cli({"search"});
    EXPECT_EQ(e.code, exit_domain);
    setenv("GEO4_SEARCH_BUDGET", "ten", 1);
    CliRun c = cli({"search"});
    EXPECT_EQ(c.code, exit_domain);
    EXPECT_NE(c.err.find("GEO4_SEARCH_BUDGET"), std::string::npos);
    unsetenv("GEO4_SEARCH_BUDGET");
    EXPECT_EQ(cli({"search", "--family", "random", "--trials", "10"}).code, exit_domain);
}

TEST(Cli, TablesRowsCarryCitations) {
    CliRun r = cli({"tables", "--workers", "2"});
    auto l = lines(r.out);
    ASSERT_FALSE(l.empty());
    EXPECT_EQ(l[0], "status\tcriterion\tcheck\texpected\tactual\tcitation");
    bool all_pass = true;
    std::size_t rows = 0, footers = 0;
    for (std::size_t i = 1; i < l.size(); ++i) {
        auto f = fields(l[i]);
        if (f[0] == "OK" || f[0] == "MISMATCH") {
            ++rows;
            ASSERT_EQ(f.size(), 6u) << l[i];
            EXPECT_FALSE(f[5].empty()) << l[i];
        } else if (f[0].rfind("criterion ", 0) == 0) {
            ++footers;
            all_pass = all_pass && f[1] == "PASS";
        }
    }
    EXPECT_GT(rows, 50u);
    EXPECT_EQ(footers, 9u);
    EXPECT_EQ(r.code, all_pass ? exit_ok : exit_mismatch);
}
