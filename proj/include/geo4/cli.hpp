#pragma once

#include "classes.hpp"
#include "constructions.hpp"
#include "exterior.hpp"
#include "forms.hpp"
#include "geography.hpp"
#include "integer.hpp"
#include "regression.hpp"
#include "search.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace geo4 {

enum ExitCode : int { exit_ok = 0, exit_usage = 1, exit_parse = 2, exit_domain = 3, exit_mismatch = 4, exit_internal = 5 };

namespace detail {

inline std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DomainError("cannot open '" + path + "'");
    return in;
}

inline GroupProfile load_profile(const std::string& spec) {
    if (std::filesystem::is_regular_file(spec)) {
        std::ifstream in = open_input(spec);
        return read_profile(in);
    }
    return builtin_profile(spec);
}

inline void write_derived(std::ostream& out, const DerivedInvariants& d) {
    out << "q\t" << to_string(d.q) << '\n'
        << "p\t" << to_string(d.p) << '\n'
        << "p_negative\t" << to_string(d.p_negative) << '\n'
        << "minimum_points\t" << join_values(d.minimum_points) << '\n';
}

}  // namespace detail

// Parses and runs one command. All regular output goes to `out`, diagnostics to `err`.
inline int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Exact invariants for the geography of 4-manifolds with free abelian fundamental group", "geo4"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Show help for every subcommand");

    std::string omega_path, gram_path, nf_path, recipe_path, named_recipe, plan_spec, verify_path, out_path, family = "decomposable-sums";
    std::string profile_spec;
    std::int64_t window = kDefaultWindow;
    bool derived = false;
    std::int64_t coeff_bound = 1;
    std::size_t support_bound = 7, tables_workers = 8;
    std::optional<std::uint64_t> seed;
    std::uint64_t trials = 0;
    std::optional<std::uint64_t> budget;
    unsigned workers = 1;
    bool no_dedupe = false;

    auto* pairing = app.add_subcommand("pairing", "Gram matrix of the pairing x ^ y ^ omega on degree-2 classes");
    pairing->add_option("omega-file", omega_path, "class of degree n-4 in the KVector text format")->required()->check(CLI::ExistingFile);

    auto* invariants = app.add_subcommand("invariants", "Invariants of a symmetric Gram matrix as TSV");
    invariants->add_option("gram-file", gram_path, "Gram matrix in the dim=<n> text format")->required()->check(CLI::ExistingFile);

    auto* normal = app.add_subcommand("normal-form", "Normal form of a degree-2 class on Z^6 or a degree-1 class on Z^5, with witness");
    normal->add_option("omega-file", nf_path, "class in the KVector text format")->required()->check(CLI::ExistingFile);

    auto* geography = app.add_subcommand("geography", "Table of q(sigma) with bounds, status, active rule and witness");
    geography->add_option("--profile", profile_spec, "profile file or builtin (trivial, free:n, surface:g, knot, zN, z4_k=k, z5_k=k, z6_abc=a,b,c)")
        ->required();
    geography->add_option("--window", window, "tabulate sigma in [-W, W]")->check(CLI::PositiveNumber);
    geography->add_flag("--derived", derived, "append q(G), p(G) and the minimum points after the table");

    auto* construct = app.add_subcommand("construct", "Evaluate a recipe, a named recipe, or a projective plan");
    construct->add_option("recipe-file", recipe_path, "recipe in the step-per-line text format")->check(CLI::ExistingFile);
    construct->add_option("--named", named_recipe, "named transcribed recipe");
    construct->add_option("--plan", plan_spec, "projective plan p,k,<block> (for example 5,3,-sym2:3)");

    auto* search = app.add_subcommand("search", "Bounded search for classes on Z^8 with unimodular pairing");
    search->add_option("--family", family, "full-grid, decomposable-sums or random")
        ->check(CLI::IsMember({"full-grid", "decomposable-sums", "random"}));
    search->add_option("--coeff-bound", coeff_bound, "largest coefficient magnitude")->check(CLI::PositiveNumber);
    search->add_option("--support-bound", support_bound, "largest number of monomials")->check(CLI::Range(1, 70));
    search->add_option("--seed", seed, "seed for the random family");
    search->add_option("--trials", trials, "trial count for the random family");
    search->add_option("--budget", budget, "refuse searches with more candidates (default from GEO4_SEARCH_BUDGET or 5e7)")
        ->check(CLI::PositiveNumber);
    search->add_option("--out", out_path, "write hit certificates here; signature +-8 hits also go to <out>.sigma8 as they are found");
    search->add_option("--workers", workers, "worker threads")->check(CLI::Range(1u, 1024u));
    search->add_flag("--no-dedupe", no_dedupe, "keep every hit instead of one per invariant signature");
    search->add_option("--verify", verify_path, "re-verify the certificates in this file instead of searching")->check(CLI::ExistingFile);

    auto* tables = app.add_subcommand("tables", "Regression suite checking the reference values, with citations");
    tables->add_option("--workers", tables_workers, "worker count for the parallel determinism check")->check(CLI::Range(1u, 1024u));

    try {
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::Success& e) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << '\n';
        return exit_usage;
    }

    try {
        if (*pairing) {
            std::ifstream in = detail::open_input(omega_path);
            write_gram(out, pairing_matrix(read_kvector(in)));
        } else if (*invariants) {
            std::ifstream in = detail::open_input(gram_path);
            out << invariants_tsv_header() << '\n' << invariants_tsv_row(SymIntForm(read_gram(in)).invariants()) << '\n';
        } else if (*normal) {
            std::ifstream in = detail::open_input(nf_path);
            KVector w = read_kvector(in);
            if (w.n() == 6 && w.degree() == 2) {
                out << normal_form_6(w);
            } else if (w.n() == 5 && w.degree() == 1) {
                NormalForm5 f = normal_form_5(w);
                out << f.k << '\n' << to_string(f.witness.matrix());
            } else {
                throw DomainError("normal form is available for degree-2 classes on Z^6 and degree-1 classes on Z^5");
            }
        } else if (*geography) {
            GroupProfile g = detail::load_profile(profile_spec);
            std::optional<DerivedInvariants> d;
            if (derived) d = derived_invariants(g, window);
            write_qfunction(out, resolve(g, window));
            if (d) detail::write_derived(out, *d);
        } else if (*construct) {
            const int sources = !recipe_path.empty() + !named_recipe.empty() + !plan_spec.empty();
            if (sources != 1) {
                err << "usage error: construct takes exactly one of a recipe file, --named or --plan\n";
                return exit_usage;
            }
            Block b;
            if (!recipe_path.empty()) {
                std::ifstream in = detail::open_input(recipe_path);
                b = evaluate(read_recipe(in));
            } else if (!named_recipe.empty()) {
                b = evaluate_named(named_recipe);
            } else {
                auto first = plan_spec.find(','), second = plan_spec.find(',', first == std::string::npos ? first : first + 1);
                if (first == std::string::npos || second == std::string::npos) throw DomainError("plan must be p,k,<block>");
                auto pk = parse_int_list(plan_spec.substr(0, second), "plan");
                b = projective_construction({pk[0], pk[1], block_by_name(plan_spec.substr(second + 1))});
            }
            out << to_string(b) << '\n';
        } else if (*search) {
            if (!verify_path.empty()) {
                std::ifstream in = detail::open_input(verify_path);
                auto hits = read_certificates(in);
                bool all = true;
                for (std::size_t i = 0; i < hits.size(); ++i) {
                    Verification v = verify_hit(hits[i]);
                    all = all && v.ok;
                    out << "certificate " << i + 1 << '\t' << (v.ok ? "verified" : "REJECTED: " + v.reason) << '\n';
                }
                if (hits.empty()) throw ParseError(0, "no certificates found");
                return all ? exit_ok : exit_mismatch;
            }
            SearchSpec spec;
            spec.family = parse_family(family);
            spec.coefficient_bound = coeff_bound;
            spec.support_bound = support_bound;
            spec.seed = seed;
            spec.trials = trials;
            spec.dedupe = !no_dedupe;
            spec.budget = budget ? *budget : search_budget_from_env();
            spec.workers = workers;
            spec.certificate_path = out_path.empty() ? std::string() : out_path + ".sigma8";
            SearchResult r = run_search(spec);
            write_summary(out, r.summary);
            out << "hits\t" << r.hits.size() << '\n';
            for (const auto& h : r.hits) write_certificate(out, h);
            if (!out_path.empty()) {
                std::ofstream f(out_path);
                if (!f) throw DomainError("cannot write '" + out_path + "'");
                for (const auto& h : r.hits) write_certificate(f, h);
            }
        } else if (*tables) {
            SearchCheckOptions opts;
            opts.workers_parallel = static_cast<unsigned>(tables_workers);
            auto reports = run_suite(opts);
            write_report(out, reports);
            bool all = std::all_of(reports.begin(), reports.end(), [](const CriterionReport& r) { return r.pass(); });
            return all ? exit_ok : exit_mismatch;
        }
    } catch (const ParseError& e) {
        err << "parse error: " << e.what() << '\n';
        return exit_parse;
    } catch (const InconsistencyError& e) {
        err << "internal inconsistency: " << e.what() << '\n';
        return exit_internal;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << '\n';
        return exit_domain;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return exit_internal;
    }
    return exit_ok;
}

}  // namespace geo4
