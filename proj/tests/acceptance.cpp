#include "geo4/regression.hpp"

#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

namespace {

struct CommandResult {
    int exit_code = -1;
    double seconds = 0;
    std::string output;
};

CommandResult run_command(const std::string& command) {
    CommandResult r;
    auto start = std::chrono::steady_clock::now();
    FILE* pipe = popen(command.c_str(), "r");
    if (!pipe) return r;
    char buf[4096];
    while (std::size_t n = std::fread(buf, 1, sizeof buf, pipe)) r.output.append(buf, n);
    int status = pclose(pipe);
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

void print_details(const geo4::CriterionReport& r) {
    for (const auto& c : r.checks)
        if (!c.ok)
            std::cout << "  mismatch: " << c.label << ": expected " << c.expected << ", got " << c.actual << " (" << c.citation << ")\n";
    for (const auto& n : r.notes) std::cout << "  note: " << geo4::detail::one_line(n) << '\n';
}

}  // namespace

int main() {
    const auto cert = std::filesystem::temp_directory_path() / "geo4-acceptance-sigma8.cert";
    geo4::SearchCheckOptions opts;
    opts.workers_parallel = 8;
    opts.certificate_path = cert.string();

    bool all = true;
    for (const auto& r : geo4::run_suite(opts)) {
        std::cout << (r.pass() ? "PASS" : "FAIL") << " criterion " << r.id << ": " << r.title << '\n';
        print_details(r);
        all = all && r.pass();
    }

    CommandResult t = run_command(std::string("\"") + GEO4_CLI_PATH + "\" tables");
    const bool ok10 = t.exit_code == 0 && t.seconds < 300;
    std::cout << (ok10 ? "PASS" : "FAIL") << " criterion 10: CLI tables exits 0 in under 5 minutes\n"
              << "  exit " << t.exit_code << " after " << static_cast<long>(t.seconds * 1000) << " ms\n";
    if (t.exit_code != 0)
        for (std::size_t pos = 0; pos < t.output.size();) {
            std::size_t end = t.output.find('\n', pos);
            std::string line = t.output.substr(pos, end - pos);
            if (line.rfind("MISMATCH", 0) == 0 || line.find("\tFAIL\t") != std::string::npos) std::cout << "  tables: " << line << '\n';
            pos = end == std::string::npos ? t.output.size() : end + 1;
        }
    all = all && ok10;
    return all ? EXIT_SUCCESS : EXIT_FAILURE;
}
