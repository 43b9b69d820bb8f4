// Acceptance suite: one PASS/FAIL line per criterion.
#include <cstdio>
#include <cstdlib>
#include <vector>

#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "combagg/verify.hpp"

int main(int argc, char** argv) {
    CLI::App app{"acceptance criteria"};
    std::vector<int> criteria;
    bool details = false;
    int jobs = 1;
    app.add_option("--criterion", criteria, "criteria to run (default: all)")->check(CLI::Range(1, 14));
    app.add_flag("--details", details, "print the JSON report under each line");
    app.add_option("--jobs", jobs, "worker threads for IDLA trials")->check(CLI::PositiveNumber);
    CLI11_PARSE(app, argc, argv);

    spdlog::set_level(spdlog::level::warn);
    if (const char* lvl = std::getenv("AGG_LOG")) spdlog::set_level(spdlog::level::from_str(lvl));

    if (criteria.empty())
        for (int c = 1; c <= 14; ++c) criteria.push_back(c);
    bool all = true;
    for (int c : criteria) {
        const auto rep = combagg::verify::run_criterion(c, jobs);
        all = all && rep.pass;
        std::printf("criterion %2d %s  %s\n", c, rep.pass ? "PASS" : "FAIL", rep.name.c_str());
        if (details) std::printf("%s\n", combagg::verify::to_json(rep).dump(2).c_str());
        std::fflush(stdout);
    }
    return all ? 0 : 1;
}
