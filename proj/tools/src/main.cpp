#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "padicverify/report.hpp"
#include "padicverify/scenario.hpp"
#include "padicverify/suites.hpp"

using namespace padicverify;

int main(int argc, char** argv) {
    CLI::App app{"Runs verification scenarios for p-adic heat kernels, Cauchy solvers and jump processes"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "run a scenario and write report.json plus CSV dumps");
    std::string scenario_path, out_dir;
    std::uint64_t seed = 0;
    unsigned threads = 0;
    bool quiet = false;
    run->add_option("scenario", scenario_path, "scenario JSON file")->required()->check(CLI::ExistingFile);
    run->add_option("--out", out_dir, "output directory (default: $PADICPAR_OUT_DIR or ./padicpar-out)");
    auto* seed_opt = run->add_option("--seed", seed, "override the scenario seed");
    auto* thr_opt = run->add_option("--threads", threads, "worker threads for simulation")->check(CLI::PositiveNumber);
    run->add_flag("--quiet", quiet, "print only the summary line");

    auto* ren = app.add_subcommand("render", "print the invariant table of a report");
    std::string report_path;
    ren->add_option("report", report_path, "report JSON file")->required()->check(CLI::ExistingFile);

    auto* defaults = app.add_subcommand("defaults", "print the default scenario of a mode");
    std::string mode_name;
    defaults->add_option("mode", mode_name, "kernel, solve-const, solve-var, simulate or certify")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            Scenario s = load_scenario_file(scenario_path);
            RunOptions opt;
            opt.out_dir = out_dir;
            if (*seed_opt) opt.seed = seed;
            if (*thr_opt) opt.threads = threads;
            const Report rep = run_scenario(std::move(s), opt);
            if (!quiet) std::cout << render(rep);
            std::cout << (rep.all_pass() ? "PASS" : "FAIL") << '\n';
            return rep.all_pass() ? 0 : 1;
        }
        if (*ren) {
            std::ifstream in(report_path);
            json j;
            in >> j;
            std::cout << render(report_from_json(j));
            return 0;
        }
        if (*defaults) {
            std::cout << default_scenario(mode_from_string(mode_name)).dump(2) << '\n';
            return 0;
        }
    } catch (const ScenarioError& e) {
        std::cerr << "scenario error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
