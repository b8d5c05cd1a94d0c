#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "padicverify/checks.hpp"
#include "padicverify/json_io.hpp"
#include "padicverify/report.hpp"
#include "padicverify/scenario.hpp"
#include "padicverify/suites.hpp"

using namespace padicverify;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / ("padicpar-test-" + name);
    fs::remove_all(d);
    return d;
}

std::string load_error(const json& j) {
    try {
        load_scenario(j);
    } catch (const ScenarioError& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST_CASE("scenarios: defaults fill every key") {
    for (Mode m : {Mode::kernel, Mode::solve_const, Mode::solve_var, Mode::simulate, Mode::certify}) {
        const Scenario s = load_scenario(json{{"mode", to_string(m)}});
        CHECK(s.mode == m);
        CHECK(s.resolved == load_scenario(default_scenario(m)).resolved);
        CHECK(mode_from_string(to_string(m)) == m);
    }
}

TEST_CASE("scenarios: rejections name the hypothesis") {
    CHECK(load_error({{"mode", "kernel"}, {"params", {{"alpha", 1.0}}}}).find("alpha > n") != std::string::npos);
    CHECK(load_error({{"mode", "kernel"}, {"params", {{"p", 6}}}}).find("prime") != std::string::npos);
    CHECK(load_error({{"mode", "kernel"}, {"params", {{"kappa", -1.0}}}}).find("kappa > 0") != std::string::npos);
    CHECK(load_error({{"mode", "solve-const"}, {"params", {{"lambda", 2.0}}}}).find("alpha - n > lambda") !=
          std::string::npos);
    CHECK(load_error({{"mode", "certify"}, {"params", {{"v", 1.5}}}}).find("v in (0, 1)") != std::string::npos);
    CHECK(load_error({{"mode", "kernel"}, {"foo", 1}}).find("unknown key 'foo'") != std::string::npos);
    CHECK(!load_error({{"mode", "nonsense"}}).empty());
}

TEST_CASE("functions survive a json round trip") {
    padic::CounterRng rng(8, 8);
    const padic::LocallyConstantFn f = random_function(3, 1, -1, 1, rng);
    const json j = function_to_json(f);
    const padic::LocallyConstantFn g = function_from_json(j, 3, 1, -1, 1);
    for (std::size_t i = 0; i < f.cells(); ++i) CHECK(g[i] == doctest::Approx(f[i]).epsilon(1e-14));
    for (int k = 2; k < 10; ++k) CHECK(g.exterior(k) == doctest::Approx(f.exterior(k)));
    CHECK(function_from_json(json(2.5), 3, 1, -1, 1)[4] == 2.5);
}

TEST_CASE("reports: json round trip and rendering") {
    Report r;
    r.scenario = "demo";
    r.mode = "kernel";
    CHECK(render(r).find("demo") != std::string::npos);
    r.check("mass", "kernel mass identity", 1e-12, 1e-8);
    r.check("floor", "kernel positivity", -1.0, 0.0, Relation::at_least);
    r.check("broken", "kernel mass identity", std::nan(""), 1.0);
    CHECK(r.invariants[0].pass);
    CHECK(!r.invariants[1].pass);
    CHECK(!r.invariants[2].pass);
    CHECK(!r.all_pass());
    const std::string text = render(r);
    CHECK(text.find("<-- residual") != std::string::npos);
    const Report back = report_from_json(to_json(r));
    CHECK(back.invariants.size() == 3);
    CHECK(std::isnan(back.invariants[2].value));
    CHECK(to_json(back) == to_json(r));
    CHECK(to_json(r).at("schema") == kReportSchema);
}

TEST_CASE("simulate runs are byte-identical") {
    const json j = {{"mode", "simulate"}, {"grid", {{"count", 2000}}}};
    const fs::path a = scratch("sim-a"), b = scratch("sim-b");
    const Report ra = run_scenario(load_scenario(j), RunOptions{a.string(), {}, {}});
    const Report rb = run_scenario(load_scenario(j), RunOptions{b.string(), {}, std::optional<unsigned>(3)});
    CHECK(ra.all_pass());
    CHECK(slurp(a / "trajectories.csv") == slurp(b / "trajectories.csv"));
    CHECK(slurp(a / "histogram.json") == slurp(b / "histogram.json"));
    CHECK(fs::exists(a / "report.json"));
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST_CASE("kernel run: decay dump has the power-law slope") {
    const json j = {{"mode", "kernel"}, {"grid", {{"w_cases", 2}, {"certify_k_lo", -4}, {"certify_k_hi", 2}}}};
    const fs::path d = scratch("kernel");
    const Report r = run_scenario(load_scenario(j), RunOptions{d.string(), {}, {}});
    CHECK(r.all_pass());
    std::ifstream in(d / "decay.csv");
    std::string line;
    std::getline(in, line);
    CHECK(line == "t,log_norm,log_z");
    std::vector<double> x, y;
    while (std::getline(in, line)) {
        std::stringstream ss(line);
        std::string t, a, b;
        std::getline(ss, t, ',');
        std::getline(ss, a, ',');
        std::getline(ss, b, ',');
        // far field at the slope time only
        if (std::stod(t) != 1.0 || std::stod(a) < 10 * std::log(2.0)) continue;
        x.push_back(std::stod(a));
        y.push_back(std::stod(b));
    }
    REQUIRE(x.size() >= 5);
    CHECK(fitted_slope(x, y) == doctest::Approx(-2.5).epsilon(0.02));
    fs::remove_all(d);
}
