#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "padicpar/heat_kernel.hpp"
#include "padicpar/levi.hpp"
#include "padicverify/json_io.hpp"

namespace padicverify {

enum class Mode { kernel, solve_const, solve_var, simulate, certify };
std::string to_string(Mode m);
Mode mode_from_string(const std::string& s);

/// Load-time rejection; the message names the violated hypothesis.
class ScenarioError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Scenario {
    std::string name;
    Mode mode = Mode::kernel;
    json resolved;  // defaults for the mode merged with the file

    const json& params() const { return resolved.at("params"); }
    const json& tolerances() const { return resolved.at("tolerances"); }
    const json& grid() const { return resolved.at("grid"); }
    double tol(const char* key) const { return tolerances().at(key).get<double>(); }
    std::uint64_t seed() const { return resolved.at("seed").get<std::uint64_t>(); }
    unsigned threads() const { return resolved.at("threads").get<unsigned>(); }

    int p() const { return params().at("p").get<int>(); }
    int n() const { return params().at("n").get<int>(); }
    double alpha() const { return params().at("alpha").get<double>(); }
};

/// Every key a scenario of this mode may set, with its default value.
json default_scenario(Mode m);

/// Merges defaults, rejects unknown keys and checks the hypotheses.
Scenario load_scenario(const json& j);
Scenario load_scenario_file(const std::string& path);

padic::HeatKernelParams kernel_params(const Scenario& s);
/// The coefficient block as a sampled field (a0 may carry a time modulation).
padic::CoefficientField coefficient_field(const Scenario& s);
padic::LeviConfig levi_config(const Scenario& s);

}  // namespace padicverify
