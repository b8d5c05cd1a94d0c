#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "padicverify/report.hpp"
#include "padicverify/scenario.hpp"

namespace padicverify {

struct RunOptions {
    std::string out_dir;                 // created if missing
    std::optional<std::uint64_t> seed;   // overrides the scenario seed
    std::optional<unsigned> threads;     // overrides the scenario thread count
};

/// Runs the mode's pipeline, writes report.json and the CSV dumps into
/// out_dir, and returns the report.
Report run_scenario(Scenario s, const RunOptions& opt);

/// Output directory from PADICPAR_OUT_DIR, else "padicpar-out".
std::string default_out_dir();

}  // namespace padicverify
