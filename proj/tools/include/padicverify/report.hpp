#pragma once

#include <string>
#include <vector>

#include "padicverify/json_io.hpp"

namespace padicverify {

inline constexpr const char* kReportSchema = "padicpar-report/1";

enum class Relation { at_most, at_least };

struct Invariant {
    std::string name;
    std::string anchor;  // which property of the theory it certifies
    double value = 0.0;
    double bound = 0.0;
    Relation relation = Relation::at_most;
    bool pass = false;
    std::string note;
};

struct Report {
    std::string schema = kReportSchema;
    std::string scenario;
    std::string mode;
    json config = json::object();  // the scenario with every default filled in
    std::vector<Invariant> invariants;
    json data = json::object();    // diagnostics that are not pass/fail
    std::vector<std::string> files;

    /// Adds a check; non-finite values fail.
    Invariant& check(std::string name, std::string anchor, double value, double bound,
                     Relation rel = Relation::at_most, std::string note = {});
    bool all_pass() const;
};

json to_json(const Report& r);
Report report_from_json(const json& j);

/// Plain-text table of the invariants; failing lines are flagged.
std::string render(const Report& r);

}  // namespace padicverify
