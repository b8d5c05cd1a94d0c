#include "padicverify/report.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace padicverify {

namespace {

// JSON has no inf/nan; keep them readable
json number(double v) {
    if (std::isfinite(v)) return v;
    if (std::isnan(v)) return "nan";
    return v > 0 ? "inf" : "-inf";
}

double from_number(const json& j) {
    if (j.is_number()) return j.get<double>();
    const std::string s = j.get<std::string>();
    if (s == "inf") return INFINITY;
    if (s == "-inf") return -INFINITY;
    return NAN;
}

}  // namespace

Invariant& Report::check(std::string name, std::string anchor, double value, double bound, Relation rel,
                         std::string note) {
    Invariant inv;
    inv.name = std::move(name);
    inv.anchor = std::move(anchor);
    inv.value = value;
    inv.bound = bound;
    inv.relation = rel;
    inv.note = std::move(note);
    inv.pass = std::isfinite(value) && (rel == Relation::at_most ? value <= bound : value >= bound);
    invariants.push_back(std::move(inv));
    return invariants.back();
}

bool Report::all_pass() const {
    for (const auto& i : invariants)
        if (!i.pass) return false;
    return true;
}

json to_json(const Report& r) {
    json inv = json::array();
    for (const auto& i : r.invariants) {
        json e{{"name", i.name},
               {"anchor", i.anchor},
               {"value", number(i.value)},
               {"bound", number(i.bound)},
               {"relation", i.relation == Relation::at_most ? "<=" : ">="},
               {"pass", i.pass}};
        if (!i.note.empty()) e["note"] = i.note;
        inv.push_back(e);
    }
    return json{{"schema", r.schema}, {"scenario", r.scenario}, {"mode", r.mode},     {"config", r.config},
                {"invariants", inv},  {"data", r.data},         {"files", r.files}, {"all_pass", r.all_pass()}};
}

Report report_from_json(const json& j) {
    Report r;
    r.schema = j.value("schema", std::string{});
    if (r.schema != kReportSchema) throw std::invalid_argument("unsupported report schema '" + r.schema + "'");
    r.scenario = j.value("scenario", std::string{});
    r.mode = j.value("mode", std::string{});
    r.config = j.value("config", json::object());
    r.data = j.value("data", json::object());
    r.files = j.value("files", std::vector<std::string>{});
    for (const auto& e : j.value("invariants", json::array())) {
        Invariant i;
        i.name = e.at("name").get<std::string>();
        i.anchor = e.value("anchor", std::string{});
        i.value = from_number(e.at("value"));
        i.bound = from_number(e.at("bound"));
        i.relation = e.value("relation", std::string{"<="}) == ">=" ? Relation::at_least : Relation::at_most;
        i.pass = e.at("pass").get<bool>();
        i.note = e.value("note", std::string{});
        r.invariants.push_back(std::move(i));
    }
    return r;
}

std::string render(const Report& r) {
    std::ostringstream os;
    os << "scenario: " << (r.scenario.empty() ? "-" : r.scenario) << "   mode: " << (r.mode.empty() ? "-" : r.mode)
       << "   schema: " << r.schema << '\n';
    int wn = 9, wa = 6;
    for (const auto& i : r.invariants) {
        wn = std::max(wn, static_cast<int>(i.name.size()));
        wa = std::max(wa, static_cast<int>(i.anchor.size()));
    }
    os << std::left << std::setw(6) << "status" << "  " << std::setw(wn + 2) << "invariant" << std::setw(wa + 2)
       << "anchor" << std::right << std::setw(11) << "value" << "    " << std::setw(11) << "bound" << '\n';
    std::size_t failed = 0;
    for (const auto& i : r.invariants) {
        if (!i.pass) ++failed;
        os << std::left << std::setw(6) << (i.pass ? "pass" : "FAIL") << "  " << std::setw(wn + 2) << i.name
           << std::setw(wa + 2) << i.anchor << std::right << std::setw(11) << std::setprecision(4) << std::scientific
           << i.value << ' ' << (i.relation == Relation::at_most ? "<=" : ">=") << ' ' << std::setw(11) << i.bound
           << std::defaultfloat;
        if (!i.pass) os << "   <-- residual " << i.value << " vs bound " << i.bound;
        os << '\n';
        if (!i.note.empty()) os << "        " << i.note << '\n';
    }
    if (!r.invariants.empty())
        os << r.invariants.size() - failed << '/' << r.invariants.size() << " invariants pass\n";
    return os.str();
}

}  // namespace padicverify
