#include "padicverify/scenario.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace padicverify {

using namespace padic;

std::string to_string(Mode m) {
    switch (m) {
    case Mode::kernel: return "kernel";
    case Mode::solve_const: return "solve-const";
    case Mode::solve_var: return "solve-var";
    case Mode::simulate: return "simulate";
    case Mode::certify: return "certify";
    }
    return "?";
}

Mode mode_from_string(const std::string& s) {
    for (Mode m : {Mode::kernel, Mode::solve_const, Mode::solve_var, Mode::simulate, Mode::certify})
        if (to_string(m) == s) return m;
    throw ScenarioError("unknown mode '" + s + "' (kernel, solve-const, solve-var, simulate, certify)");
}

namespace {

json indicator_b0() {
    return json{{"pieces", json::array({json{{"center", json::array({"0:"})}, {"radius_exp", 0}, {"coeff", 1.0}}})},
                {"tail", nullptr}};
}

// a0 = 1 + 0.5 on B_{-1}, plus 0.25 sqrt(t); one lower-order term
json default_coefficients() {
    json a0_base{{"pieces", json::array({json{{"center", json::array({"0:"})}, {"radius_exp", -1}, {"coeff", 0.5}}})},
                 {"tail", json{{"M", 0}, {"s", 0.0}, {"c", 1.0}}}};
    a0_base["pieces"].push_back(json{{"center", json::array({"0:"})}, {"radius_exp", 0}, {"coeff", 1.0}});
    return json{{"ell", -2},
                {"M", 0},
                {"time_samples", 65},
                {"a0", json{{"base", a0_base}, {"modulation", json{{"amplitude", 0.25}, {"power", 0.5}}}}},
                {"lower_order", json::array({json{{"alpha", 1.6}, {"base", 0.5}}})},
                {"b", nullptr}};
}

json default_levi() {
    const LeviConfig c;
    return json{{"mesh_nodes", c.mesh_nodes},           {"grading", c.grading},
                {"exterior_shells", c.exterior_shells}, {"series_max", c.series_max},
                {"series_tol", c.series_tol},           {"majorant_terms", c.majorant_terms},
                {"z_panels", c.z_panels}};
}

bool is_prime(int p) {
    if (p < 2) return false;
    for (int d = 2; d * d <= p; ++d)
        if (p % d == 0) return false;
    return true;
}

// every key of `j` must exist in `schema` (objects recursively; null slots take anything)
void reject_unknown(const json& j, const json& schema, const std::string& path) {
    if (!j.is_object() || !schema.is_object()) return;
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!schema.contains(it.key())) throw ScenarioError("unknown key '" + path + it.key() + "'");
        const json& sub = schema[it.key()];
        if (sub.is_object() && !sub.empty() && it.key() != "initial" && it.key() != "source" &&
            it.key() != "coefficients")
            reject_unknown(it.value(), sub, path + it.key() + ".");
    }
}

// like a merge patch, except null is a value (defaults print nulls and must load back)
void merge_into(json& dst, const json& src) {
    for (auto it = src.begin(); it != src.end(); ++it) {
        json& d = dst[it.key()];
        if (d.is_object() && it.value().is_object()) merge_into(d, it.value());
        else d = it.value();
    }
}

void require(bool ok, const std::string& hypothesis, const std::string& detail) {
    if (!ok) throw ScenarioError("hypothesis " + hypothesis + " violated (" + detail + ")");
}

std::string num(double x) {
    std::ostringstream os;
    os << x;
    return os.str();
}

void check_hypotheses(const Scenario& s) {
    const json& pr = s.params();
    const int p = s.p(), n = s.n();
    const double alpha = s.alpha();
    if (!is_prime(p)) throw ScenarioError("p = " + std::to_string(p) + " is not a prime");
    if (n < 1) throw ScenarioError("n must be at least 1");
    require(alpha > n, "alpha > n", "alpha = " + num(alpha) + ", n = " + std::to_string(n));
    const double lambda = pr.at("lambda").get<double>();
    require(lambda >= 0.0 && alpha - n > lambda, "alpha - n > lambda",
            "alpha - n = " + num(alpha - n) + ", lambda = " + num(lambda));
    require(pr.at("kappa").get<double>() > 0.0, "kappa > 0", "kappa = " + num(pr.at("kappa").get<double>()));
    require(pr.at("T").get<double>() > 0.0, "T > 0", "T = " + num(pr.at("T").get<double>()));
    const bool variable = s.mode == Mode::solve_var || s.mode == Mode::certify ||
                          (s.mode == Mode::simulate && !s.resolved.at("coefficients").is_null());
    if (!variable) return;
    const double v = pr.at("v").get<double>();
    const double mu = pr.at("mu").get<double>();
    require(v > 0.0 && v < 1.0, "v in (0, 1)", "v = " + num(v));
    require(mu > 0.0, "mu > 0", "mu = " + num(mu));
    const json& cj = s.resolved.at("coefficients");
    std::vector<double> alphas;
    for (const auto& t : cj.at("lower_order")) alphas.push_back(t.at("alpha").get<double>());
    const double next = n + (alpha - n) * (1.0 - v);
    double prev = n;
    for (std::size_t k = 0; k < alphas.size(); ++k) {
        require(alphas[k] > prev, "n < alpha_1 < ... < alpha_N",
                "alpha_" + std::to_string(k + 1) + " = " + num(alphas[k]));
        prev = alphas[k];
    }
    require(next > prev, "alpha_{N+1} > alpha_N", "alpha_{N+1} = n + (alpha - n)(1 - v) = " + num(next) +
                                                        ", alpha_N = " + num(prev));
    require(next < alpha, "alpha_{N+1} < alpha", "alpha_{N+1} = " + num(next));
}

// growth of the initial datum and the source against the solver's hypothesis
void check_data(const Scenario& s) {
    if (s.mode != Mode::solve_const && s.mode != Mode::solve_var) return;
    const int p = s.p(), n = s.n();
    int ell, M;
    double gap;
    std::string name;
    if (s.mode == Mode::solve_const) {
        ell = s.grid().at("ell").get<int>();
        M = s.grid().at("M").get<int>();
        gap = s.alpha() - n;
        name = "alpha - n > lambda";
    } else {
        const json& cj = s.resolved.at("coefficients");
        ell = cj.at("ell").get<int>();
        M = cj.at("M").get<int>();
        const json& lo = cj.at("lower_order");
        gap = (lo.empty() ? s.alpha() : lo.front().at("alpha").get<double>()) - n;
        name = "lambda + n < alpha_1";
    }
    const double lambda = s.params().at("lambda").get<double>();
    auto growth = [&](const json& j) { return function_from_json(j, p, n, ell, M).lambda; };
    double g = growth(s.resolved.at("initial"));
    const json& src = s.resolved.at("source");
    if (src.is_object() && src.contains("times")) {
        for (const auto& v : src.at("values")) g = std::max(g, growth(v));
    } else if (!src.is_null()) {
        g = std::max(g, growth(src));
    }
    require(g < gap, name, "data growth exponent " + num(g) + ", alpha - n = " + num(s.alpha() - n));
    require(g <= lambda, "data in M_lambda", "data growth exponent " + num(g) + " exceeds lambda = " + num(lambda));
}

}  // namespace

json default_scenario(Mode m) {
    json s{{"schema", 1},
           {"name", "scenario"},
           {"mode", to_string(m)},
           {"seed", 1},
           {"threads", 1},
           {"params", json{{"p", 2}, {"n", 1}, {"alpha", 2.5}, {"kappa", 1.0}, {"lambda", 0.0},
                           {"v", 0.5}, {"mu", 0.5}, {"T", 1.0}}}};
    switch (m) {
    case Mode::kernel:
        s["grid"] = json{{"t_exp_lo", -6},        {"t_exp_hi", 2},         {"shell_lo", -20},
                         {"shell_hi", 19},        {"slope_shell_lo", 10},  {"slope_shell_hi", 30},
                         {"slope_t", 1.0},        {"certify_k_lo", -12},   {"certify_k_hi", 6},
                         {"gammas", nullptr},     {"w_cases", 20},         {"w_ell", -3},
                         {"w_M", 3},              {"semigroup_t", 0.5},    {"semigroup_s", 0.25},
                         {"semigroup_ell", -4},   {"semigroup_M", 2},      {"dump_shell_lo", -10},
                         {"dump_shell_hi", 30}};
        s["tolerances"] = json{{"mass", 1e-8},          {"positivity", 1e-12}, {"stability", 100.0},
                               {"slope", 0.05},         {"w_agreement", 1e-10}, {"w_integral", 1e-8},
                               {"semigroup", 1e-8}};
        break;
    case Mode::solve_const:
        s["grid"] = json{{"ell", -3},         {"M", 2},           {"times", json::array({0.25, 0.5, 1.0})},
                         {"gap_k_lo", 4},      {"gap_k_hi", 10},   {"semigroup_t", 0.5},
                         {"semigroup_s", 0.25}};
        s["quadrature"] = json{{"nodes", 64}, {"tol", 1e-8}, {"max_doublings", 6}};
        s["tolerances"] = json{{"residual", 1e-4},   {"semigroup", 1e-8}, {"linearity", 1e-12},
                               {"gap_slope", 1.0},    {"stability", 100.0}, {"positivity", 1e-12}};
        s["initial"] = indicator_b0();
        s["source"] = nullptr;
        break;
    case Mode::solve_var:
        s["grid"] = json{{"times", json::array({0.5, 1.0})}};
        s["coefficients"] = default_coefficients();
        s["levi"] = default_levi();
        s["tolerances"] = json{{"positivity", 1e-6}, {"linearity", 1e-12}, {"const_agreement", 1e-6}};
        s["initial"] = indicator_b0();
        s["source"] = nullptr;
        break;
    case Mode::certify:
        s["grid"] = json{{"probe_times", json::array({0.5, 1.0})}, {"ck_probes", 10}, {"j_probes", 5}};
        s["coefficients"] = default_coefficients();
        s["levi"] = default_levi();
        s["tolerances"] = json{{"phi_residual", 1e-3},   {"majorant", 1.0},  {"mass", 1e-3},
                               {"positivity", 1e-6},     {"ck", 1e-3},      {"series_truncation", 1e-8},
                               {"degeneration", 1e-6},   {"stability", 100.0}};
        break;
    case Mode::simulate:
        s["grid"] = json{{"count", 10000},
                         {"times", json::array({0.0, 0.25, 0.5, 1.0})},
                         {"window_lo", -80},
                         {"window_hi", 31},
                         {"gammas", json::array({-3, -2, -1, 0, 1, 2})},
                         {"steps_per_interval", 16},
                         {"dump_trajectories", true}};
        s["coefficients"] = nullptr;
        s["levi"] = default_levi();
        s["tolerances"] = json{{"sigmas", 4.0}, {"cell_extra", 1e-2}};
        break;
    }
    return s;
}

Scenario load_scenario(const json& j) {
    if (!j.is_object()) throw ScenarioError("scenario must be a JSON object");
    if (!j.contains("mode")) throw ScenarioError("scenario needs a 'mode'");
    Scenario s;
    s.mode = mode_from_string(j.at("mode").get<std::string>());
    json merged = default_scenario(s.mode);
    reject_unknown(j, merged, "");
    if (j.value("schema", 1) != 1) throw ScenarioError("unsupported scenario schema");
    // simulate: a coefficient block switches to the variable chain
    if (s.mode == Mode::simulate && j.contains("coefficients") && j["coefficients"].is_object()) {
        merged["coefficients"] = default_coefficients();
    }
    merge_into(merged, j);
    s.resolved = std::move(merged);
    s.name = s.resolved.at("name").get<std::string>();
    try {
        check_hypotheses(s);
        if (!s.resolved.value("coefficients", json()).is_null()) coefficient_field(s).validate();
        check_data(s);
    } catch (const ScenarioError&) {
        throw;
    } catch (const std::exception& e) {
        throw ScenarioError(e.what());
    }
    return s;
}

Scenario load_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ScenarioError("cannot read scenario file " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ScenarioError("malformed scenario JSON: " + std::string(e.what()));
    }
    return load_scenario(j);
}

HeatKernelParams kernel_params(const Scenario& s) {
    return HeatKernelParams::power(s.p(), s.n(), s.alpha(), s.params().at("kappa").get<double>());
}

CoefficientField coefficient_field(const Scenario& s) {
    const json& cj = s.resolved.at("coefficients");
    CoefficientField cf;
    cf.p = s.p();
    cf.n = s.n();
    cf.alpha = s.alpha();
    cf.v = s.params().at("v").get<double>();
    cf.mu = s.params().at("mu").get<double>();
    cf.T = s.params().at("T").get<double>();
    const int ell = cj.at("ell").get<int>(), M = cj.at("M").get<int>();
    const int K = cj.at("time_samples").get<int>();
    if (K < 1) throw ScenarioError("time_samples must be positive");
    for (int i = 0; i < K; ++i) cf.times.push_back(K == 1 ? 0.0 : cf.T * i / (K - 1));
    // base function plus amplitude * t^power, sampled on the time grid
    auto sampled = [&](const json& spec) {
        const json base = spec.is_object() && spec.contains("base") ? spec["base"] : spec;
        const LocallyConstantFn f = function_from_json(base, cf.p, cf.n, ell, M);
        double amp = 0.0, pw = 1.0;
        if (spec.is_object() && spec.contains("modulation") && !spec["modulation"].is_null()) {
            amp = spec["modulation"].value("amplitude", 0.0);
            pw = spec["modulation"].value("power", 1.0);
        }
        std::vector<LocallyConstantFn> out;
        for (double t : cf.times) {
            LocallyConstantFn g = f;
            const double add = amp * std::pow(t, pw);
            if (add != 0.0) {
                for (double& x : g.values()) x += add;
                RadialTail tail = g.tail() ? *g.tail() : RadialTail::power(M, 0.0, 0.0);
                for (double& x : tail.table) x += add;
                tail.powers.push_back({0.0, add});
                g.set_tail(tail);
            }
            out.push_back(std::move(g));
        }
        return out;
    };
    cf.a0 = sampled(cj.at("a0"));
    for (const auto& t : cj.at("lower_order")) {
        cf.alphas.push_back(t.at("alpha").get<double>());
        cf.a.push_back(sampled(t));
    }
    if (!cj.at("b").is_null()) cf.b = sampled(cj.at("b"));
    return cf;
}

LeviConfig levi_config(const Scenario& s) {
    const json& l = s.resolved.at("levi");
    LeviConfig c;
    c.mesh_nodes = l.at("mesh_nodes").get<int>();
    c.grading = l.at("grading").get<double>();
    c.exterior_shells = l.at("exterior_shells").get<int>();
    c.series_max = l.at("series_max").get<int>();
    c.series_tol = l.at("series_tol").get<double>();
    c.majorant_terms = l.at("majorant_terms").get<int>();
    c.z_panels = l.at("z_panels").get<int>();
    return c;
}

}  // namespace padicverify
