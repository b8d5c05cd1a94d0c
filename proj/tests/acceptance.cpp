// Acceptance suite: one line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "padicpar/cauchy.hpp"
#include "padicpar/heat_kernel.hpp"
#include "padicpar/levi.hpp"
#include "padicpar/markov.hpp"
#include "padicverify/checks.hpp"
#include "padicverify/scenario.hpp"

using namespace padic;
using namespace padicverify;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

constexpr int P = 2, N = 1;
constexpr double ALPHA = 2.5, KAPPA = 1.0;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string sci(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", x);
    return buf;
}

// "name value op bound" plus the verdict of that one comparison
struct Line {
    bool ok = true;
    std::string text;
    void at_most(const std::string& what, double v, double bound) {
        const bool p = std::isfinite(v) && v < bound;
        ok = ok && p;
        add(what + " " + sci(v) + (p ? " < " : " !< ") + sci(bound));
    }
    void at_least(const std::string& what, double v, double bound) {
        const bool p = std::isfinite(v) && v >= bound;
        ok = ok && p;
        add(what + " " + sci(v) + (p ? " >= " : " !>= ") + sci(bound));
    }
    void flag(const std::string& what, bool p) {
        ok = ok && p;
        add(what + (p ? " ok" : " FAILED"));
    }
    void add(const std::string& s) { text += (text.empty() ? "" : "; ") + s; }
    Outcome done() const { return {ok, text}; }
};

std::vector<double> kernel_times() {
    std::vector<double> t;
    for (int k = -6; k <= 2; ++k) t.push_back(std::pow(static_cast<double>(P), k));
    return t;
}

// Shared by criteria 8 to 11: the variable-coefficient field with a0 jumping on
// B_{-1}, time-modulated, and one lower-order term of order 1.6.
struct Shared {
    Scenario scenario = load_scenario(json{{"mode", "certify"}});
    std::unique_ptr<FundamentalSolution> fs;
    double build_seconds = 0.0;

    const FundamentalSolution& get() {
        if (!fs) {
            const auto t0 = std::chrono::steady_clock::now();
            LeviConfig cfg = levi_config(scenario);
            cfg.extra_times = {0.25, 0.5};
            fs = std::make_unique<FundamentalSolution>(coefficient_field(scenario), cfg);
            build_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        }
        return *fs;
    }
};

Outcome kernel_mass() {
    const HeatKernel hk(HeatKernelParams::power(P, N, ALPHA, KAPPA));
    double worst = 0.0;
    for (double t : kernel_times()) worst = std::max(worst, kernel_mass_error(hk, t));
    Line l;
    l.at_most("max |∫Z - 1| over t = p^-6..p^2:", worst, 1e-8);
    return l.done();
}

Outcome kernel_positivity() {
    const HeatKernel hk(HeatKernelParams::power(P, N, ALPHA, KAPPA));
    std::vector<Shell> shells;
    for (int k = -20; k < 20; ++k) shells.push_back(k);
    Line l;
    l.at_least("min Z over 40 shells x 9 times:", kernel_min(hk, shells, kernel_times()), -1e-12);
    return l.done();
}

Outcome kernel_decay() {
    const HeatKernel hk(HeatKernelParams::power(P, N, ALPHA, KAPPA));
    CertifyGrid g;
    for (int k = -20; k < 20; ++k) g.shells.push_back(k);
    g.shells.push_back(std::nullopt);
    g.times = scaling_times(P, ALPHA, N, -12, 6);
    g.gamma = ALPHA;
    const CertifyReport r = estimate_certify(hk, g);
    Line l;
    l.at_most("Z constant spread", std::isfinite(r.c_z) ? r.ratio_z() : kInf, 100.0);
    l.at_most("dZ/dt constant spread", std::isfinite(r.c_dt) ? r.ratio_dt() : kInf, 100.0);
    l.at_most("W Z constant spread", std::isfinite(r.c_wz) ? r.ratio_wz() : kInf, 100.0);
    const double slope = decay_slope(hk, 1.0, 10, 30);
    l.at_most("|slope + alpha|", std::abs(slope + ALPHA), 0.05);
    return l.done();
}

Outcome w_routes() {
    Line l;
    const std::pair<int, int> spaces[] = {{2, 1}, {3, 1}, {2, 2}};
    for (const auto& [p, n] : spaces) {
        const int ell = n == 1 ? -3 : -2, M = n == 1 ? 3 : 2;
        const double d = w_route_disagreement(p, n, n + 1.5, 20, 1, ell, M);
        l.at_most("(p,n)=(" + std::to_string(p) + "," + std::to_string(n) + ")", d, 1e-10);
    }
    return l.done();
}

Outcome w_gamma_zero_mean() {
    const HeatKernel hk(HeatKernelParams::power(P, N, ALPHA, KAPPA));
    double worst = 0.0;
    for (double g : {ALPHA, (N + ALPHA) / 2.0})
        for (double t : kernel_times()) worst = std::max(worst, w_gamma_z_integral(hk, g, t));
    Line l;
    l.at_most("max |∫W_gamma Z|, gamma in {alpha, (n+alpha)/2}:", worst, 1e-8);
    return l.done();
}

Outcome const_solver() {
    const int ell = -3, M = 2;
    const LocallyConstantFn phi = LocallyConstantFn::indicator_ball(P, N, ell, M, 0);
    const LocallyConstantFn f = LocallyConstantFn::indicator_ball(P, N, ell, M, 1);
    const HeatKernelParams hp = HeatKernelParams::power(P, N, ALPHA, KAPPA);
    const CauchySolver with_source(CauchyProblemConst{hp, phi, TimeSampledFn::constant_in_time(f), 1.0});
    double res = 0.0;
    for (double t : {0.25, 0.5, 1.0}) res = std::max(res, residual(with_source, t));
    const CauchySolver homog(CauchyProblemConst{hp, phi, std::nullopt, 1.0});
    const InitialGap gap = initial_gap(homog, 4, 10);
    Line l;
    l.at_most("residual", res, 1e-4);
    l.at_least("initial-gap slope", gap.slope, 1.0);
    l.at_most("semigroup", solver_semigroup_error(homog, 0.5, 0.25), 1e-8);
    l.add("gap/t in [" + sci(gap.c_max / gap.c_ratio) + ", " + sci(gap.c_max) + "]");
    return l.done();
}

Outcome const_levi() {
    LeviConfig cfg;
    const FundamentalSolution fs(CoefficientField::constant(P, N, ALPHA, KAPPA, -2, 0, 1.0), cfg);
    Line l;
    l.at_most("sup |Lambda - Z|", degeneration_error(fs), 1e-6);
    return l.done();
}

Outcome levi_certify(Shared& sh) {
    const FundamentalSolution& fs = sh.get();
    const SeriesReport& sr = fs.series();
    double majorant = 0.0;
    for (const auto& t : sr.terms)
        if (t.m >= 1 && t.m < fs.config().majorant_terms) majorant = std::max(majorant, t.majorant_ratio);
    double phires = 0.0;
    const std::size_t last = fs.mesh().size() - 1;
    for (double t : {0.5, 1.0}) phires = std::max(phires, fs.phi_residual(t, 0));
    phires = std::max(phires, fs.phi_residual(fs.mesh()[last], last / 2));
    const LambdaSummary ls = lambda_summary(fs, {fs.node(0.5), last});
    double ck = 0.0;
    for (const auto& pr : ck_probes(fs, 10, 1)) ck = std::max(ck, pr.residual);
    Line l;
    l.at_most("Phi residual", phires, 1e-3);
    l.at_most("majorant ratio m<=8", majorant, 1.0 + 1e-12);
    l.at_most("|∫Lambda - 1|", ls.mass_error, 1e-3);
    l.at_least("min Lambda", ls.min_density, -1e-6);
    l.at_most("CK x10", ck, 1e-2);
    l.add("build " + sci(sh.build_seconds) + " s");
    return l.done();
}

Outcome maximum_principle(Shared& sh) {
    const FundamentalSolution& fs = sh.get();
    const CoefficientField& cf = fs.field();
    const LocallyConstantFn phi = LocallyConstantFn::indicator_ball(cf.p, cf.n, cf.ell(), cf.M(), -1);
    const LocallyConstantFn f = LocallyConstantFn::indicator_ball(cf.p, cf.n, cf.ell(), cf.M(), 0);
    double m = kInf;
    for (double t : {0.25, 0.5, 1.0}) {
        const LocallyConstantFn u = fs.solve_cauchy_var(phi, TimeSampledFn::constant_in_time(f), t);
        for (double x : u.values()) m = std::min(m, x);
        for (int k = u.M() + 1; k <= u.M() + fs.config().exterior_shells; ++k) m = std::min(m, u.exterior(k));
    }
    // gamma below alpha_1 - n so that W_{alpha_1} psi is also controlled
    const double gamma = 0.3;
    const std::vector<double> prod = psi_decay_products(cf.p, cf.n, cf.alpha, 2, gamma, 0, 10);
    const auto [lo, hi] = std::minmax_element(prod.begin(), prod.end());
    Line l;
    l.at_least("min u", m, -1e-6);
    l.at_most("psi product max/min over 10 shells", *lo > 0.0 ? *hi / *lo : kInf, 10.0);
    l.at_most("last-shell change", std::abs(prod.back() / prod[prod.size() - 2] - 1.0), 1e-2);
    return l.done();
}

Outcome well_posed(Shared& sh) {
    const WellPosedness w = well_posedness(sh.get(), 1.0, 0.0, 10, 1);
    Line l;
    l.at_most("linearity", w.linearity, 1e-12);
    l.at_most("fitted C", w.fitted_c, kInf);
    l.add("ratio spread " + sci(w.spread));
    return l.done();
}

Outcome markov(Shared& sh) {
    BatchConfig bc;
    bc.seed = 2024;
    bc.count = 100000;
    bc.times = {0.0, 0.25, 0.5, 1.0};
    bc.window = Window{-80, 31};
    const HeatKernelParams hp = HeatKernelParams::power(P, N, ALPHA, KAPPA);
    const TrajectoryBatch a = simulate(bc, hp);
    const TrajectoryBatch b = simulate(bc, hp);
    double worst = 0.0;
    for (const BallCheck& c : ball_mass_checks(a, HeatKernel(hp), {-3, -2, -1, 0, 1, 2}))
        worst = std::max(worst, c.sigma > 0 ? std::abs(c.empirical - c.exact) / c.sigma : kInf);

    const FundamentalSolution& fs = sh.get();
    BatchConfig vc = bc;
    vc.times = {0.0, 1.0};
    vc.window = Window{-110, 17};
    vc.steps_per_interval = 64;
    const TrajectoryBatch v = simulate(vc, fs.field());
    const LambdaComparison cmp = empirical_vs_lambda(v, fs, 1e-2);
    double vworst = 0.0;
    for (const auto& c : cmp.cells)
        vworst = std::max(vworst, std::abs(c.empirical - c.exact) / (4.0 * c.sigma + c.tolerance));
    Line l;
    l.at_most("ball masses, max |dev|/sigma (6 radii x 3 times)", worst, 4.0);
    l.flag("bitwise reproducibility", a.raw() == b.raw());
    l.at_most("variable cells, |dev|/(4 sigma + 1e-2)", vworst, 1.0);
    return l.done();
}

}  // namespace

int main() {
    Shared shared;
    const std::vector<std::tuple<int, std::string, double, std::function<Outcome()>>> criteria = {
        {1, "kernel mass identity", 5, kernel_mass},
        {2, "kernel positivity", kInf, kernel_positivity},
        {3, "kernel estimates and far-field decay", 30, kernel_decay},
        {4, "operator as Fourier multiplier", 60, w_routes},
        {5, "fractional derivative of kernel has zero mean", kInf, w_gamma_zero_mean},
        {6, "constant-coefficient Cauchy problem", 60, const_solver},
        {7, "constant coefficients reduce to the heat kernel", kInf, const_levi},
        {8, "fundamental solution by the parametrix method", 600, [&] { return levi_certify(shared); }},
        {9, "maximum principle and comparison function", kInf, [&] { return maximum_principle(shared); }},
        {10, "well-posedness estimate", kInf, [&] { return well_posed(shared); }},
        {11, "jump process", 120, [&] { return markov(shared); }},
    };
    int failed = 0;
    for (const auto& [id, name, budget, run] : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        // the shared build is charged to criterion 8, where it happens
        bool ok = o.pass;
        std::string timing = sci(secs) + " s";
        if (std::isfinite(budget)) {
            const bool in_time = secs < budget;
            ok = ok && in_time;
            timing += in_time ? " < " : " !< ";
            timing += sci(budget) + " s";
        }
        if (!ok) ++failed;
        std::printf("[%s] %2d %s: %s (%s)\n", ok ? "PASS" : "FAIL", id, name.c_str(), o.detail.c_str(), timing.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
