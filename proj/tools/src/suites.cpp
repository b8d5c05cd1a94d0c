#include "padicverify/suites.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>

#include "padicpar/cauchy.hpp"
#include "padicpar/heat_kernel.hpp"
#include "padicpar/levi.hpp"
#include "padicpar/markov.hpp"
#include "padicverify/checks.hpp"

namespace padicverify {

using namespace padic;
namespace fs = std::filesystem;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double ppow(int p, double e) { return std::pow(static_cast<double>(p), e); }

struct Out {
    fs::path dir;
    Report* rep;
    std::ofstream open(const std::string& name) {
        rep->files.push_back(name);
        std::ofstream os(dir / name);
        if (!os) throw std::runtime_error("cannot write " + (dir / name).string());
        os.precision(17);
        return os;
    }
};

std::vector<double> doubles(const json& j) { return j.get<std::vector<double>>(); }

bool nonnegative(const LocallyConstantFn& f) {
    for (double x : f.values())
        if (x < 0.0) return false;
    for (int k = f.M() + 1; k <= f.M() + 48; ++k)
        if (f.exterior(k) < 0.0) return false;
    return true;
}

double min_value(const LocallyConstantFn& f, int ext) {
    double m = kInf;
    for (double x : f.values()) m = std::min(m, x);
    for (int k = f.M() + 1; k <= f.M() + ext; ++k) m = std::min(m, f.exterior(k));
    return m;
}

// null, a function, or {"times": [...], "values": [functions]}
std::optional<TimeSampledFn> source_from_json(const json& j, int p, int n, int ell, int M) {
    if (j.is_null()) return std::nullopt;
    if (j.is_object() && j.contains("times")) {
        std::vector<LocallyConstantFn> v;
        for (const auto& e : j.at("values")) v.push_back(function_from_json(e, p, n, ell, M));
        return TimeSampledFn(doubles(j["times"]), std::move(v));
    }
    return TimeSampledFn::constant_in_time(function_from_json(j, p, n, ell, M));
}

void write_solution(std::ostream& os, const std::vector<double>& times, const std::vector<LocallyConstantFn>& us,
                    int ext) {
    os << "cell_id,t,value\n";
    for (std::size_t i = 0; i < times.size(); ++i) {
        const LocallyConstantFn& u = us[i];
        for (std::size_t c = 0; c < u.cells(); ++c) os << c << ',' << times[i] << ',' << u[c] << '\n';
        for (int k = u.M() + 1; k <= u.M() + ext; ++k) os << "shell:" << k << ',' << times[i] << ',' << u.exterior(k) << '\n';
    }
}

void run_kernel(const Scenario& s, Report& rep, Out& out) {
    const json& g = s.grid();
    const HeatKernel hk(kernel_params(s));
    const int p = s.p(), n = s.n();
    const double alpha = s.alpha();
    std::vector<double> times;
    for (int k = g.at("t_exp_lo").get<int>(); k <= g.at("t_exp_hi").get<int>(); ++k) times.push_back(ppow(p, k));

    double mass = 0.0;
    for (double t : times) mass = std::max(mass, kernel_mass_error(hk, t));
    rep.check("kernel mass", "kernel mass identity", mass, s.tol("mass"));

    std::vector<Shell> shells;
    for (int k = g.at("shell_lo").get<int>(); k <= g.at("shell_hi").get<int>(); ++k) shells.push_back(k);
    rep.check("kernel positivity", "kernel positivity", kernel_min(hk, shells, times), -s.tol("positivity"),
              Relation::at_least);

    CertifyGrid cg;
    cg.shells = shells;
    cg.shells.push_back(std::nullopt);
    cg.times = scaling_times(p, alpha, n, g.at("certify_k_lo").get<int>(), g.at("certify_k_hi").get<int>());
    cg.gamma = alpha;
    const CertifyReport cr = estimate_certify(hk, cg);
    auto finite_ratio = [](double c, double ratio) { return std::isfinite(c) ? ratio : kInf; };
    rep.check("Z bound constant stability", "kernel upper bound", finite_ratio(cr.c_z, cr.ratio_z()), s.tol("stability"));
    rep.check("dZ/dt bound constant stability", "kernel time-derivative bound", finite_ratio(cr.c_dt, cr.ratio_dt()),
              s.tol("stability"));
    rep.check("W_gamma Z bound constant stability", "fractional derivative of kernel bound",
              finite_ratio(cr.c_wz, cr.ratio_wz()), s.tol("stability"));
    json dec = json::array();
    for (const auto& d : cr.decades) dec.push_back({{"decade", d.decade}, {"c_z", d.c_z}, {"c_dt", d.c_dt}, {"c_wz", d.c_wz}});
    rep.data["estimate_constants"] = {{"samples", cr.samples},
                                      {"c_z", cr.c_z},
                                      {"c_dt", cr.c_dt},
                                      {"c_wz", cr.c_wz},
                                      {"c_dt_small_time", cr.c_dt_small_time},
                                      {"c_dt_far", cr.c_dt_far},
                                      {"decades", dec}};

    const double slope = decay_slope(hk, g.at("slope_t").get<double>(), g.at("slope_shell_lo").get<int>(),
                                     g.at("slope_shell_hi").get<int>());
    rep.check("large-distance decay slope", "kernel far-field decay", std::abs(slope + alpha), s.tol("slope"),
              Relation::at_most, "fitted slope " + std::to_string(slope));
    rep.data["decay_slope"] = slope;

    rep.check("W direct vs Fourier", "operator as Fourier multiplier",
              w_route_disagreement(p, n, alpha, g.at("w_cases").get<int>(), s.seed(), g.at("w_ell").get<int>(),
                                   g.at("w_M").get<int>()),
              s.tol("w_agreement"));

    std::vector<double> gammas{alpha, (n + alpha) / 2.0};
    if (!g.at("gammas").is_null()) gammas = doubles(g["gammas"]);
    double wint = 0.0;
    for (double gam : gammas)
        for (double t : times) wint = std::max(wint, w_gamma_z_integral(hk, gam, t));
    rep.check("W_gamma Z integral", "fractional derivative of kernel has zero mean", wint, s.tol("w_integral"));

    rep.check("kernel semigroup", "heat semigroup property",
              kernel_semigroup_error(hk, g.at("semigroup_t").get<double>(), g.at("semigroup_s").get<double>(),
                                     g.at("semigroup_ell").get<int>(), g.at("semigroup_M").get<int>()),
              s.tol("semigroup"));

    std::vector<int> dump;
    for (int k = g.at("dump_shell_lo").get<int>(); k <= g.at("dump_shell_hi").get<int>(); ++k) dump.push_back(k);
    {
        auto os = out.open("kernel.csv");
        write_kernel_csv(os, hk, dump, times, alpha);
    }
    {
        auto os = out.open("decay.csv");
        os << "t,log_norm,log_z\n";
        for (double t : times)
            for (int k : dump) {
                const double z = hk.z(Shell{k}, t).value;
                if (z > 0.0) os << t << ',' << k * std::log(static_cast<double>(p)) << ',' << std::log(z) << '\n';
            }
    }
}

CauchyProblemConst const_problem(const Scenario& s) {
    const json& g = s.grid();
    const int p = s.p(), n = s.n(), ell = g.at("ell").get<int>(), M = g.at("M").get<int>();
    return CauchyProblemConst{kernel_params(s), function_from_json(s.resolved.at("initial"), p, n, ell, M),
                              source_from_json(s.resolved.at("source"), p, n, ell, M),
                              s.params().at("T").get<double>()};
}

void run_solve_const(const Scenario& s, Report& rep, Out& out) {
    const json& g = s.grid();
    const json& q = s.resolved.at("quadrature");
    const CauchyProblemConst pb = const_problem(s);
    QuadratureConfig qc;
    qc.nodes = q.at("nodes").get<int>();
    qc.tol = q.at("tol").get<double>();
    qc.max_doublings = q.at("max_doublings").get<int>();
    const CauchySolver solver(pb, qc);
    const std::vector<double> times = doubles(g.at("times"));

    double res = 0.0;
    std::vector<LocallyConstantFn> us;
    for (double t : times) {
        res = std::max(res, residual(solver, t));
        us.push_back(solver.solve(t));
    }
    rep.check("PDE residual", "solution of the constant-coefficient problem", res, s.tol("residual"));

    rep.check("solver semigroup", "semigroup consistency of the homogeneous part",
              solver_semigroup_error(solver, g.at("semigroup_t").get<double>(), g.at("semigroup_s").get<double>()),
              s.tol("semigroup"));

    CounterRng rng(s.seed(), 77);
    const LocallyConstantFn phi2 = random_function(pb.phi.prime(), pb.phi.dim(), pb.phi.ell(), pb.phi.M(), rng);
    rep.check("solution map linearity", "linearity of the solution map", const_linearity_error(pb, phi2, times.back()),
              s.tol("linearity"));

    const InitialGap gap = initial_gap(solver, g.at("gap_k_lo").get<int>(), g.at("gap_k_hi").get<int>());
    rep.check("initial gap slope", "initial condition rate", gap.slope, s.tol("gap_slope"), Relation::at_least,
              "sup|u1 - phi| fitted against t on a log-log grid");
    rep.check("initial gap linear constant", "initial condition rate", gap.c_ratio, s.tol("stability"),
              Relation::at_most, "max/min of sup|u1 - phi| / t");
    rep.data["initial_gap"] = {{"times", gap.times}, {"gaps", gap.gaps}, {"slope", gap.slope}, {"c_max", gap.c_max}};

    bool data_nonneg = nonnegative(pb.phi);
    if (pb.f)
        for (const auto& v : pb.f->values()) data_nonneg = data_nonneg && nonnegative(v);
    if (data_nonneg) {
        double m = kInf;
        for (const auto& u : us) m = std::min(m, min_value(u, 48));
        rep.check("solution nonnegativity", "positivity of the solution operator", m, -s.tol("positivity"),
                  Relation::at_least);
    }
    auto os = out.open("solution.csv");
    write_solution(os, times, us, 8);
}

FundamentalSolution build_fs(const Scenario& s, const std::vector<double>& extra) {
    CoefficientField cf = coefficient_field(s);
    LeviConfig cfg = levi_config(s);
    for (double t : extra)
        if (t > 0.0) cfg.extra_times.push_back(t);
    return FundamentalSolution(std::move(cf), cfg);
}

void record_series(const FundamentalSolution& fsol, Report& rep) {
    const SeriesReport& sr = fsol.series();
    rep.data["series"] = {{"majorant_constant", sr.majorant_constant},
                          {"terms_used", sr.terms_used},
                          {"converged", sr.converged},
                          {"holder_constant", fsol.field().holder_constant()},
                          {"states", fsol.states()},
                          {"mesh_nodes", fsol.mesh().size()}};
}

void run_solve_var(const Scenario& s, Report& rep, Out& out) {
    const std::vector<double> times = doubles(s.grid().at("times"));
    const FundamentalSolution fsol = build_fs(s, times);
    const CoefficientField& cf = fsol.field();
    record_series(fsol, rep);
    const LocallyConstantFn phi = function_from_json(s.resolved.at("initial"), cf.p, cf.n, cf.ell(), cf.M());
    const auto f = source_from_json(s.resolved.at("source"), cf.p, cf.n, cf.ell(), cf.M());
    const int ext = fsol.config().exterior_shells;
    std::vector<LocallyConstantFn> us;
    for (double t : times) us.push_back(fsol.solve_cauchy_var(phi, f, t));

    bool data_nonneg = nonnegative(phi);
    if (f)
        for (const auto& v : f->values()) data_nonneg = data_nonneg && nonnegative(v);
    if (data_nonneg && cf.b.empty()) {
        double m = kInf;
        for (const auto& u : us) m = std::min(m, min_value(u, ext));
        rep.check("maximum principle", "nonnegative data give nonnegative solutions", m, -s.tol("positivity"),
                  Relation::at_least);
    }

    {
        CounterRng rng(s.seed(), 91);
        const LocallyConstantFn g2 = random_function(cf.p, cf.n, cf.ell(), cf.M(), rng, 4);
        const double t = times.back();
        const LocallyConstantFn u2 = fsol.solve_cauchy_var(g2, std::nullopt, t);
        const LocallyConstantFn combo = fsol.solve_cauchy_var(2.0 * phi + (-0.5) * g2, f ? std::optional(*f) : std::nullopt, t);
        LocallyConstantFn expect = 2.0 * fsol.solve_cauchy_var(phi, std::nullopt, t) + (-0.5) * u2;
        if (f) expect += fsol.solve_cauchy_var(0.0 * phi, f, t);
        double scale = 1.0;
        for (double x : combo.values()) scale = std::max(scale, std::abs(x));
        rep.check("solution map linearity", "linearity of the solution map", sup_diff(combo, expect, ext) / scale,
                  s.tol("linearity"));
    }

    if (cf.all_constant()) {
        const CauchySolver cs(
            CauchyProblemConst{HeatKernelParams::power(cf.p, cf.n, cf.alpha, cf.a0.front()[0]), phi, f, cf.T});
        double d = 0.0;
        for (std::size_t i = 0; i < times.size(); ++i) d = std::max(d, sup_diff(us[i], cs.solve(times[i]), 8));
        rep.check("agreement with constant-coefficient solver", "constant coefficients reduce to the heat kernel", d,
                  s.tol("const_agreement"));
    }
    auto os = out.open("solution.csv");
    write_solution(os, times, us, 8);
}

void run_certify(const Scenario& s, Report& rep, Out& out) {
    const json& g = s.grid();
    const std::vector<double> probes = doubles(g.at("probe_times"));
    const FundamentalSolution fsol = build_fs(s, probes);
    const CoefficientField& cf = fsol.field();
    record_series(fsol, rep);
    const SeriesReport& sr = fsol.series();

    double worst = 0.0;
    for (const auto& t : sr.terms)
        if (t.m >= 1 && t.m < fsol.config().majorant_terms) worst = std::max(worst, t.majorant_ratio);
    rep.check("series majorant", "successive approximations majorant", worst, s.tol("majorant"), Relation::at_most,
              "sup |R_{m+1}| / majorant(m) for 1 <= m < " + std::to_string(fsol.config().majorant_terms) +
                  ", constant fitted at m = 0");

    std::vector<std::size_t> nodes;
    for (double t : probes) nodes.push_back(fsol.node(t));
    double phires = 0.0;
    for (std::size_t k : nodes) phires = std::max(phires, fsol.phi_residual(fsol.mesh()[k], 0));
    const std::size_t last = fsol.mesh().size() - 1;
    phires = std::max(phires, fsol.phi_residual(fsol.mesh()[last], last / 2));
    rep.check("Phi integral equation residual", "integral equation for the series density", phires,
              s.tol("phi_residual"));

    rep.check("series truncation", "convergence of successive approximations", fsol.series_truncation(),
              s.tol("series_truncation"));

    const LambdaSummary ls = lambda_summary(fsol, nodes);
    if (cf.b_zero())
        rep.check("fundamental solution mass", "mass conservation without killing", ls.mass_error, s.tol("mass"));
    bool lower_nonneg = cf.b_zero();
    for (const auto& ak : cf.a)
        for (const auto& f : ak) lower_nonneg = lower_nonneg && nonnegative(f);
    if (lower_nonneg)
        rep.check("fundamental solution nonnegativity", "nonnegativity of the fundamental solution", ls.min_density,
                  -s.tol("positivity"), Relation::at_least);

    if (cf.b_zero()) {
        const auto ck = ck_probes(fsol, g.at("ck_probes").get<int>(), s.seed());
        double w = 0.0;
        json pr = json::array();
        for (const auto& c : ck) {
            w = std::max(w, c.residual);
            pr.push_back({{"t", fsol.mesh()[c.t]}, {"sigma", fsol.mesh()[c.sigma]}, {"tau", fsol.mesh()[c.tau]},
                          {"x_state", c.x}, {"xi_state", c.xi}, {"residual", c.residual}});
        }
        rep.check("Chapman-Kolmogorov", "transition property of the fundamental solution", w, s.tol("ck"));
        rep.data["ck_probes"] = pr;
    }

    if (cf.all_constant())
        rep.check("constant-coefficient degeneration", "constant coefficients reduce to the heat kernel",
                  degeneration_error(fsol), s.tol("degeneration"));

    // two-factor time-space integral against its Beta-function majorant
    {
        const double beta = cf.alpha - cf.n;
        json jp = json::array();
        double lo = kInf, hi = 0.0;
        const Shell dists[] = {std::nullopt, Shell{-2}, Shell{0}, Shell{2}, Shell{4}};
        const int count = std::min(5, g.at("j_probes").get<int>());
        for (int i = 0; i < count; ++i) {
            const JBoundResult r = j_bound(dists[i], 1.0, 0.0, 0.3, 0.3, 0.5, 0.5, beta, cf.p, cf.n);
            lo = std::min(lo, r.ratio());
            hi = std::max(hi, r.ratio());
            jp.push_back({{"dist_shell", dists[i] ? json(*dists[i]) : json("origin")}, {"j", r.j}, {"bound", r.bound},
                          {"ratio", r.ratio()}});
        }
        rep.data["j_integral"] = jp;
        rep.check("J majorant ratio stability", "two-factor time-space integral bound", count > 0 ? hi / lo : 1.0,
                  s.tol("stability"), Relation::at_most, "the majorant's constant is not explicit; its ratio must stay bounded");
    }

    {
        auto os = out.open("series.csv");
        os << "m,sup_mass,sup_density,majorant_ratio\n";
        for (const auto& t : sr.terms) os << t.m << ',' << t.sup_mass << ',' << t.sup_density << ',' << t.majorant_ratio << '\n';
    }
    {
        auto os = out.open("lambda.csv");
        os << "t,x_state,xi_state,mass\n";
        for (std::size_t k : nodes) {
            const DenseMatrix L = fsol.lambda_mass(fsol.mesh()[k], 0);
            for (std::size_t x = 0; x < L.rows; ++x)
                for (std::size_t y = 0; y < L.cols; ++y) os << fsol.mesh()[k] << ',' << x << ',' << y << ',' << L(x, y) << '\n';
        }
    }
}

void run_simulate(const Scenario& s, Report& rep, Out& out) {
    const json& g = s.grid();
    BatchConfig bc;
    bc.seed = s.seed();
    bc.count = g.at("count").get<std::size_t>();
    bc.times = doubles(g.at("times"));
    bc.window = Window{g.at("window_lo").get<int>(), g.at("window_hi").get<int>()};
    bc.threads = s.threads();
    bc.steps_per_interval = g.at("steps_per_interval").get<int>();
    const std::vector<int> gammas = g.at("gammas").get<std::vector<int>>();
    const bool variable = !s.resolved.at("coefficients").is_null();

    std::optional<FundamentalSolution> fsol;
    std::optional<TrajectoryBatch> batch, again;
    if (variable) {
        fsol.emplace(build_fs(s, bc.times));
        batch.emplace(simulate(bc, fsol->field()));
        again.emplace(simulate(bc, fsol->field()));
    } else {
        const HeatKernelParams hp = kernel_params(s);
        batch.emplace(simulate(bc, hp));
        again.emplace(simulate(bc, hp));
        const HeatKernel hk(hp);
        const auto checks = ball_mass_checks(*batch, hk, gammas);
        double worst = 0.0;
        json rows = json::array();
        for (const auto& c : checks) {
            const double z = c.sigma > 0.0 ? std::abs(c.empirical - c.exact) / c.sigma : (c.empirical == c.exact ? 0.0 : kInf);
            worst = std::max(worst, z);
            rows.push_back({{"t", c.t}, {"gamma", c.gamma}, {"empirical", c.empirical}, {"exact", c.exact}, {"sigma", c.sigma}});
        }
        rep.check("ball masses", "transition law of the jump process", worst, s.tol("sigmas"), Relation::at_most,
                  "largest |empirical - exact| / sigma");
        rep.data["ball_checks"] = rows;
    }
    std::size_t diff = 0;
    for (std::size_t i = 0; i < batch->raw().size(); ++i) diff += batch->raw()[i] != again->raw()[i];
    rep.check("bitwise reproducibility", "deterministic seeding", static_cast<double>(diff), 0.0);

    if (variable) {
        const LambdaComparison cmp = empirical_vs_lambda(*batch, *fsol, s.tol("cell_extra"));
        double worst = 0.0;
        json rows = json::array();
        for (const auto& c : cmp.cells) {
            worst = std::max(worst, std::abs(c.empirical - c.exact) / (s.tol("sigmas") * c.sigma + c.tolerance));
            if (c.exact > 1e-6 || c.empirical > 0.0)
                rows.push_back({{"state", c.state}, {"empirical", c.empirical}, {"exact", c.exact}, {"sigma", c.sigma}});
        }
        rep.check("cell masses vs fundamental solution", "jump process realises the fundamental solution", worst, 1.0,
                  Relation::at_most, "largest |empirical - exact| / (k sigma + tolerance)");
        rep.data["cell_checks"] = rows;
        rep.data["ck_residual"] = cmp.ck_residual;
    }

    // max-norm quantiles of the displacement along the grid, no bound asserted
    json q = json::array();
    std::vector<double> running(batch->count(), 0.0);
    for (std::size_t k = 1; k < batch->times().size(); ++k) {
        for (std::size_t i = 0; i < batch->count(); ++i) {
            const Shell sh = batch->displacement_shell(i, k);
            if (sh) running[i] = std::max(running[i], ppow(batch->prime(), *sh));
        }
        std::vector<double> v = running;
        std::sort(v.begin(), v.end());
        auto at = [&](double f) { return v[std::min(v.size() - 1, static_cast<std::size_t>(f * v.size()))]; };
        q.push_back({{"t", batch->times()[k]}, {"q50", at(0.5)}, {"q90", at(0.9)}, {"q99", at(0.99)}});
    }
    rep.data["max_norm_quantiles"] = q;

    if (g.at("dump_trajectories").get<bool>()) {
        auto os = out.open("trajectories.csv");
        batch->write_csv(os);
    }
    {
        const int glo = *std::min_element(gammas.begin(), gammas.end());
        const int ghi = *std::max_element(gammas.begin(), gammas.end());
        const TransitionHistogram h = histogram(*batch, batch->times().size() - 1, glo, ghi);
        auto os = out.open("histogram.json");
        os << json{{"p", h.p}, {"n", h.n}, {"gamma", h.gamma}, {"M", h.M}, {"t", batch->times().back()},
                   {"counts", h.counts}, {"total", h.total}}
                  .dump(1)
           << '\n';
    }
}

}  // namespace

std::string default_out_dir() {
    const char* e = std::getenv("PADICPAR_OUT_DIR");
    return e && *e ? std::string(e) : std::string("padicpar-out");
}

Report run_scenario(Scenario s, const RunOptions& opt) {
    if (opt.seed) s.resolved["seed"] = *opt.seed;
    if (opt.threads) s.resolved["threads"] = *opt.threads;
    Report rep;
    rep.scenario = s.name;
    rep.mode = to_string(s.mode);
    rep.config = s.resolved;
    const fs::path dir = opt.out_dir.empty() ? fs::path(default_out_dir()) : fs::path(opt.out_dir);
    fs::create_directories(dir);
    Out out{dir, &rep};
    switch (s.mode) {
    case Mode::kernel: run_kernel(s, rep, out); break;
    case Mode::solve_const: run_solve_const(s, rep, out); break;
    case Mode::solve_var: run_solve_var(s, rep, out); break;
    case Mode::certify: run_certify(s, rep, out); break;
    case Mode::simulate: run_simulate(s, rep, out); break;
    }
    rep.files.push_back("report.json");
    std::ofstream os(dir / "report.json");
    os << to_json(rep).dump(2) << '\n';
    return rep;
}

}  // namespace padicverify
