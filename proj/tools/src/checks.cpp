#include "padicverify/checks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace padicverify {

using namespace padic;

namespace {

double ppow(int p, double e) { return std::pow(static_cast<double>(p), e); }

PAdicPoint point_on_shell(int p, int n, int k) {
    // p^{-k} in the first coordinate has norm p^k
    std::vector<PAdicScalar> c;
    Window w{std::min(-16, -k - 1), std::max(15, -k + 1)};
    std::vector<int> d(static_cast<std::size_t>(w.width()), 0);
    d[static_cast<std::size_t>(-k - w.lo)] = 1;
    c.push_back(PAdicScalar::from_digits(p, w, d));
    for (int i = 1; i < n; ++i) c.push_back(PAdicScalar(p, w));
    return PAdicPoint(std::move(c));
}

double sup_abs(const LocallyConstantFn& f, int ext = 48) {
    double m = 0.0;
    for (double x : f.values()) m = std::max(m, std::abs(x));
    for (int k = f.M() + 1; k <= f.M() + ext; ++k) m = std::max(m, std::abs(f.exterior(k)));
    return m;
}

}  // namespace

double fitted_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("slope needs two or more points");
    const double N = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    return (N * sxy - sx * sy) / (N * sxx - sx * sx);
}

double kernel_mass_error(const HeatKernel& hk, double t, int lo, int hi) {
    const int p = hk.prime(), n = hk.dim();
    double m = hk.z(Shell{}, t).value * ball_volume_value(p, lo - 1, n);
    for (int k = lo; k <= hi; ++k) m += hk.z(Shell{k}, t).value * shell_volume_value(p, k, n);
    return std::abs(m - 1.0);
}

double kernel_min(const HeatKernel& hk, const std::vector<Shell>& shells, const std::vector<double>& times) {
    double m = std::numeric_limits<double>::infinity();
    for (double t : times)
        for (const auto& s : shells) m = std::min(m, hk.z(s, t).value);
    return m;
}

LocallyConstantFn random_function(int p, int n, int ell, int M, CounterRng& rng, int pieces) {
    std::vector<Piece> ps;
    for (int i = 0; i < pieces; ++i) {
        const int r = ell + static_cast<int>(rng.below(static_cast<std::uint64_t>(M - ell + 1)));
        std::vector<PAdicScalar> c;
        for (int k = 0; k < n; ++k) {
            Window w{-M, -ell};
            std::vector<int> d(static_cast<std::size_t>(w.width()));
            for (auto& x : d) x = static_cast<int>(rng.below(static_cast<std::uint64_t>(p)));
            c.push_back(PAdicScalar::from_digits(p, w, d));
        }
        ps.push_back(Piece{Ball{PAdicPoint(std::move(c)), r}, 2.0 * rng.uniform01() - 1.0});
    }
    const double tail_c = 2.0 * rng.uniform01() - 1.0;
    return LocallyConstantFn::from_pieces(p, n, ell, M, ps, RadialTail::power(M, 0.0, tail_c));
}

double w_route_disagreement(int p, int n, double alpha, int cases, std::uint64_t seed, int ell, int M) {
    const HeatKernel hk(HeatKernelParams::power(p, n, alpha, 1.0));
    double worst = 0.0;
    for (int i = 0; i < cases; ++i) {
        CounterRng rng(seed, static_cast<std::uint64_t>(i));
        const LocallyConstantFn f = random_function(p, n, ell, M, rng);
        const LocallyConstantFn a = apply_W_direct(hk.params().w, f);
        const LocallyConstantFn b = apply_W_fourier(hk.params().w, [&](int m) { return hk.symbol(m); }, f);
        worst = std::max(worst, sup_diff(a, b, 16));
    }
    return worst;
}

double w_gamma_z_integral(const HeatKernel& hk, double gamma, double t) {
    // the tail beyond B_big is O(p^{-big (gamma - n)})
    const int big = static_cast<int>(std::ceil(40.0 / std::log10(static_cast<double>(hk.prime())) / (gamma - hk.dim())));
    return std::abs(hk.ball_integral_w_gamma_z_s(gamma, big, hk.kappa() * t));
}

LocallyConstantFn kernel_function(const HeatKernel& hk, double t, int ell, int M, int table) {
    const int p = hk.prime(), n = hk.dim();
    // origin cell: mean over B_ell
    const double core = hk.ball_mass(ell, t).inside / ball_volume_value(p, ell, n);
    RadialTail tail;
    tail.M = M;
    for (int k = M + 1; k <= M + table; ++k) tail.table.push_back(hk.z(Shell{k}, t).value);
    const double last = tail.table.back();
    const double s = -(hk.alpha());
    tail.powers.push_back({s, last / ppow(p, (M + table) * s)});
    return LocallyConstantFn::from_radial(
        p, n, ell, M, [&](Shell sh) { return sh ? hk.z(sh, t).value : core; }, tail);
}

double kernel_semigroup_error(const HeatKernel& hk, double t, double s, int ell, int M) {
    const LocallyConstantFn zt = kernel_function(hk, t, ell, M);
    const LocallyConstantFn lhs = convolve_heat(hk, hk.kappa() * s, zt);
    const LocallyConstantFn rhs = kernel_function(hk, t + s, ell, M);
    return sup_diff(lhs, rhs, 16) / sup_abs(rhs, 16);
}

InitialGap initial_gap(const CauchySolver& solver, int k_lo, int k_hi) {
    InitialGap g;
    const int p = solver.kernel().prime();
    std::vector<double> lx, ly;
    double cmin = std::numeric_limits<double>::infinity();
    for (int k = k_lo; k <= k_hi; ++k) {
        const double t = ppow(p, -k);
        const double gap = sup_diff(solver.solve_homogeneous(t), solver.problem().phi);
        g.times.push_back(t);
        g.gaps.push_back(gap);
        lx.push_back(std::log(t));
        ly.push_back(std::log(gap));
        g.c_max = std::max(g.c_max, gap / t);
        cmin = std::min(cmin, gap / t);
    }
    g.slope = fitted_slope(lx, ly);
    g.c_ratio = g.c_max / cmin;
    return g;
}

double solver_semigroup_error(const CauchySolver& solver, double t, double s) {
    const HeatKernel& hk = solver.kernel();
    const LocallyConstantFn once = solver.solve_homogeneous(t + s);
    const LocallyConstantFn twice = convolve_heat(hk, hk.kappa() * s, solver.solve_homogeneous(t));
    return sup_diff(once, twice);
}

double const_linearity_error(const CauchyProblemConst& pb, const LocallyConstantFn& phi2, double t) {
    CauchyProblemConst a = pb, b = pb, c = pb;
    b.phi = phi2;
    c.phi = 2.0 * pb.phi + (-3.0) * phi2;
    c.phi.lambda = std::max(pb.phi.lambda, phi2.lambda);
    if (pb.f) {
        std::vector<LocallyConstantFn> v;
        for (const auto& x : pb.f->values()) v.push_back(2.0 * x);
        c.f = TimeSampledFn(pb.f->times(), v);
        b.f.reset();
    }
    const LocallyConstantFn ua = CauchySolver(a).solve(t);
    const LocallyConstantFn ub = CauchySolver(b).solve(t);
    const LocallyConstantFn uc = CauchySolver(c).solve(t);
    const LocallyConstantFn combo = 2.0 * ua + (-3.0) * ub;
    return sup_diff(uc, combo) / std::max(1.0, sup_abs(uc));
}

std::vector<double> psi_decay_products(int p, int n, double alpha, int L, double gamma, int M, int shells) {
    const LocallyConstantFn psi = build_psi(p, n, L, gamma, M);
    const LocallyConstantFn w = apply_W_direct(RadialProfile::w_power(p, n, alpha), psi);
    std::vector<double> out;
    for (int k = M + 1; k <= M + shells; ++k) out.push_back(std::abs(w.exterior(k)) * ppow(p, k * (alpha - gamma - n)));
    return out;
}

WellPosedness well_posedness(const FundamentalSolution& fs, double t, double lambda, int cases, std::uint64_t seed) {
    const CoefficientField& cf = fs.field();
    const int p = cf.p, n = cf.n, ell = cf.ell(), M = cf.M();
    WellPosedness r;
    struct Case {
        LocallyConstantFn phi;
        TimeSampledFn f;
    };
    auto make = [&](std::uint64_t id) {
        CounterRng rng(seed, id);
        LocallyConstantFn phi = random_function(p, n, ell, M, rng, 4);
        LocallyConstantFn f0 = random_function(p, n, ell, M, rng, 4);
        LocallyConstantFn f1 = random_function(p, n, ell, M, rng, 4);
        if (id % 2 == 0) {
            // nonnegative cases
            for (auto* g : {&phi, &f0, &f1}) {
                for (double& x : g->values()) x = std::abs(x);
                g->set_tail(RadialTail::power(M, 0.0, std::abs(g->exterior(M + 1))));
            }
        }
        return Case{phi, TimeSampledFn({0.0, cf.T}, {f0, f1})};
    };
    std::vector<LocallyConstantFn> us;
    std::vector<Case> cs;
    double lo = std::numeric_limits<double>::infinity();
    for (int i = 0; i < cases; ++i) {
        Case c = make(static_cast<std::uint64_t>(i));
        const LocallyConstantFn u = fs.solve_cauchy_var(c.phi, c.f, t);
        const double data = mlambda_norm(c.phi, lambda) + c.f.mlambda_norm(lambda);
        const double ratio = mlambda_norm(u, lambda) / data;
        r.ratios.push_back(ratio);
        r.fitted_c = std::max(r.fitted_c, ratio);
        lo = std::min(lo, ratio);
        us.push_back(u);
        cs.push_back(std::move(c));
    }
    r.spread = r.fitted_c / lo;
    // u(a g + b h) against a u(g) + b u(h) on consecutive pairs
    for (int i = 0; i + 1 < cases; i += 2) {
        const double a = 0.75, b = -1.25;
        LocallyConstantFn phi = a * cs[i].phi + b * cs[i + 1].phi;
        std::vector<LocallyConstantFn> fv;
        for (std::size_t k = 0; k < cs[i].f.values().size(); ++k)
            fv.push_back(a * cs[i].f.values()[k] + b * cs[i + 1].f.values()[k]);
        const LocallyConstantFn u = fs.solve_cauchy_var(phi, TimeSampledFn(cs[i].f.times(), fv), t);
        const LocallyConstantFn combo = a * us[i] + b * us[i + 1];
        r.linearity = std::max(r.linearity, sup_diff(u, combo, fs.config().exterior_shells) / std::max(1.0, sup_abs(u)));
    }
    return r;
}

double degeneration_error(const FundamentalSolution& fs) {
    const CoefficientField& cf = fs.field();
    if (!cf.all_constant()) throw std::invalid_argument("degeneration check needs constant coefficients");
    const HeatKernel hk(HeatKernelParams::power(cf.p, cf.n, cf.alpha, cf.a0.front()[0]));
    const LocallyConstantFn grid(cf.p, cf.n, cf.ell(), cf.M());
    std::vector<PAdicPoint> pts;
    for (std::size_t c = 0; c < grid.cells(); ++c) pts.push_back(grid.cell_point(c));
    for (int k = cf.M() + 1; k <= cf.M() + 5; ++k) pts.push_back(point_on_shell(cf.p, cf.n, k));
    const auto& mesh = fs.mesh();
    const std::size_t last = mesh.size() - 1, mid = last / 2;
    const std::pair<std::size_t, std::size_t> pairs[] = {{last, 0}, {mid, 0}, {last, mid}, {1, 0}};
    double worst = 0.0;
    for (const auto& [ti, ki] : pairs)
        for (const auto& x : pts)
            for (const auto& xi : pts) {
                const double lam = fs.lambda_eval(x, mesh[ti], xi, mesh[ki]);
                const double z = hk.z((x - xi).norm_exp(), mesh[ti] - mesh[ki]).value;
                worst = std::max(worst, std::abs(lam - z));
            }
    return worst;
}

std::vector<CkProbe> ck_probes(const FundamentalSolution& fs, int count, std::uint64_t seed) {
    const std::size_t last = fs.mesh().size() - 1;
    if (last < 3) throw std::invalid_argument("mesh too small for Chapman-Kolmogorov probes");
    std::vector<CkProbe> out;
    CounterRng rng(seed, 0xC0FFEE);
    const std::size_t near = std::min<std::size_t>(fs.states(), fs.cell_states() + 4);
    for (int i = 0; i < count; ++i) {
        CkProbe pr;
        pr.t = last - rng.below(std::max<std::size_t>(1, last / 4));
        pr.tau = rng.below(std::max<std::size_t>(1, last / 4));
        pr.sigma = pr.tau + 1 + rng.below(pr.t - pr.tau - 1);
        pr.x = rng.below(near);
        pr.xi = rng.below(near);
        pr.residual = chapman_kolmogorov_residual(fs, pr.t, pr.sigma, pr.tau, pr.x, pr.xi);
        out.push_back(pr);
    }
    return out;
}

LambdaSummary lambda_summary(const FundamentalSolution& fs, const std::vector<std::size_t>& t_nodes) {
    LambdaSummary s;
    s.min_density = std::numeric_limits<double>::infinity();
    for (std::size_t ti : t_nodes) {
        const DenseMatrix L = fs.lambda_mass(fs.mesh()[ti], 0);
        for (std::size_t x = 0; x < L.rows; ++x) {
            double row = 0.0;
            for (std::size_t y = 0; y < L.cols; ++y) {
                row += L(x, y);
                s.min_density = std::min(s.min_density, L(x, y) / fs.state_volume(y));
            }
            // only states whose exterior stays well inside the tabulated range
            if (x < fs.cell_states() + static_cast<std::size_t>(fs.config().exterior_shells / 2))
                s.mass_error = std::max(s.mass_error, std::abs(row - 1.0));
        }
    }
    return s;
}

}  // namespace padicverify
