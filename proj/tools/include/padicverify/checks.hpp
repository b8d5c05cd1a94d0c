#pragma once

#include <cstdint>
#include <vector>

#include "padicpar/cauchy.hpp"
#include "padicpar/function_space.hpp"
#include "padicpar/heat_kernel.hpp"
#include "padicpar/levi.hpp"
#include "padicpar/rng.hpp"

namespace padicverify {

/// Least-squares slope of y against x.
double fitted_slope(const std::vector<double>& x, const std::vector<double>& y);

/// |sum over shells of Z vol - 1|, summed from pointwise values (shells lo..hi
/// plus the ball B_{lo-1} at the origin value).
double kernel_mass_error(const padic::HeatKernel& hk, double t, int lo = -80, int hi = 160);

/// min Z over the shells (and the origin) at each time.
double kernel_min(const padic::HeatKernel& hk, const std::vector<padic::Shell>& shells, const std::vector<double>& times);

/// Random ball decomposition on B_M / B_ell: nested and overlapping pieces with
/// coefficients in [-1, 1].
padic::LocallyConstantFn random_function(int p, int n, int ell, int M, padic::CounterRng& rng, int pieces = 6);

/// max over `cases` random functions of sup |W_direct f - W_fourier f| (cells and exterior).
double w_route_disagreement(int p, int n, double alpha, int cases, std::uint64_t seed, int ell, int M);

/// |∫ W_gamma Z_t| through ball integrals over a large ball.
double w_gamma_z_integral(const padic::HeatKernel& hk, double gamma, double t);

/// Z_t averaged over the cells of B_M / B_ell with its exterior shells.
padic::LocallyConstantFn kernel_function(const padic::HeatKernel& hk, double t, int ell, int M, int table = 48);

/// sup |Z_s * Z_t - Z_{t+s}| relative to sup Z_{t+s}, on cell averages.
double kernel_semigroup_error(const padic::HeatKernel& hk, double t, double s, int ell, int M);

struct InitialGap {
    std::vector<double> times;
    std::vector<double> gaps;
    double slope = 0.0;      // fitted log-log slope
    double c_ratio = 0.0;    // max/min of gap/t
    double c_max = 0.0;      // max of gap/t
};
/// sup |u1(., t) - phi| on t = p^{-k}, k = k_lo..k_hi.
InitialGap initial_gap(const padic::CauchySolver& solver, int k_lo, int k_hi);

/// sup |Z_{t+s} * phi - Z_s * (Z_t * phi)| for the homogeneous solver.
double solver_semigroup_error(const padic::CauchySolver& solver, double t, double s);

/// |u(2 phi, 2 f) - 2 u(phi, f)| relative to sup |u|, plus additivity against a
/// second datum, for the constant-coefficient solver.
double const_linearity_error(const padic::CauchyProblemConst& pb, const padic::LocallyConstantFn& phi2, double t);

/// Product |W_alpha psi| ‖x‖^{alpha - gamma - n} on `shells` exterior shells.
std::vector<double> psi_decay_products(int p, int n, double alpha, int L, double gamma, int M, int shells = 10);

struct WellPosedness {
    std::vector<double> ratios;  // ‖u‖ / (‖phi‖ + ‖f‖) per case
    double fitted_c = 0.0;
    double spread = 0.0;         // max / min ratio
    double linearity = 0.0;      // worst relative defect of u(a g + b h) - a u(g) - b u(h)
};
/// Battery of random nonnegative and signed (phi, f) pairs solved with the
/// variable-coefficient solver at time t.
WellPosedness well_posedness(const padic::FundamentalSolution& fs, double t, double lambda, int cases,
                             std::uint64_t seed);

/// sup over probe pairs of |Lambda - Z| in state masses at mesh pairs.
double degeneration_error(const padic::FundamentalSolution& fs);

struct CkProbe {
    std::size_t t = 0, sigma = 0, tau = 0, x = 0, xi = 0;
    double residual = 0.0;
};
/// Chapman–Kolmogorov residuals at `count` deterministic probes.
std::vector<CkProbe> ck_probes(const padic::FundamentalSolution& fs, int count, std::uint64_t seed);

/// min over mesh pairs (t, 0) of the state-average density of Lambda; and the
/// worst |∫ Lambda - 1| over the same pairs.
struct LambdaSummary {
    double min_density = 0.0;
    double mass_error = 0.0;
};
LambdaSummary lambda_summary(const padic::FundamentalSolution& fs, const std::vector<std::size_t>& t_nodes);

}  // namespace padicverify
