#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <vector>

#include "padicpar/cauchy.hpp"
#include "padicpar/function_space.hpp"
#include "padicpar/heat_kernel.hpp"

namespace padic {

/// Row-major dense matrix; kept free of Eigen so the public headers are.
struct DenseMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> a;

    DenseMatrix() = default;
    DenseMatrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), a(r * c, fill) {}
    static DenseMatrix identity(std::size_t n);

    double& operator()(std::size_t i, std::size_t j) { return a[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return a[i * cols + j]; }
    double max_abs() const;
    std::vector<double> row_sums() const;
};

DenseMatrix operator*(const DenseMatrix& x, const DenseMatrix& y);
std::vector<double> operator*(const DenseMatrix& x, const std::vector<double>& v);

/// Coefficients of du/dt = a0 W_alpha u + sum_k a_k W_{alpha_k} u - b u + f.
/// Every coefficient is sampled at `times` (piecewise linear in between) and
/// all samples share one cell grid B_M / B_ell; exteriors are radial.
struct CoefficientField {
    int p = 2;
    int n = 1;
    double alpha = 2.5;
    std::vector<double> alphas;  // alpha_1 < ... < alpha_N
    double v = 0.5;              // Hoelder exponent of a0 in t
    double mu = 0.0;             // parabolicity floor
    double T = 1.0;
    std::vector<double> times;
    std::vector<LocallyConstantFn> a0;
    std::vector<std::vector<LocallyConstantFn>> a;  // a[k][i]: a_{k+1} at times[i]
    std::vector<LocallyConstantFn> b;               // empty means b = 0

    int N() const { return static_cast<int>(alphas.size()); }
    double alpha_next() const { return n + (alpha - n) * (1.0 - v); }
    int ell() const { return a0.front().ell(); }
    int M() const { return a0.front().M(); }
    /// sup |a0(x,t) - a0(x,s)| / |t - s|^v over sample pairs.
    double holder_constant() const;
    bool b_zero() const;
    bool all_constant() const;
    /// Throws std::domain_error naming the failed hypothesis.
    void validate() const;

    /// a0 = kappa, no lower-order terms.
    static CoefficientField constant(int p, int n, double alpha, double kappa, int ell, int M, double T);
};

struct LeviConfig {
    int mesh_nodes = 48;                 // graded time mesh on [0, T]
    double grading = 2.0;                // u^q / (u^q + (1-u)^q)
    std::vector<double> extra_times;     // merged into the mesh
    int exterior_shells = 40;            // exterior states past B_M
    int series_max = 40;                 // hard cap on terms of the Phi series
    double series_tol = 1e-14;           // stop when sup|R_m| < tol * sup|Phi|
    int majorant_terms = 9;               // majorant index m = 0 .. majorant_terms - 1
    int z_panels = 12;                   // geometric panels for the Z-part time integrals
};

struct SeriesTerm {
    int m = 0;                 // term R_{m+1}
    double sup_mass = 0.0;     // sup over mesh pairs of |R_{m+1}| in mass form
    double sup_density = 0.0;
    double majorant_ratio = 0.0;  // sup |R_{m+1}| / majorant(m), C fitted at m = 0
};

struct SeriesReport {
    double majorant_constant = 0.0;
    std::vector<SeriesTerm> terms;
    int terms_used = 0;
    bool converged = false;
};

/// Fundamental solution by Levi's method on a lumped state space: the cells of
/// B_M / B_ell and the exterior shells M+1 .. M+K. Coefficients are constant
/// on states and every kernel is radial, so the state masses
/// K(S, S') = ∫_{S'} K(x - xi) dxi do not depend on x in S and the integral
/// equations close exactly on the states; only time is discretised.
class FundamentalSolution {
public:
    FundamentalSolution(CoefficientField cf, LeviConfig cfg = {});
    ~FundamentalSolution();
    FundamentalSolution(FundamentalSolution&&) noexcept;
    FundamentalSolution& operator=(FundamentalSolution&&) noexcept;

    const CoefficientField& field() const;
    const LeviConfig& config() const;
    const std::vector<double>& mesh() const;
    /// Mesh index of t; throws if t is not a mesh node.
    std::size_t node(double t) const;

    std::size_t states() const;
    std::size_t cell_states() const;
    double state_volume(std::size_t s) const;
    /// Shell of the state's points (nullopt for the origin cell).
    Shell state_shell(std::size_t s) const;
    std::size_t state_of(const PAdicPoint& x) const;
    /// Smallest ‖x - xi‖ exponent over x in S, xi in S' (nullopt: distance 0).
    Shell min_distance(std::size_t s, std::size_t s2) const;

    /// Coefficient values on the states at time t.
    std::vector<double> a0_at(double t) const;

    // State-mass matrices; rows are x-states, columns xi-states.
    DenseMatrix z_mass(double t, double tau) const;
    DenseMatrix r_mass(double t, double tau) const;
    DenseMatrix phi_mass(double t, std::size_t tau_node) const;
    DenseMatrix w_mass(double t, std::size_t tau_node) const;
    DenseMatrix lambda_mass(double t, std::size_t tau_node) const;

    /// Lambda(x,t,xi,tau): exact frozen kernel plus the state average of W.
    double lambda_eval(const PAdicPoint& x, double t, const PAdicPoint& xi, double tau) const;
    /// Z(x - xi, t - tau; xi, tau).
    double z_eval(const PAdicPoint& x, double t, const PAdicPoint& xi, double tau) const;

    const SeriesReport& series() const;

    /// |Phi - R - ∫ R Phi| in mass form, the time integral on a mesh refined
    /// `refine` times; divided by max(1, sup|Phi|).
    double phi_residual(double t, std::size_t tau_node, int refine = 4) const;
    /// Direct discrete solve of the Phi equation vs the summed series.
    double series_truncation() const;

    /// ∫ Lambda(x,t,xi,tau) dxi per x-state.
    std::vector<double> mass(double t, std::size_t tau_node) const;

    /// u = ∫ Lambda(.,t,xi,0) phi + ∫∫ Lambda f. Data must be constant on states.
    LocallyConstantFn solve_cauchy_var(const LocallyConstantFn& phi, const std::optional<TimeSampledFn>& f,
                                       double t) const;
    /// ∫_tau^t ∫ Z(x - y, t - theta; y, theta) f(y, theta) dy dtheta.
    LocallyConstantFn heat_potential(const TimeSampledFn& f, double t, double tau) const;
    /// f(x,t) + ∫_tau^t ∫ dZ/dt f, the claimed time derivative of the potential.
    LocallyConstantFn heat_potential_dt(const TimeSampledFn& f, double t, double tau) const;

    /// Values of a state-constant function; throws if it is not.
    std::vector<double> to_states(const LocallyConstantFn& g) const;
    LocallyConstantFn from_states(const std::vector<double>& v) const;

private:
    struct Impl;
    std::unique_ptr<Impl> d_;
};

/// Chapman–Kolmogorov residual |L(t,tau) - L(t,sigma) L(sigma,tau)| / L(t,tau)
/// at one state pair (mesh nodes).
double chapman_kolmogorov_residual(const FundamentalSolution& fs, std::size_t t, std::size_t sigma, std::size_t tau,
                                   std::size_t x_state, std::size_t xi_state);

struct JBoundResult {
    double j = 0.0;         // numeric J
    double bound = 0.0;     // right-hand side without the unspecified constant
    double ratio() const { return bound > 0.0 ? j / bound : 0.0; }
};

/// J(x, xi, t, tau) for the two-factor time-space integral and the Beta-function
/// majorant (constant factor excluded). `dist` is the shell of x - xi.
JBoundResult j_bound(Shell dist, double t, double tau, double rho, double sigma, double b1, double b2, double beta,
                     int p, int n);

}  // namespace padic
