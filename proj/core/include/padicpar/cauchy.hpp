#pragma once

#include <optional>
#include <vector>

#include "padicpar/function_space.hpp"
#include "padicpar/heat_kernel.hpp"

namespace padic {

/// f(., theta) given at increasing sample times, linear in theta between them
/// and constant past the ends.
class TimeSampledFn {
public:
    TimeSampledFn(std::vector<double> times, std::vector<LocallyConstantFn> values);
    static TimeSampledFn constant_in_time(LocallyConstantFn f);

    LocallyConstantFn at(double t) const;
    const std::vector<double>& times() const { return t_; }
    const std::vector<LocallyConstantFn>& values() const { return v_; }
    /// Largest growth exponent over the samples.
    double lambda() const;
    double mlambda_norm(double lambda) const;

private:
    std::vector<double> t_;
    std::vector<LocallyConstantFn> v_;
};

struct QuadratureConfig {
    int nodes = 64;          // composite midpoint nodes at the first level
    double tol = 1e-8;       // stop when two levels differ by less than this
    int max_doublings = 6;
};

struct CauchyProblemConst {
    HeatKernelParams params;
    LocallyConstantFn phi;
    std::optional<TimeSampledFn> f;
    double T = 1.0;

    /// Throws std::domain_error naming the failed hypothesis.
    void validate() const;
};

struct QuadratureInfo {
    int nodes = 0;
    double last_change = 0.0;
    bool converged = true;
};

class CauchySolver {
public:
    explicit CauchySolver(CauchyProblemConst problem, QuadratureConfig quad = {}, FunctionSpaceConfig fs = {});

    const CauchyProblemConst& problem() const { return pb_; }
    const HeatKernel& kernel() const { return hk_; }

    /// Z_t * phi.
    LocallyConstantFn solve_homogeneous(double t) const;
    /// Duhamel term; `info` reports the quadrature level reached.
    LocallyConstantFn solve_inhomogeneous(double t, QuadratureInfo* info = nullptr) const;
    /// Same with a fixed number of midpoint nodes (no adaptivity).
    LocallyConstantFn solve_inhomogeneous_fixed(double t, int nodes) const;
    LocallyConstantFn solve(double t) const;

    /// f(., t) on the solution grid (zero when the problem has no source).
    LocallyConstantFn source(double t) const;

private:
    double check_t(double t) const;
    LocallyConstantFn zero() const;
    LocallyConstantFn midpoint(double t, int nodes) const;

    CauchyProblemConst pb_;
    QuadratureConfig quad_;
    FunctionSpaceConfig fs_;
    HeatKernel hk_;
};

struct ResidualConfig {
    double h_rel = 1e-4;     // h = h_rel * max(t, 1)
    int exterior_shells = 8; // exterior shells included in the sup
};

/// sup |du/dt - kappa W u - f| over the cells and the first exterior shells,
/// du/dt by central differences with one Richardson step.
double residual(const CauchySolver& solver, double t, const ResidualConfig& cfg = {});

/// sup over cells and exterior shells of |a - b| (grids must agree).
double sup_diff(const LocallyConstantFn& a, const LocallyConstantFn& b, int exterior_shells = 48);

}  // namespace padic
