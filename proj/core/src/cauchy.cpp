#include "padicpar/cauchy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace padic {

namespace {

double ppow(int p, double e) { return std::pow(static_cast<double>(p), e); }

// Cell values plus a fixed window of exterior shells; avoids the power lists
// that repeated tail additions would pile up.
struct Accum {
    std::vector<double> cells;
    std::vector<double> ext;

    Accum(const LocallyConstantFn& like, int shells) : cells(like.cells(), 0.0), ext(static_cast<std::size_t>(shells), 0.0) {}

    void add(const LocallyConstantFn& g, double wgt) {
        for (std::size_t i = 0; i < cells.size(); ++i) cells[i] += wgt * g[i];
        for (std::size_t j = 0; j < ext.size(); ++j) ext[j] += wgt * g.exterior(g.M() + 1 + static_cast<int>(j));
    }

    LocallyConstantFn build(const LocallyConstantFn& like, double lambda) const {
        LocallyConstantFn out(like.prime(), like.dim(), like.ell(), like.M());
        out.values() = cells;
        RadialTail t;
        t.M = like.M();
        t.table = ext;
        const std::size_t K = ext.size();
        if (K >= 2) {
            const double v1 = ext[K - 2], v2 = ext[K - 1];
            if (v1 != 0.0 && v2 != 0.0 && (v1 > 0) == (v2 > 0)) {
                const double s = std::log(v2 / v1) / std::log(static_cast<double>(like.prime()));
                t.powers.push_back({s, v2 / ppow(like.prime(), (like.M() + static_cast<int>(K)) * s)});
            }
        }
        out.set_tail(std::move(t));
        out.lambda = lambda;
        out.growth_C = mlambda_norm(out, lambda);
        return out;
    }
};

}  // namespace

TimeSampledFn::TimeSampledFn(std::vector<double> times, std::vector<LocallyConstantFn> values)
    : t_(std::move(times)), v_(std::move(values)) {
    if (t_.empty() || t_.size() != v_.size()) throw std::invalid_argument("time samples and values must match");
    for (std::size_t i = 1; i < t_.size(); ++i) {
        if (!(t_[i] > t_[i - 1])) throw std::invalid_argument("sample times must increase");
        if (!v_[i].same_grid(v_[0])) throw std::invalid_argument("time samples on different grids");
    }
}

TimeSampledFn TimeSampledFn::constant_in_time(LocallyConstantFn f) {
    return TimeSampledFn({0.0}, {std::move(f)});
}

LocallyConstantFn TimeSampledFn::at(double t) const {
    if (t <= t_.front()) return v_.front();
    if (t >= t_.back()) return v_.back();
    const auto it = std::upper_bound(t_.begin(), t_.end(), t);
    const std::size_t i = static_cast<std::size_t>(it - t_.begin()) - 1;
    const double w = (t - t_[i]) / (t_[i + 1] - t_[i]);
    if (w == 0.0) return v_[i];
    return (1.0 - w) * v_[i] + w * v_[i + 1];
}

double TimeSampledFn::lambda() const {
    double l = 0.0;
    for (const auto& v : v_) l = std::max(l, v.lambda);
    return l;
}

double TimeSampledFn::mlambda_norm(double lambda) const { return padic::mlambda_norm(v_, lambda); }

void CauchyProblemConst::validate() const {
    params.validate();
    const double gap = params.alpha - params.n;
    if (!(T > 0.0)) throw std::domain_error("hypothesis T > 0 violated");
    if (phi.prime() != params.p || phi.dim() != params.n) throw std::invalid_argument("initial datum on a different space");
    if (!(phi.lambda < gap)) throw std::domain_error("hypothesis alpha - n > lambda violated by the initial datum");
    if (f) {
        if (!f->values().front().same_grid(phi)) throw std::invalid_argument("source and initial datum on different grids");
        if (!(f->lambda() < gap)) throw std::domain_error("hypothesis alpha - n > lambda violated by the source");
    }
}

CauchySolver::CauchySolver(CauchyProblemConst problem, QuadratureConfig quad, FunctionSpaceConfig fs)
    : pb_(std::move(problem)), quad_(quad), fs_(fs), hk_((pb_.validate(), pb_.params)) {}

double CauchySolver::check_t(double t) const {
    if (!(t > 0.0) || t > pb_.T * (1.0 + 1e-12)) throw std::out_of_range("time outside (0, T]");
    return t;
}

LocallyConstantFn CauchySolver::zero() const {
    LocallyConstantFn z(pb_.phi.prime(), pb_.phi.dim(), pb_.phi.ell(), pb_.phi.M());
    return z;
}

LocallyConstantFn CauchySolver::source(double t) const { return pb_.f ? pb_.f->at(t) : zero(); }

LocallyConstantFn CauchySolver::solve_homogeneous(double t) const {
    check_t(t);
    return convolve_heat(hk_, hk_.kappa() * t, pb_.phi, fs_);
}

// Midpoint rule in u on [0, 1] for sigma = t (e^{cu} - 1) / (e^c - 1), which
// packs nodes near sigma = t - theta = 0 where Z_sigma is concentrated. The
// u-range is split at the sample times of f so every panel sees a smooth
// integrand.
LocallyConstantFn CauchySolver::midpoint(double t, int nodes) const {
    const LocallyConstantFn& like = pb_.phi;
    Accum acc(like, fs_.ext_shells);
    const double amax = hk_.symbol(-like.ell());
    const double c = std::log1p(t * hk_.kappa() * amax);
    const bool linear = c < 1e-8;
    const double em1 = std::expm1(c);
    auto u_of = [&](double sigma) { return linear ? sigma / t : std::log1p(em1 * sigma / t) / c; };
    std::vector<double> cuts{0.0, 1.0};
    for (double ts : pb_.f->times())
        if (ts > 0.0 && ts < t) cuts.push_back(u_of(t - ts));
    std::sort(cuts.begin(), cuts.end());
    for (std::size_t j = 0; j + 1 < cuts.size(); ++j) {
        const double a = cuts[j], b = cuts[j + 1];
        if (!(b > a)) continue;
        const int m = std::max(2, static_cast<int>(std::ceil(nodes * (b - a))));
        const double du = (b - a) / m;
        for (int i = 0; i < m; ++i) {
            const double u = a + (i + 0.5) * du;
            double sigma, dsig;
            if (linear) {
                sigma = t * u;
                dsig = t;
            } else {
                sigma = t * std::expm1(c * u) / em1;
                dsig = t * c * std::exp(c * u) / em1;
            }
            const LocallyConstantFn g = convolve_heat(hk_, hk_.kappa() * sigma, pb_.f->at(t - sigma), fs_);
            acc.add(g, dsig * du);
        }
    }
    return acc.build(like, pb_.f->lambda());
}

LocallyConstantFn CauchySolver::solve_inhomogeneous_fixed(double t, int nodes) const {
    check_t(t);
    if (!pb_.f) return zero();
    // one Richardson step on the midpoint pair (N, 2N)
    LocallyConstantFn a = midpoint(t, nodes);
    LocallyConstantFn b = midpoint(t, 2 * nodes);
    return (4.0 / 3.0) * b - (1.0 / 3.0) * a;
}

LocallyConstantFn CauchySolver::solve_inhomogeneous(double t, QuadratureInfo* info) const {
    check_t(t);
    QuadratureInfo qi;
    if (!pb_.f) {
        if (info) *info = qi;
        return zero();
    }
    int N = quad_.nodes;
    LocallyConstantFn mN = midpoint(t, N);
    LocallyConstantFn m2 = midpoint(t, 2 * N);
    LocallyConstantFn r = (4.0 / 3.0) * m2 - (1.0 / 3.0) * mN;
    qi.nodes = N;
    qi.last_change = sup_diff(mN, m2);
    qi.converged = qi.last_change < quad_.tol;
    for (int d = 0; d < quad_.max_doublings && !qi.converged; ++d) {
        N *= 2;
        mN = std::move(m2);
        m2 = midpoint(t, 2 * N);
        LocallyConstantFn rn = (4.0 / 3.0) * m2 - (1.0 / 3.0) * mN;
        qi.last_change = sup_diff(r, rn);
        qi.nodes = N;
        qi.converged = qi.last_change < quad_.tol;
        r = std::move(rn);
    }
    if (info) *info = qi;
    if (!qi.converged && !info) throw std::runtime_error("time quadrature did not converge");
    return r;
}

LocallyConstantFn CauchySolver::solve(double t) const {
    if (!pb_.f) return solve_homogeneous(t);
    return solve_homogeneous(t) + solve_inhomogeneous(t);
}

double sup_diff(const LocallyConstantFn& a, const LocallyConstantFn& b, int exterior_shells) {
    if (!a.same_grid(b)) throw std::invalid_argument("comparing functions on different grids");
    double d = 0.0;
    for (std::size_t i = 0; i < a.cells(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    for (int k = a.M() + 1; k <= a.M() + exterior_shells; ++k) d = std::max(d, std::abs(a.exterior(k) - b.exterior(k)));
    return d;
}

double residual(const CauchySolver& base, double t, const ResidualConfig& cfg) {
    const double h = cfg.h_rel * std::max(t, 1.0);
    if (!(t > h)) throw std::domain_error("residual needs t > h");
    if (t > base.problem().T * (1.0 + 1e-12)) throw std::out_of_range("time outside (0, T]");
    // the stencil reaches past T
    CauchyProblemConst pb = base.problem();
    pb.T = t + h;
    const CauchySolver solver(std::move(pb));
    const bool src = solver.problem().f.has_value();
    int nodes = 0;
    if (src) {
        QuadratureInfo qi;
        solver.solve_inhomogeneous(t, &qi);
        nodes = qi.nodes;
    }
    // quadrature level frozen so the finite differences see a smooth map of t
    auto u = [&](double s) {
        LocallyConstantFn v = solver.solve_homogeneous(s);
        if (src) v += solver.solve_inhomogeneous_fixed(s, nodes);
        return v;
    };
    const LocallyConstantFn d1 = (1.0 / (2.0 * h)) * (u(t + h) - u(t - h));
    const LocallyConstantFn d2 = (1.0 / h) * (u(t + h / 2) - u(t - h / 2));
    const LocallyConstantFn dudt = (4.0 / 3.0) * d2 - (1.0 / 3.0) * d1;
    const HeatKernel& hk = solver.kernel();
    const LocallyConstantFn wu = hk.kappa() * apply_W_direct(hk.params().w, u(t));
    const LocallyConstantFn f = solver.source(t);
    double r = 0.0;
    for (std::size_t i = 0; i < dudt.cells(); ++i) r = std::max(r, std::abs(dudt[i] - wu[i] - f[i]));
    for (int k = dudt.M() + 1; k <= dudt.M() + cfg.exterior_shells; ++k)
        r = std::max(r, std::abs(dudt.exterior(k) - wu.exterior(k) - f.exterior(k)));
    return r;
}

}  // namespace padic
