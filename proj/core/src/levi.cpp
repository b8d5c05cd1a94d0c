#include "padicpar/levi.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <stdexcept>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "padicpar/radial.hpp"

namespace padic {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapM = Eigen::Map<RowMat>;
using CMapM = Eigen::Map<const RowMat>;

double ppow(int p, double e) { return std::pow(static_cast<double>(p), e); }

MapM map(DenseMatrix& m) { return MapM(m.a.data(), static_cast<Eigen::Index>(m.rows), static_cast<Eigen::Index>(m.cols)); }
CMapM map(const DenseMatrix& m) {
    return CMapM(m.a.data(), static_cast<Eigen::Index>(m.rows), static_cast<Eigen::Index>(m.cols));
}

// Trapezoid weights on increasing nodes.
std::vector<double> trapezoid(const std::vector<double>& x) {
    std::vector<double> w(x.size(), 0.0);
    for (std::size_t j = 0; j + 1 < x.size(); ++j) {
        const double h = 0.5 * (x[j + 1] - x[j]);
        w[j] += h;
        w[j + 1] += h;
    }
    return w;
}

// Gauss–Legendre on geometric panels of sigma in [0, len], finest near 0.
template <class F>
void graded_gauss(double len, int panels, F&& fn) {
    using GL = boost::math::quadrature::gauss<double, 8>;
    const auto& xs = GL::abscissa();
    const auto& ws = GL::weights();
    std::vector<double> cut{0.0};
    for (int k = panels; k >= 1; --k) cut.push_back(len * std::ldexp(1.0, -k));
    cut.push_back(len);
    for (std::size_t j = 0; j + 1 < cut.size(); ++j) {
        const double a = cut[j], b = cut[j + 1];
        const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
        for (std::size_t q = 0; q < xs.size(); ++q) {
            if (xs[q] == 0.0) {
                fn(mid, half * ws[q]);
                continue;
            }
            fn(mid - half * xs[q], half * ws[q]);
            fn(mid + half * xs[q], half * ws[q]);
        }
    }
}

struct Interp {
    std::size_t i = 0;
    double w = 0.0;  // weight of sample i+1
};

Interp locate(const std::vector<double>& times, double t) {
    if (times.size() == 1 || t <= times.front()) return {0, 0.0};
    if (t >= times.back()) return {times.size() - 1, 0.0};
    const auto it = std::upper_bound(times.begin(), times.end(), t);
    const std::size_t i = static_cast<std::size_t>(it - times.begin()) - 1;
    return {i, (t - times[i]) / (times[i + 1] - times[i])};
}

}  // namespace

DenseMatrix DenseMatrix::identity(std::size_t n) {
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

double DenseMatrix::max_abs() const {
    double r = 0.0;
    for (double x : a) r = std::max(r, std::abs(x));
    return r;
}

std::vector<double> DenseMatrix::row_sums() const {
    std::vector<double> s(rows, 0.0);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) s[i] += (*this)(i, j);
    return s;
}

DenseMatrix operator*(const DenseMatrix& x, const DenseMatrix& y) {
    if (x.cols != y.rows) throw std::invalid_argument("matrix shapes do not match");
    DenseMatrix r(x.rows, y.cols);
    map(r).noalias() = map(x) * map(y);
    return r;
}

std::vector<double> operator*(const DenseMatrix& x, const std::vector<double>& v) {
    if (x.cols != v.size()) throw std::invalid_argument("matrix and vector do not match");
    std::vector<double> r(x.rows, 0.0);
    for (std::size_t i = 0; i < x.rows; ++i)
        for (std::size_t j = 0; j < x.cols; ++j) r[i] += x(i, j) * v[j];
    return r;
}

// ---------------------------------------------------------------------------
// Coefficient field

double CoefficientField::holder_constant() const {
    double h = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i)
        for (std::size_t j = i + 1; j < times.size(); ++j) {
            const double dt = std::pow(times[j] - times[i], v);
            const auto& f = a0[i];
            const auto& g = a0[j];
            double d = 0.0;
            for (std::size_t c = 0; c < f.cells(); ++c) d = std::max(d, std::abs(f[c] - g[c]));
            for (int k = f.M() + 1; k <= f.M() + 8; ++k) d = std::max(d, std::abs(f.exterior(k) - g.exterior(k)));
            h = std::max(h, d / dt);
        }
    return h;
}

bool CoefficientField::b_zero() const {
    for (const auto& f : b) {
        for (double x : f.values())
            if (x != 0.0) return false;
        if (f.tail() && f.tail()->growth_exponent() > -std::numeric_limits<double>::infinity()) {
            for (int k = f.M() + 1; k <= f.M() + 8; ++k)
                if (f.exterior(k) != 0.0) return false;
        }
    }
    return true;
}

bool CoefficientField::all_constant() const {
    if (!b_zero()) return false;
    for (const auto& ak : a)
        for (const auto& f : ak) {
            for (double x : f.values())
                if (x != 0.0) return false;
        }
    const double c = a0.front()[0];
    for (const auto& f : a0) {
        for (double x : f.values())
            if (x != c) return false;
        for (int k = f.M() + 1; k <= f.M() + 8; ++k)
            if (f.exterior(k) != c) return false;
    }
    return true;
}

void CoefficientField::validate() const {
    if (p < 2 || n < 1) throw std::invalid_argument("bad (p, n)");
    if (!(alpha > n)) throw std::domain_error("hypothesis alpha > n violated");
    for (int k = 0; k < N(); ++k) {
        const double lo = k == 0 ? n : alphas[static_cast<std::size_t>(k - 1)];
        if (!(alphas[static_cast<std::size_t>(k)] > lo))
            throw std::domain_error("hypothesis n < alpha_1 < ... < alpha_N violated");
    }
    if (!(v > 0.0 && v < 1.0)) throw std::domain_error("hypothesis v in (0, 1) violated");
    if (N() > 0 && !(alpha_next() > alphas.back())) throw std::domain_error("hypothesis alpha_{N+1} > alpha_N violated");
    if (!(mu > 0.0)) throw std::domain_error("hypothesis mu > 0 violated");
    if (!(T > 0.0)) throw std::domain_error("hypothesis T > 0 violated");
    if (times.empty() || a0.size() != times.size()) throw std::invalid_argument("a0 needs one sample per time");
    if (static_cast<int>(a.size()) != N()) throw std::invalid_argument("one lower-order coefficient per exponent");
    for (const auto& ak : a)
        if (ak.size() != times.size()) throw std::invalid_argument("lower-order coefficient needs one sample per time");
    if (!b.empty() && b.size() != times.size()) throw std::invalid_argument("b needs one sample per time");
    for (std::size_t i = 1; i < times.size(); ++i)
        if (!(times[i] > times[i - 1])) throw std::invalid_argument("coefficient sample times must increase");
    auto check = [&](const LocallyConstantFn& f) {
        if (f.prime() != p || f.dim() != n) throw std::invalid_argument("coefficient on a different space");
        if (!f.same_grid(a0.front())) throw std::invalid_argument("coefficients must share one cell grid");
        if (f.tail() && f.tail()->growth_exponent() > 0.0) throw std::domain_error("hypothesis coefficients in M_0 violated");
    };
    for (const auto& f : a0) {
        check(f);
        for (double x : f.values())
            if (!(x >= mu)) throw std::domain_error("hypothesis uniform parabolicity a0 >= mu violated");
        for (int k = f.M() + 1; k <= f.M() + 8; ++k)
            if (!(f.exterior(k) >= mu)) throw std::domain_error("hypothesis uniform parabolicity a0 >= mu violated");
        if (f.tail() && f.tail()->growth_exponent() < 0.0)
            throw std::domain_error("hypothesis uniform parabolicity a0 >= mu violated far out");
    }
    for (const auto& ak : a)
        for (const auto& f : ak) check(f);
    for (const auto& f : b) check(f);
}

CoefficientField CoefficientField::constant(int p, int n, double alpha, double kappa, int ell, int M, double T) {
    CoefficientField cf;
    cf.p = p;
    cf.n = n;
    cf.alpha = alpha;
    cf.mu = kappa;
    cf.T = T;
    cf.times = {0.0};
    cf.a0 = {LocallyConstantFn::constant(p, n, ell, M, kappa)};
    return cf;
}

// ---------------------------------------------------------------------------
// Fundamental solution

struct FundamentalSolution::Impl {
    CoefficientField cf;
    LeviConfig cfg;
    int p, n, ell, M, K;
    std::size_t C, S;
    HeatKernel hk;
    LocallyConstantFn grid;
    std::vector<double> gammas;  // alpha, alpha_1 .. alpha_N
    std::vector<Shell> shell;
    std::vector<double> vol;
    // per state pair: entry = cb * ball[ib] + cs * shell_tab[is]
    std::vector<int> ib, is;
    std::vector<double> cb, cs;
    std::vector<double> dist;  // minimal distance per state pair, 0 if touching
    std::vector<Shell> dist_shell;
    std::vector<double> mesh;
    // sampled coefficient values on the states
    std::vector<std::vector<double>> a0s, bs;
    std::vector<std::vector<std::vector<double>>> aks;
    // mesh pair storage (i >= k): index i(i+1)/2 + k
    std::vector<DenseMatrix> R, Z, Phi;
    SeriesReport rep;

    Impl(CoefficientField f, LeviConfig c)
        : cf((f.validate(), std::move(f))),
          cfg(std::move(c)),
          p(cf.p),
          n(cf.n),
          ell(cf.ell()),
          M(cf.M()),
          K(cfg.exterior_shells),
          hk(HeatKernelParams::power(cf.p, cf.n, cf.alpha, 1.0)),
          grid(cf.p, cf.n, cf.ell(), cf.M()) {
        C = grid.cells();
        S = C + static_cast<std::size_t>(K);
        gammas.push_back(cf.alpha);
        for (double g : cf.alphas) gammas.push_back(g);
        build_geometry();
        build_mesh();
        sample_coefficients();
        build_pairs();
        build_series();
    }

    static std::size_t pid(std::size_t i, std::size_t k) { return i * (i + 1) / 2 + k; }

    int shell_of_state(std::size_t s) const { return M + 1 + static_cast<int>(s - C); }

    void build_geometry() {
        shell.resize(S);
        vol.resize(S);
        const double cv = ppow(p, double(ell) * n);
        for (std::size_t s = 0; s < S; ++s) {
            if (s < C) {
                shell[s] = grid.cell_shell(s);
                vol[s] = cv;
            } else {
                const int k = shell_of_state(s);
                shell[s] = k;
                vol[s] = shell_volume_value(p, k, n);
            }
        }
        // cell differences: digit-wise subtraction mod side per coordinate
        auto cell_diff = [&](std::size_t x, std::size_t y) {
            std::size_t d = 0, stride = 1;
            const std::size_t side = grid.side();
            for (int c = 0; c < n; ++c) {
                const std::size_t ax = x % side, ay = y % side;
                x /= side;
                y /= side;
                d += ((ax + side - ay) % side) * stride;
                stride *= side;
            }
            return d;
        };
        const double red = 1.0 - 2.0 * ppow(p, -n);
        ib.assign(S * S, 0);
        is.assign(S * S, 0);
        cb.assign(S * S, 0.0);
        cs.assign(S * S, 0.0);
        dist.assign(S * S, 0.0);
        dist_shell.assign(S * S, std::nullopt);
        for (std::size_t x = 0; x < S; ++x)
            for (std::size_t y = 0; y < S; ++y) {
                const std::size_t q = x * S + y;
                if (x < C && y < C) {
                    if (x == y) {
                        ib[q] = ell;
                        cb[q] = 1.0;
                    } else {
                        const int d = *grid.cell_shell(cell_diff(x, y));
                        is[q] = d;
                        cs[q] = cv;
                        dist_shell[q] = d;
                    }
                } else if (x < C) {
                    const int j = shell_of_state(y);
                    is[q] = j;
                    cs[q] = vol[y];
                    dist_shell[q] = j;
                } else if (y < C) {
                    const int k = shell_of_state(x);
                    is[q] = k;
                    cs[q] = cv;
                    dist_shell[q] = k;
                } else {
                    const int k = shell_of_state(x), j = shell_of_state(y);
                    if (k != j) {
                        is[q] = std::max(k, j);
                        cs[q] = vol[y];
                        dist_shell[q] = std::max(k, j);
                    } else {
                        ib[q] = k - 1;
                        cb[q] = 1.0;
                        is[q] = k;
                        cs[q] = ppow(p, double(k) * n) * red;
                    }
                }
                dist[q] = dist_shell[q] ? ppow(p, *dist_shell[q]) : 0.0;
            }
    }

    void build_mesh() {
        const int Nn = std::max(2, cfg.mesh_nodes);
        const double q = cfg.grading;
        for (int i = 0; i < Nn; ++i) {
            const double u = double(i) / (Nn - 1);
            const double g = std::pow(u, q) / (std::pow(u, q) + std::pow(1.0 - u, q));
            mesh.push_back(cf.T * g);
        }
        for (double t : cfg.extra_times) {
            if (!(t >= 0.0 && t <= cf.T)) throw std::invalid_argument("extra mesh time outside [0, T]");
            mesh.push_back(t);
        }
        std::sort(mesh.begin(), mesh.end());
        std::vector<double> m2;
        for (double t : mesh)
            if (m2.empty() || t - m2.back() > 1e-12 * std::max(1.0, cf.T)) m2.push_back(t);
        mesh = std::move(m2);
    }

    std::vector<double> states_of(const LocallyConstantFn& f) const {
        std::vector<double> v(S);
        for (std::size_t s = 0; s < S; ++s) v[s] = s < C ? f[s] : f.exterior(shell_of_state(s));
        return v;
    }

    void sample_coefficients() {
        for (const auto& f : cf.a0) a0s.push_back(states_of(f));
        for (const auto& f : cf.b) bs.push_back(states_of(f));
        aks.resize(cf.a.size());
        for (std::size_t k = 0; k < cf.a.size(); ++k)
            for (const auto& f : cf.a[k]) aks[k].push_back(states_of(f));
    }

    std::vector<double> at(const std::vector<std::vector<double>>& samples, double t) const {
        if (samples.empty()) return std::vector<double>(S, 0.0);
        const Interp ip = locate(cf.times, t);
        if (ip.w == 0.0) return samples[ip.i];
        std::vector<double> v(S);
        for (std::size_t s = 0; s < S; ++s) v[s] = (1.0 - ip.w) * samples[ip.i][s] + ip.w * samples[ip.i + 1][s];
        return v;
    }

    // Kernel values on shells ell+1 .. M+K and ball integrals on radii ell .. M+K-1.
    struct Tab {
        std::vector<double> zs, zb;
        std::vector<std::vector<double>> ws, wb;  // per gamma
    };

    Tab tabulate(double s, bool want_z, bool want_w) const {
        Tab t;
        const int nsh = M + K - ell;
        if (want_z) {
            t.zs.resize(static_cast<std::size_t>(nsh));
            t.zb.resize(static_cast<std::size_t>(nsh));
            for (int d = ell + 1; d <= M + K; ++d)
                t.zs[static_cast<std::size_t>(d - ell - 1)] = s == 0.0 ? 0.0 : hk.z_s(Shell{d}, s).value;
            for (int r = ell; r < M + K; ++r)
                t.zb[static_cast<std::size_t>(r - ell)] = s == 0.0 ? 1.0 : hk.ball_mass_s(r, s).inside;
        }
        if (want_w) {
            t.ws.assign(gammas.size(), std::vector<double>(static_cast<std::size_t>(nsh)));
            t.wb.assign(gammas.size(), std::vector<double>(static_cast<std::size_t>(nsh)));
            for (std::size_t g = 0; g < gammas.size(); ++g) {
                for (int d = ell + 1; d <= M + K; ++d)
                    t.ws[g][static_cast<std::size_t>(d - ell - 1)] = hk.w_gamma_z_s(gammas[g], Shell{d}, s).value;
                for (int r = ell; r < M + K; ++r)
                    t.wb[g][static_cast<std::size_t>(r - ell)] = hk.ball_integral_w_gamma_z_s(gammas[g], r, s);
            }
        }
        return t;
    }

    double entry(const std::vector<double>& sh, const std::vector<double>& bl, std::size_t q) const {
        double v = 0.0;
        if (cb[q] != 0.0) v += cb[q] * bl[static_cast<std::size_t>(ib[q] - ell)];
        if (cs[q] != 0.0) v += cs[q] * sh[static_cast<std::size_t>(is[q] - ell - 1)];
        return v;
    }

    struct Mats {
        DenseMatrix z;
        std::vector<DenseMatrix> w;  // per gamma
    };

    // Columns carry the frozen coefficient a0(xi-state, tau).
    Mats kernels(double t, double tau, bool want_z, bool want_w) const {
        if (t < tau) throw std::domain_error("kernel needs tau <= t");
        const std::vector<double> k0 = at(a0s, tau);
        std::map<double, Tab> tabs;
        Mats m;
        if (want_z) m.z = DenseMatrix(S, S);
        if (want_w) m.w.assign(gammas.size(), DenseMatrix(S, S));
        for (std::size_t y = 0; y < S; ++y) {
            const double s = k0[y] * (t - tau);
            auto it = tabs.find(s);
            if (it == tabs.end()) it = tabs.emplace(s, tabulate(s, want_z, want_w)).first;
            const Tab& tb = it->second;
            for (std::size_t x = 0; x < S; ++x) {
                const std::size_t q = x * S + y;
                if (want_z) m.z(x, y) = entry(tb.zs, tb.zb, q);
                if (want_w)
                    for (std::size_t g = 0; g < gammas.size(); ++g) m.w[g](x, y) = entry(tb.ws[g], tb.wb[g], q);
            }
        }
        return m;
    }

    DenseMatrix r_from(const Mats& m, double t, double tau) const {
        const std::vector<double> x0 = at(a0s, t), y0 = at(a0s, tau);
        DenseMatrix r(S, S);
        for (std::size_t x = 0; x < S; ++x)
            for (std::size_t y = 0; y < S; ++y) r(x, y) = (x0[x] - y0[y]) * m.w[0](x, y);
        for (std::size_t k = 0; k < aks.size(); ++k) {
            const std::vector<double> ak = at(aks[k], t);
            for (std::size_t x = 0; x < S; ++x)
                if (ak[x] != 0.0)
                    for (std::size_t y = 0; y < S; ++y) r(x, y) += ak[x] * m.w[k + 1](x, y);
        }
        if (!bs.empty()) {
            const std::vector<double> b = at(bs, t);
            for (std::size_t x = 0; x < S; ++x)
                if (b[x] != 0.0)
                    for (std::size_t y = 0; y < S; ++y) r(x, y) -= b[x] * m.z(x, y);
        }
        return r;
    }

    DenseMatrix r_mass(double t, double tau) const {
        return r_from(kernels(t, tau, !bs.empty(), true), t, tau);
    }

    void build_pairs() {
        const std::size_t Nn = mesh.size();
        R.resize(Nn * (Nn + 1) / 2);
        Z.resize(Nn * (Nn + 1) / 2);
        for (std::size_t i = 0; i < Nn; ++i)
            for (std::size_t k = 0; k <= i; ++k) {
                Mats m = kernels(mesh[i], mesh[k], true, true);
                R[pid(i, k)] = r_from(m, mesh[i], mesh[k]);
                Z[pid(i, k)] = i == k ? DenseMatrix::identity(S) : std::move(m.z);
            }
    }

    // Majorant shape sum_j ((t - tau)^{1/(alpha-n)} + d)^{-alpha_j}, j = 1 .. N+1.
    double shape(double dt, double d) const {
        const double base = std::pow(dt, 1.0 / (cf.alpha - n)) + d;
        double s = 0.0;
        for (double a : cf.alphas) s += std::pow(base, -a);
        return s + std::pow(base, -cf.alpha_next());
    }

    double majorant_factor(int m, double dt) const {
        const double v = cf.v;
        const double N2 = 2.0 * cf.N() + 2.0;
        return std::pow(N2, m) * std::pow(dt, m * v) *
               std::exp((m + 1) * std::lgamma(v) - std::lgamma((m + 1) * v));
    }

    // sup over mesh pairs with t > tau of |R_m| / (vol * majorant), and sups
    void measure(const std::vector<DenseMatrix>& Rm, int m, double& sup_mass, double& sup_den, double& ratio) const {
        sup_mass = sup_den = ratio = 0.0;
        const std::size_t Nn = mesh.size();
        for (std::size_t i = 0; i < Nn; ++i)
            for (std::size_t k = 0; k <= i; ++k) {
                const DenseMatrix& A = Rm[pid(i, k)];
                const double dt = mesh[i] - mesh[k];
                const double fac = i == k ? 0.0 : majorant_factor(m, dt);
                for (std::size_t x = 0; x < S; ++x)
                    for (std::size_t y = 0; y < S; ++y) {
                        const double v = std::abs(A(x, y));
                        sup_mass = std::max(sup_mass, v);
                        const double den = v / vol[y];
                        sup_den = std::max(sup_den, den);
                        if (i != k && den > 0.0) ratio = std::max(ratio, den / (fac * shape(dt, dist[x * S + y])));
                    }
            }
    }

    void build_series() {
        const std::size_t Nn = mesh.size();
        Phi = R;
        std::vector<DenseMatrix> Rm = R;
        double sm, sd, ratio;
        measure(Rm, 0, sm, sd, ratio);
        rep.majorant_constant = ratio;
        rep.terms.push_back({0, sm, sd, ratio > 0.0 ? 1.0 : 0.0});
        const std::vector<double> wfull = trapezoid(mesh);
        std::vector<DenseMatrix> next(Rm.size(), DenseMatrix(S, S));
        int m = 1;
        rep.converged = sm == 0.0;
        for (; m < cfg.series_max && !rep.converged; ++m) {
            for (std::size_t k = 0; k < Nn; ++k) {
                for (std::size_t i = k; i < Nn; ++i) {
                    DenseMatrix& out = next[pid(i, k)];
                    std::fill(out.a.begin(), out.a.end(), 0.0);
                    if (i == k) continue;
                    auto O = map(out);
                    for (std::size_t j = k; j <= i; ++j) {
                        double w;
                        if (j == k) w = 0.5 * (mesh[k + 1] - mesh[k]);
                        else if (j == i) w = 0.5 * (mesh[i] - mesh[i - 1]);
                        else w = 0.5 * (mesh[j + 1] - mesh[j - 1]);
                        O.noalias() += w * (map(R[pid(i, j)]) * map(Rm[pid(j, k)]));
                    }
                }
            }
            (void)wfull;
            std::swap(Rm, next);
            for (std::size_t q = 0; q < Rm.size(); ++q) map(Phi[q]) += map(Rm[q]);
            measure(Rm, m, sm, sd, ratio);
            const double c = rep.majorant_constant;
            rep.terms.push_back({m, sm, sd, c > 0.0 ? ratio / c : 0.0});
            double phi_sup = 0.0;
            for (const auto& P : Phi) phi_sup = std::max(phi_sup, P.max_abs());
            if (m + 1 >= cfg.majorant_terms && sm < cfg.series_tol * phi_sup) rep.converged = true;
        }
        rep.terms_used = m;
    }

    std::size_t node(double t) const {
        const auto it = std::lower_bound(mesh.begin(), mesh.end(), t - 1e-12 * std::max(1.0, cf.T));
        if (it == mesh.end() || std::abs(*it - t) > 1e-12 * std::max(1.0, cf.T))
            throw std::invalid_argument("time is not a mesh node");
        return static_cast<std::size_t>(it - mesh.begin());
    }

    std::optional<std::size_t> maybe_node(double t) const {
        const auto it = std::lower_bound(mesh.begin(), mesh.end(), t - 1e-12 * std::max(1.0, cf.T));
        if (it == mesh.end() || std::abs(*it - t) > 1e-12 * std::max(1.0, cf.T)) return std::nullopt;
        return static_cast<std::size_t>(it - mesh.begin());
    }

    // Mesh nodes in [tau_k, t) followed by t itself, with trapezoid weights.
    void nodes_to(double t, std::size_t k, std::vector<std::size_t>& idx, std::vector<double>& w) const {
        idx.clear();
        std::vector<double> x;
        for (std::size_t j = k; j < mesh.size() && mesh[j] < t - 1e-14; ++j) {
            idx.push_back(j);
            x.push_back(mesh[j]);
        }
        x.push_back(t);
        w = trapezoid(x);
    }

    DenseMatrix phi(double t, std::size_t k) const {
        if (t < mesh[k]) throw std::domain_error("Phi needs t >= tau");
        if (auto i = maybe_node(t)) return Phi[pid(*i, k)];
        // Nystrom extension of the discrete equation to an off-mesh t
        std::vector<std::size_t> idx;
        std::vector<double> w;
        nodes_to(t, k, idx, w);
        DenseMatrix rhs = r_mass(t, mesh[k]);
        auto B = map(rhs);
        for (std::size_t q = 0; q < idx.size(); ++q)
            B.noalias() += w[q] * (map(r_mass(t, mesh[idx[q]])) * map(Phi[pid(idx[q], k)]));
        RowMat A = RowMat::Identity(static_cast<Eigen::Index>(S), static_cast<Eigen::Index>(S)) - w.back() * map(r_mass(t, t));
        DenseMatrix out(S, S);
        map(out) = A.partialPivLu().solve(RowMat(B));
        return out;
    }

    DenseMatrix w_mass(double t, std::size_t k) const {
        DenseMatrix out(S, S);
        if (t <= mesh[k]) return out;
        std::vector<std::size_t> idx;
        std::vector<double> w;
        nodes_to(t, k, idx, w);
        const auto ti = maybe_node(t);
        auto O = map(out);
        for (std::size_t q = 0; q < idx.size(); ++q) {
            const std::size_t j = idx[q];
            if (ti) O.noalias() += w[q] * (map(Z[pid(*ti, j)]) * map(Phi[pid(j, k)]));
            else O.noalias() += w[q] * (map(kernels(t, mesh[j], true, false).z) * map(Phi[pid(j, k)]));
        }
        O += w.back() * map(phi(t, k));  // Z(t, t) = I
        return out;
    }

    DenseMatrix z_mass(double t, double tau) const {
        if (t == tau) return DenseMatrix::identity(S);
        return kernels(t, tau, true, false).z;
    }

    DenseMatrix lambda_mass(double t, std::size_t k) const {
        if (t < mesh[k]) throw std::domain_error("Lambda needs t >= tau");
        DenseMatrix L = w_mass(t, k);
        map(L) += map(z_mass(t, mesh[k]));
        return L;
    }
};

FundamentalSolution::FundamentalSolution(CoefficientField cf, LeviConfig cfg)
    : d_(std::make_unique<Impl>(std::move(cf), std::move(cfg))) {}
FundamentalSolution::~FundamentalSolution() = default;
FundamentalSolution::FundamentalSolution(FundamentalSolution&&) noexcept = default;
FundamentalSolution& FundamentalSolution::operator=(FundamentalSolution&&) noexcept = default;

const CoefficientField& FundamentalSolution::field() const { return d_->cf; }
const LeviConfig& FundamentalSolution::config() const { return d_->cfg; }
const std::vector<double>& FundamentalSolution::mesh() const { return d_->mesh; }
std::size_t FundamentalSolution::node(double t) const { return d_->node(t); }
std::size_t FundamentalSolution::states() const { return d_->S; }
std::size_t FundamentalSolution::cell_states() const { return d_->C; }
double FundamentalSolution::state_volume(std::size_t s) const { return d_->vol.at(s); }
Shell FundamentalSolution::state_shell(std::size_t s) const { return d_->shell.at(s); }
Shell FundamentalSolution::min_distance(std::size_t s, std::size_t s2) const {
    return d_->dist_shell.at(s * d_->S + s2);
}

std::size_t FundamentalSolution::state_of(const PAdicPoint& x) const {
    const auto k = x.norm_exp();
    if (k && *k > d_->M) {
        if (*k > d_->M + d_->K) throw std::out_of_range("point beyond the last exterior state");
        return d_->C + static_cast<std::size_t>(*k - d_->M - 1);
    }
    return d_->grid.cell_of(x);
}

std::vector<double> FundamentalSolution::a0_at(double t) const { return d_->at(d_->a0s, t); }

DenseMatrix FundamentalSolution::z_mass(double t, double tau) const { return d_->z_mass(t, tau); }
DenseMatrix FundamentalSolution::r_mass(double t, double tau) const { return d_->r_mass(t, tau); }
DenseMatrix FundamentalSolution::phi_mass(double t, std::size_t k) const { return d_->phi(t, k); }
DenseMatrix FundamentalSolution::w_mass(double t, std::size_t k) const { return d_->w_mass(t, k); }
DenseMatrix FundamentalSolution::lambda_mass(double t, std::size_t k) const { return d_->lambda_mass(t, k); }
const SeriesReport& FundamentalSolution::series() const { return d_->rep; }

double FundamentalSolution::z_eval(const PAdicPoint& x, double t, const PAdicPoint& xi, double tau) const {
    if (!(t > tau)) throw std::domain_error("Z needs t > tau");
    const std::size_t sy = state_of(xi);
    const double kappa = d_->at(d_->a0s, tau)[sy];
    return d_->hk.z_s((x - xi).norm_exp(), kappa * (t - tau)).value;
}

double FundamentalSolution::lambda_eval(const PAdicPoint& x, double t, const PAdicPoint& xi, double tau) const {
    const std::size_t k = node(tau);
    const std::size_t sx = state_of(x), sy = state_of(xi);
    const DenseMatrix W = w_mass(t, k);
    return z_eval(x, t, xi, tau) + W(sx, sy) / d_->vol[sy];
}

double FundamentalSolution::phi_residual(double t, std::size_t k, int refine) const {
    const Impl& d = *d_;
    const double tau = d.mesh[k];
    if (!(t > tau)) throw std::domain_error("residual needs t > tau");
    std::vector<double> x;
    for (std::size_t j = k; j < d.mesh.size() && d.mesh[j] < t; ++j) {
        const double a = d.mesh[j];
        const double b = (j + 1 < d.mesh.size()) ? std::min(d.mesh[j + 1], t) : t;
        for (int r = 0; r < refine; ++r) x.push_back(a + (b - a) * r / refine);
    }
    x.push_back(t);
    const std::vector<double> w = trapezoid(x);
    DenseMatrix integral(d.S, d.S);
    auto I = map(integral);
    for (std::size_t q = 0; q < x.size(); ++q) I.noalias() += w[q] * (map(d.r_mass(t, x[q])) * map(d.phi(x[q], k)));
    const DenseMatrix P = d.phi(t, k);
    const DenseMatrix Rt = d.r_mass(t, tau);
    double res = 0.0;
    for (std::size_t e = 0; e < P.a.size(); ++e) res = std::max(res, std::abs(P.a[e] - Rt.a[e] - integral.a[e]));
    double phi_sup = 0.0;
    for (const auto& M : d.Phi) phi_sup = std::max(phi_sup, M.max_abs());
    return res / std::max(1.0, phi_sup);
}

double FundamentalSolution::series_truncation() const {
    const Impl& d = *d_;
    const std::size_t Nn = d.mesh.size();
    const Eigen::Index S = static_cast<Eigen::Index>(d.S);
    double worst = 0.0;
    for (std::size_t k = 0; k < Nn; ++k) {
        std::vector<DenseMatrix> col(Nn);
        for (std::size_t i = k; i < Nn; ++i) {
            DenseMatrix rhs = d.R[Impl::pid(i, k)];
            double wi = 0.0;
            if (i > k) {
                auto B = map(rhs);
                for (std::size_t j = k; j < i; ++j) {
                    const double w = j == k ? 0.5 * (d.mesh[k + 1] - d.mesh[k]) : 0.5 * (d.mesh[j + 1] - d.mesh[j - 1]);
                    B.noalias() += w * (map(d.R[Impl::pid(i, j)]) * map(col[j]));
                }
                wi = 0.5 * (d.mesh[i] - d.mesh[i - 1]);
            }
            RowMat A = RowMat::Identity(S, S) - wi * map(d.R[Impl::pid(i, i)]);
            col[i] = DenseMatrix(d.S, d.S);
            map(col[i]) = A.partialPivLu().solve(RowMat(map(rhs)));
            const DenseMatrix& P = d.Phi[Impl::pid(i, k)];
            for (std::size_t e = 0; e < P.a.size(); ++e) worst = std::max(worst, std::abs(P.a[e] - col[i].a[e]));
        }
    }
    return worst;
}

std::vector<double> FundamentalSolution::mass(double t, std::size_t k) const { return lambda_mass(t, k).row_sums(); }

std::vector<double> FundamentalSolution::to_states(const LocallyConstantFn& g0) const {
    const Impl& d = *d_;
    if (g0.prime() != d.p || g0.dim() != d.n) throw std::invalid_argument("data on a different space");
    if (g0.ell() < d.ell || g0.M() > d.M) throw std::invalid_argument("data not constant on the states");
    const LocallyConstantFn g = g0.regrid(d.ell, d.M);
    return d.states_of(g);
}

LocallyConstantFn FundamentalSolution::from_states(const std::vector<double>& v) const {
    const Impl& d = *d_;
    if (v.size() != d.S) throw std::invalid_argument("state vector has the wrong size");
    LocallyConstantFn out(d.p, d.n, d.ell, d.M);
    for (std::size_t s = 0; s < d.C; ++s) out[s] = v[s];
    RadialTail t;
    t.M = d.M;
    t.table.assign(v.begin() + static_cast<std::ptrdiff_t>(d.C), v.end());
    const std::size_t K = t.table.size();
    if (K >= 2) {
        const double v1 = t.table[K - 2], v2 = t.table[K - 1];
        if (v1 != 0.0 && v2 != 0.0 && (v1 > 0) == (v2 > 0)) {
            const double s = std::log(v2 / v1) / std::log(static_cast<double>(d.p));
            t.powers.push_back({s, v2 / ppow(d.p, (d.M + static_cast<int>(K)) * s)});
        }
    }
    out.set_tail(std::move(t));
    out.lambda = 0.0;
    out.growth_C = mlambda_norm(out, 0.0);
    return out;
}

LocallyConstantFn FundamentalSolution::heat_potential(const TimeSampledFn& f, double t, double tau) const {
    const Impl& d = *d_;
    std::vector<double> u(d.S, 0.0);
    if (t > tau) {
        graded_gauss(t - tau, d.cfg.z_panels, [&](double sigma, double w) {
            const double theta = t - sigma;
            const std::vector<double> fv = to_states(f.at(theta));
            const std::vector<double> zf = d.z_mass(t, theta) * fv;
            for (std::size_t s = 0; s < d.S; ++s) u[s] += w * zf[s];
        });
    }
    LocallyConstantFn out = from_states(u);
    out.lambda = f.lambda();
    return out;
}

LocallyConstantFn FundamentalSolution::heat_potential_dt(const TimeSampledFn& f, double t, double tau) const {
    const Impl& d = *d_;
    std::vector<double> u = to_states(f.at(t));
    if (t > tau) {
        graded_gauss(t - tau, d.cfg.z_panels, [&](double sigma, double w) {
            const double theta = t - sigma;
            const std::vector<double> fv = to_states(f.at(theta));
            // dZ/dt = a0(y, theta) (W_alpha Z) with the frozen coefficient
            const std::vector<double> k0 = d.at(d.a0s, theta);
            Impl::Mats m = d.kernels(t, theta, false, true);
            std::vector<double> kf(d.S);
            for (std::size_t s = 0; s < d.S; ++s) kf[s] = k0[s] * fv[s];
            const std::vector<double> r = m.w[0] * kf;
            for (std::size_t s = 0; s < d.S; ++s) u[s] += w * r[s];
        });
    }
    LocallyConstantFn out = from_states(u);
    out.lambda = f.lambda();
    return out;
}

LocallyConstantFn FundamentalSolution::solve_cauchy_var(const LocallyConstantFn& phi,
                                                        const std::optional<TimeSampledFn>& f, double t) const {
    const Impl& d = *d_;
    const double gap = (d.cf.N() > 0 ? d.cf.alphas.front() : d.cf.alpha) - d.n;
    if (!(phi.lambda < gap)) throw std::domain_error("hypothesis lambda + n < alpha_1 violated by the initial datum");
    if (f && !(f->lambda() < gap)) throw std::domain_error("hypothesis lambda + n < alpha_1 violated by the source");
    if (!(t > 0.0) || t > d.cf.T * (1.0 + 1e-12)) throw std::out_of_range("time outside (0, T]");
    std::vector<double> u = lambda_mass(t, 0) * to_states(phi);
    if (f) {
        // Z part on graded panels; the W part on the mesh
        const LocallyConstantFn hp = heat_potential(*f, t, 0.0);
        const std::vector<double> h = d.states_of(hp);
        for (std::size_t s = 0; s < d.S; ++s) u[s] += h[s];
        std::vector<std::size_t> idx;
        std::vector<double> w;
        d.nodes_to(t, 0, idx, w);
        for (std::size_t q = 0; q < idx.size(); ++q) {
            const std::vector<double> r = d.w_mass(t, idx[q]) * to_states(f->at(d.mesh[idx[q]]));
            for (std::size_t s = 0; s < d.S; ++s) u[s] += w[q] * r[s];
        }
        // W(t, t) = 0, so the endpoint adds nothing
    }
    LocallyConstantFn out = from_states(u);
    out.lambda = std::max(phi.lambda, f ? f->lambda() : 0.0);
    out.growth_C = mlambda_norm(out, out.lambda);
    return out;
}

double chapman_kolmogorov_residual(const FundamentalSolution& fs, std::size_t t, std::size_t sigma, std::size_t tau,
                                   std::size_t x, std::size_t xi) {
    if (!(tau < sigma && sigma < t)) throw std::invalid_argument("need tau < sigma < t");
    const auto& m = fs.mesh();
    const DenseMatrix direct = fs.lambda_mass(m[t], tau);
    const DenseMatrix a = fs.lambda_mass(m[t], sigma);
    const DenseMatrix b = fs.lambda_mass(m[sigma], tau);
    double comp = 0.0;
    for (std::size_t y = 0; y < fs.states(); ++y) comp += a(x, y) * b(y, xi);
    return std::abs(direct(x, xi) - comp) / std::abs(direct(x, xi));
}

JBoundResult j_bound(Shell dist, double t, double tau, double rho, double sigma, double b1, double b2, double beta,
                     int p, int n) {
    if (!(t > tau)) throw std::domain_error("J needs tau < t");
    if (!(b1 > 0.0 && b2 > 0.0)) throw std::domain_error("J needs b1, b2 > 0");
    if (!(rho + b1 < beta) || !(sigma + b2 < beta)) throw std::domain_error("J needs rho + b1 < beta and sigma + b2 < beta");
    const int k_lo = -300, k_hi = 300;
    auto inner = [&](double theta) {
        const double a = std::pow(t - theta, 1.0 / beta);
        const double c = std::pow(theta - tau, 1.0 / beta);
        auto F = [&](int k) { return std::pow(a + ppow(p, k), -n - b1); };
        auto G = [&](int k) { return std::pow(c + ppow(p, k), -n - b2); };
        return two_center_integral(F, G, dist, p, n, k_lo, k_hi);
    };
    boost::math::quadrature::tanh_sinh<double> ts;
    auto integrand = [&](double theta) {
        if (theta <= tau || theta >= t) return 0.0;
        return std::pow(t - theta, -rho / beta) * std::pow(theta - tau, -sigma / beta) * inner(theta);
    };
    JBoundResult r;
    r.j = ts.integrate(integrand, tau, t, 1e-9);
    const double dt = t - tau;
    const double d = dist ? ppow(p, *dist) : 0.0;
    const double base = std::pow(dt, 1.0 / beta) + d;
    r.bound = std::beta(1.0 - rho / beta, 1.0 - (sigma + b2) / beta) * std::pow(base, -n - b1) *
                  std::pow(dt, -(rho + sigma + b2 - beta) / beta) +
              std::beta(1.0 - (rho + b1) / beta, 1.0 - sigma / beta) * std::pow(base, -n - b2) *
                  std::pow(dt, -(rho + sigma + b1 - beta) / beta);
    return r;
}

}  // namespace padic
