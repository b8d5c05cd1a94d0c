#include "padicpar/heat_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>
#include <stdexcept>

namespace padic {

namespace {

double ppow(int p, double e) { return std::pow(static_cast<double>(p), e); }

}  // namespace

HeatKernelParams HeatKernelParams::power(int p, int n, double alpha, double kappa) {
    HeatKernelParams hp;
    hp.p = p;
    hp.n = n;
    hp.alpha = alpha;
    hp.kappa = kappa;
    hp.w = RadialProfile::w_power(p, n, alpha);
    hp.validate();
    return hp;
}

void HeatKernelParams::validate() const {
    if (p < 2) throw std::invalid_argument("prime p must be >= 2");
    for (int d = 2; d * d <= p; ++d)
        if (p % d == 0) throw std::invalid_argument("p must be prime");
    if (n < 1) throw std::invalid_argument("dimension n must be >= 1");
    if (!(alpha > n)) throw std::invalid_argument("hypothesis alpha > n violated");
    if (!(kappa > 0.0)) throw std::invalid_argument("hypothesis kappa > 0 violated");
    if (w.prime() != p || w.dim() != n) throw std::invalid_argument("w kernel lives on a different space");
    if (w.kind() != ProfileKind::w_kernel) throw std::invalid_argument("w must be a w-kernel profile");
    if (std::abs(w.alpha() - alpha) > 1e-12) throw std::invalid_argument("w kernel exponent differs from alpha");
}

SymbolTable::SymbolTable(const RadialProfile& w, int m_lo, int m_hi) : w_(w), m_lo_(m_lo) {
    a_.reserve(static_cast<std::size_t>(m_hi - m_lo + 1));
    for (int m = m_lo; m <= m_hi; ++m) {
        SeriesValue v = compute_symbol(w_, m);
        a_.push_back(v.value);
        if (v.value > 0.0 && std::isfinite(v.value))
            max_rel_tail_ = std::max(max_rel_tail_, v.tail_bound / v.value);
    }
}

double SymbolTable::operator()(int m) const {
    if (m >= m_lo_ && m <= m_hi()) return a_[static_cast<std::size_t>(m - m_lo_)];
    return compute_symbol(w_, m).value;
}

HeatKernel::HeatKernel(HeatKernelParams params) : params_(std::move(params)), A_((params_.validate(), params_.w)) {
    const double digits = 20.0 * std::log(10.0);
    J_ = static_cast<int>(std::ceil(digits / (params_.n * std::log(static_cast<double>(params_.p))))) + 1;
}

double HeatKernel::symbol_gamma(double gamma, int m) const {
    if (std::abs(gamma - params_.alpha) < 1e-14) return A_(m);
    if (!(gamma > params_.n)) throw std::domain_error("W_gamma needs gamma > n");
    return symbol_power_constant(params_.p, params_.n, gamma) * ppow(params_.p, m * (gamma - params_.n));
}

double HeatKernel::mult(Mult kind, double gamma, int m, double s) const {
    const double a = A_(m);
    const double e = std::exp(-s * a);
    switch (kind) {
        case Mult::heat: return e;
        case Mult::dheat: return e == 0.0 ? 0.0 : -a * e;
        case Mult::wgamma: return e == 0.0 ? 0.0 : -symbol_gamma(gamma, m) * e;
    }
    return 0.0;
}

double HeatKernel::one_minus_e(int m, double s) const { return -std::expm1(-s * A_(m)); }

SeriesValue HeatKernel::inverse(Mult kind, double gamma, Shell x, double s) const {
    if (!x) return origin_sum(kind, gamma, s);
    const int p = params_.p;
    const int n = params_.n;
    const int beta = *x;
    const double pn = ppow(p, -n);
    const double scale = ppow(p, -double(beta) * n);
    if (!std::isfinite(scale)) throw std::range_error("shell exponent out of floating range");
    if (kind == Mult::heat && std::exp(-s * A_(-beta + 1)) > 0.5) {
        // 1 - E form: the direct sum would cancel to many digits here
        double S = 0.0;
        double w = 1.0;
        for (int j = 0; j < J_; ++j, w *= pn) S += one_minus_e(-beta - j, s) * w;
        const double g = scale * (one_minus_e(-beta + 1, s) - (1.0 - pn) * S);
        const double tail = scale * one_minus_e(-beta - J_, s) * w;
        return {g, tail};
    }
    double S = 0.0;
    double w = 1.0;
    for (int j = 0; j < J_; ++j, w *= pn) S += mult(kind, gamma, -beta - j, s) * w;
    const double g = scale * ((1.0 - pn) * S - mult(kind, gamma, -beta + 1, s));
    const double far = kind == Mult::heat ? 1.0 : std::abs(mult(kind, gamma, -beta - J_, s));
    return {g, scale * far * w};
}

SeriesValue HeatKernel::origin_sum(Mult kind, double gamma, double s) const {
    if (!(s > 0.0)) throw std::domain_error("kernel at the origin needs t > 0");
    const int p = params_.p;
    const int n = params_.n;
    const double pn = ppow(p, -n);
    // first m where the multiplier is negligible: s A(m) > 800
    int top = A_.m_lo();
    while (s * A_(top) <= 800.0) {
        ++top;
        if (top > 100000) throw std::range_error("kernel origin sum did not terminate");
    }
    double sum = 0.0;
    double tail = 0.0;
    for (int m = top; ; --m) {
        const double term = mult(kind, gamma, m, s) * ppow(p, double(m) * n) * (1.0 - pn);
        sum += term;
        if (m < top - 8 && std::abs(term) < 1e-20 * std::abs(sum)) {
            tail = std::abs(term) * pn / (1.0 - pn);
            break;
        }
        if (m < top - 100000) throw std::range_error("kernel origin sum did not converge");
    }
    return {sum, tail};
}

SeriesValue HeatKernel::z_s(Shell x, double s) const {
    if (s < 0.0) throw std::domain_error("kernel needs t > 0");
    return inverse(Mult::heat, 0.0, x, s);
}

SeriesValue HeatKernel::dz_ds(Shell x, double s) const {
    if (s < 0.0) throw std::domain_error("kernel needs t > 0");
    return inverse(Mult::dheat, 0.0, x, s);
}

SeriesValue HeatKernel::w_gamma_z_s(double gamma, Shell x, double s) const {
    if (!(gamma > params_.n)) throw std::domain_error("W_gamma needs gamma > n");
    if (s < 0.0) throw std::domain_error("kernel needs t > 0");
    return inverse(Mult::wgamma, gamma, x, s);
}

BallMass HeatKernel::ball_mass_s(int gamma, double s) const {
    if (s < 0.0) throw std::domain_error("kernel needs t > 0");
    const int p = params_.p;
    const int n = params_.n;
    const double pn = ppow(p, -n);
    // p^{gamma n} vs(m) = (1 - p^{-n}) p^{(m+gamma) n}, m = -gamma - j
    BallMass bm;
    double S = 0.0;
    double w = 1.0 - pn;
    if (std::exp(-s * A_(-gamma)) > 0.5) {
        for (int j = 0; j < J_; ++j, w *= pn) S += one_minus_e(-gamma - j, s) * w;
        bm.outside = S;
        bm.inside = 1.0 - S;
    } else {
        for (int j = 0; j < J_; ++j, w *= pn) S += std::exp(-s * A_(-gamma - j)) * w;
        bm.inside = S;
        bm.outside = 1.0 - S;
    }
    return bm;
}

double HeatKernel::ball_integral_w_gamma_z_s(double gamma, int ball, double s) const {
    if (!(gamma > params_.n)) throw std::domain_error("W_gamma needs gamma > n");
    const double pn = ppow(params_.p, -params_.n);
    double S = 0.0;
    double w = 1.0 - pn;
    for (int j = 0; j < J_; ++j, w *= pn) S += mult(Mult::wgamma, gamma, -ball - j, s) * w;
    return S;
}

double HeatKernel::check_t(double t) const {
    if (!(t > 0.0)) throw std::domain_error("kernel needs t > 0");
    return params_.kappa * t;
}

SeriesValue HeatKernel::z(Shell x, double t) const { return z_s(x, check_t(t)); }

SeriesValue HeatKernel::z_dt(Shell x, double t) const {
    SeriesValue v = dz_ds(x, check_t(t));
    return {params_.kappa * v.value, params_.kappa * v.tail_bound};
}

SeriesValue HeatKernel::w_gamma_z(double gamma, Shell x, double t) const {
    return w_gamma_z_s(gamma, x, check_t(t));
}

BallMass HeatKernel::ball_mass(int gamma, double t) const { return ball_mass_s(gamma, check_t(t)); }

double decay_slope(const HeatKernel& hk, double t, int beta_lo, int beta_hi) {
    if (beta_hi <= beta_lo) throw std::invalid_argument("decay_slope needs at least two shells");
    const double lp = std::log(static_cast<double>(hk.prime()));
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int k = 0;
    for (int b = beta_lo; b <= beta_hi; ++b) {
        const double z = hk.z(Shell{b}, t).value;
        if (!(z > 0.0)) throw std::runtime_error("non-positive kernel value in decay fit");
        const double x = b * lp;
        const double y = std::log(z);
        sx += x; sy += y; sxx += x * x; sxy += x * y;
        ++k;
    }
    return (k * sxy - sx * sy) / (k * sxx - sx * sx);
}

namespace {

double ratio_of(const std::vector<DecadeConstants>& d, double DecadeConstants::*f) {
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (const auto& x : d) {
        if (x.*f <= 0.0) continue;
        lo = std::min(lo, x.*f);
        hi = std::max(hi, x.*f);
    }
    return hi > 0.0 ? hi / lo : 1.0;
}

}  // namespace

double CertifyReport::ratio_z() const { return ratio_of(decades, &DecadeConstants::c_z); }
double CertifyReport::ratio_dt() const { return ratio_of(decades, &DecadeConstants::c_dt); }
double CertifyReport::ratio_wz() const { return ratio_of(decades, &DecadeConstants::c_wz); }

CertifyReport estimate_certify(const HeatKernel& hk, const CertifyGrid& grid) {
    const int p = hk.prime();
    const int n = hk.dim();
    const double alpha = hk.alpha();
    const double gamma = grid.gamma > 0.0 ? grid.gamma : alpha;
    CertifyReport rep;
    rep.min_z = std::numeric_limits<double>::infinity();
    std::map<int, DecadeConstants> dec;
    for (double t : grid.times) {
        const int d = static_cast<int>(std::floor(std::log10(t) + 1e-9));
        auto& dc = dec[d];
        dc.decade = d;
        const double scale = std::pow(t, 1.0 / (alpha - n));
        for (const Shell& x : grid.shells) {
            const double xn = x ? ppow(p, *x) : 0.0;
            const double h = xn + scale;
            const double z = hk.z(x, t).value;
            const double wz = hk.w_gamma_z(gamma, x, t).value;
            const double cz = z * std::pow(h, alpha) / t;
            const double cwz = std::abs(wz) * std::pow(h, gamma);
            if (!std::isfinite(cz) || !std::isfinite(cwz)) throw std::runtime_error("non-finite kernel constant");
            rep.min_z = std::min(rep.min_z, z);
            rep.c_z = std::max(rep.c_z, cz);
            rep.c_wz = std::max(rep.c_wz, cwz);
            dc.c_z = std::max(dc.c_z, cz);
            dc.c_wz = std::max(dc.c_wz, cwz);
            if (x) {
                const double dz = std::abs(hk.z_dt(x, t).value);
                const double cdt = dz * std::pow(h, alpha);
                if (!std::isfinite(cdt)) throw std::runtime_error("non-finite kernel constant");
                rep.c_dt = std::max(rep.c_dt, cdt);
                dc.c_dt = std::max(dc.c_dt, cdt);
                rep.c_dt_small_time = std::max(rep.c_dt_small_time, dz * std::pow(xn, 2 * alpha - n) / t);
                rep.c_dt_far = std::max(rep.c_dt_far, dz * std::pow(xn, alpha) / hk.kappa());
            }
            ++rep.samples;
        }
    }
    for (auto& [k, v] : dec) rep.decades.push_back(v);
    if (rep.samples == 0) rep.min_z = 0.0;
    return rep;
}

std::vector<double> scaling_times(int p, double alpha, int n, int k_lo, int k_hi) {
    std::vector<double> t;
    for (int k = k_lo; k <= k_hi; ++k) t.push_back(ppow(p, k / (alpha - n)));
    return t;
}

void write_kernel_csv(std::ostream& os, const HeatKernel& hk, const std::vector<int>& shells,
                      const std::vector<double>& times, double gamma) {
    auto old = os.precision(17);
    os << "shell_exp,t,Z,dZdt,WgammaZ,tail_bound\n";
    for (double t : times)
        for (int b : shells) {
            SeriesValue z = hk.z(Shell{b}, t);
            SeriesValue dz = hk.z_dt(Shell{b}, t);
            SeriesValue wz = hk.w_gamma_z(gamma, Shell{b}, t);
            os << b << ',' << t << ',' << z.value << ',' << dz.value << ',' << wz.value << ','
               << std::max({z.tail_bound, dz.tail_bound, wz.tail_bound}) << '\n';
        }
    os.precision(old);
}

ParamKernel::ParamKernel(HeatKernelParams base, CoefficientFn a0, double mu)
    : hk_((base.kappa = 1.0, std::move(base))), a0_(std::move(a0)), mu_(mu) {
    if (!(mu > 0.0)) throw std::invalid_argument("hypothesis mu > 0 violated");
}

double ParamKernel::a0(const PAdicPoint& y, double theta) const {
    const double a = a0_(y, theta);
    if (!(a >= mu_)) throw std::domain_error("uniform parabolicity a0 >= mu violated");
    return a;
}

double ParamKernel::z(Shell x, double t, const PAdicPoint& y, double theta) const {
    if (!(t > 0.0)) throw std::domain_error("kernel needs t > 0");
    return hk_.z_s(x, a0(y, theta) * t).value;
}

double ParamKernel::z_dt(Shell x, double t, const PAdicPoint& y, double theta) const {
    if (!(t > 0.0)) throw std::domain_error("kernel needs t > 0");
    const double k = a0(y, theta);
    return k * hk_.dz_ds(x, k * t).value;
}

double ParamKernel::w_gamma_z(double gamma, Shell x, double t, const PAdicPoint& y, double theta) const {
    if (!(t > 0.0)) throw std::domain_error("kernel needs t > 0");
    return hk_.w_gamma_z_s(gamma, x, a0(y, theta) * t).value;
}

double ParamKernel::ball_prob(int gamma, double t, const PAdicPoint& y, double theta) const {
    if (!(t > 0.0)) throw std::domain_error("kernel needs t > 0");
    return hk_.ball_mass_s(gamma, a0(y, theta) * t).inside;
}

}  // namespace padic
