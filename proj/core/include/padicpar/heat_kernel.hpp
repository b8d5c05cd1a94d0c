#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "padicpar/padic.hpp"
#include "padicpar/radial.hpp"

namespace padic {

/// Shell exponent of ‖x‖ (‖x‖ = p^k); nullopt is the origin.
using Shell = std::optional<int>;

struct HeatKernelParams {
    int p = 2;
    int n = 1;
    double alpha = 2.5;
    double kappa = 1.0;
    RadialProfile w = RadialProfile::w_power(2, 1, 2.5);

    /// w = ‖y‖^alpha.
    static HeatKernelParams power(int p, int n, double alpha, double kappa);
    void validate() const;
};

/// A_w(p^m) on an eagerly built table, computed past its ends on demand.
class SymbolTable {
public:
    explicit SymbolTable(const RadialProfile& w, int m_lo = -400, int m_hi = 400);
    double operator()(int m) const;
    int m_lo() const { return m_lo_; }
    int m_hi() const { return m_lo_ + static_cast<int>(a_.size()) - 1; }
    /// Largest relative tail bound seen while building.
    double max_rel_tail() const { return max_rel_tail_; }

private:
    RadialProfile w_;
    int m_lo_;
    std::vector<double> a_;
    double max_rel_tail_ = 0.0;
};

struct BallMass {
    double inside = 0.0;   // P(‖X‖ <= p^gamma)
    double outside = 0.0;  // 1 - inside, summed without cancellation
};

/// Heat kernel of W_w with diffusion coefficient kappa. Every `_s` method takes
/// the product s = kappa * t, so one object serves all constant kappa values.
class HeatKernel {
public:
    explicit HeatKernel(HeatKernelParams params);

    const HeatKernelParams& params() const { return params_; }
    int prime() const { return params_.p; }
    int dim() const { return params_.n; }
    double alpha() const { return params_.alpha; }
    double kappa() const { return params_.kappa; }

    double symbol(int m) const { return A_(m); }
    /// Symbol of W_gamma: the table itself for gamma = alpha, else that of ‖y‖^gamma.
    double symbol_gamma(double gamma, int m) const;

    SeriesValue z_s(Shell x, double s) const;
    /// d/ds Z at fixed x.
    SeriesValue dz_ds(Shell x, double s) const;
    SeriesValue w_gamma_z_s(double gamma, Shell x, double s) const;
    BallMass ball_mass_s(int gamma, double s) const;
    /// ∫_{B_gamma} W_gamma' Z_s; finite also at s = 0.
    double ball_integral_w_gamma_z_s(double gamma, int ball, double s) const;

    SeriesValue z(Shell x, double t) const;
    SeriesValue z_dt(Shell x, double t) const;
    SeriesValue w_gamma_z(double gamma, Shell x, double t) const;
    BallMass ball_mass(int gamma, double t) const;
    double ball_prob(int gamma, double t) const { return ball_mass(gamma, t).inside; }

    double z(const PAdicPoint& x, double t) const { return z(x.norm_exp(), t).value; }

private:
    enum class Mult { heat, dheat, wgamma };
    double mult(Mult kind, double gamma, int m, double s) const;
    double one_minus_e(int m, double s) const;
    SeriesValue inverse(Mult kind, double gamma, Shell x, double s) const;
    SeriesValue origin_sum(Mult kind, double gamma, double s) const;
    double check_t(double t) const;

    HeatKernelParams params_;
    SymbolTable A_;
    int J_;  // terms kept in the inner geometric sums
};

/// Least-squares slope of log Z against log ‖x‖ over shells [beta_lo, beta_hi].
double decay_slope(const HeatKernel& hk, double t, int beta_lo, int beta_hi);

struct CertifyGrid {
    std::vector<Shell> shells;
    std::vector<double> times;
    double gamma = 0.0;  // for the W_gamma Z constant; 0 means alpha
};

struct DecadeConstants {
    int decade = 0;  // floor(log10 t)
    double c_z = 0.0;
    double c_dt = 0.0;
    double c_wz = 0.0;
};

struct CertifyReport {
    std::size_t samples = 0;
    // sup Z (‖x‖ + t^{1/(alpha-n)})^alpha / t
    double c_z = 0.0;
    // sup |dZ/dt| (‖x‖ + t^{1/(alpha-n)})^alpha, x != 0
    double c_dt = 0.0;
    // sup |W_gamma Z| (‖x‖ + t^{1/(alpha-n)})^gamma
    double c_wz = 0.0;
    // sup |dZ/dt| ‖x‖^{2 alpha - n} / t, x != 0
    double c_dt_small_time = 0.0;
    // sup |dZ/dt| ‖x‖^alpha / kappa, x != 0
    double c_dt_far = 0.0;
    double min_z = 0.0;
    std::vector<DecadeConstants> decades;
    double ratio_z() const;
    double ratio_dt() const;
    double ratio_wz() const;
};

CertifyReport estimate_certify(const HeatKernel& hk, const CertifyGrid& grid);

/// Geometric t-grid p^{k/(alpha-n)}, k in [k_lo, k_hi].
std::vector<double> scaling_times(int p, double alpha, int n, int k_lo, int k_hi);

/// CSV rows (shell_exp, t, Z, dZdt, WgammaZ, tail_bound).
void write_kernel_csv(std::ostream& os, const HeatKernel& hk, const std::vector<int>& shells,
                      const std::vector<double>& times, double gamma);

/// Heat kernel with kappa replaced by a0(y, theta) >= mu.
class ParamKernel {
public:
    using CoefficientFn = std::function<double(const PAdicPoint& y, double theta)>;

    ParamKernel(HeatKernelParams base, CoefficientFn a0, double mu);

    double a0(const PAdicPoint& y, double theta) const;
    double mu() const { return mu_; }
    const HeatKernel& base() const { return hk_; }

    double z(Shell x, double t, const PAdicPoint& y, double theta) const;
    double z_dt(Shell x, double t, const PAdicPoint& y, double theta) const;
    double w_gamma_z(double gamma, Shell x, double t, const PAdicPoint& y, double theta) const;
    double ball_prob(int gamma, double t, const PAdicPoint& y, double theta) const;

private:
    HeatKernel hk_;
    CoefficientFn a0_;
    double mu_;
};

}  // namespace padic
