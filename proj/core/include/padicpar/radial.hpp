#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "padicpar/padic.hpp"

namespace padic {

/// A truncated infinite sum: `value` includes the analytically summed
/// remainder, `tail_bound` is the size of that remainder.
struct SeriesValue {
    double value = 0.0;
    double tail_bound = 0.0;
};

/// f(p^m) = c * p^{m s}
struct PowerTail {
    double s = 0.0;
    double c = 0.0;
    double at(int p, int m) const;
};

enum class ProfileKind { w_kernel, symbol, kernel_slice, generic };

std::string to_string(ProfileKind k);
ProfileKind profile_kind_from_string(const std::string& s);

/// Radial function of ‖x‖_p stored per shell exponent m on [m_lo, m_hi],
/// with power-law tails below and above the table.
class RadialProfile {
public:
    RadialProfile(int p, int n, int m_lo, std::vector<double> values, PowerTail lower, PowerTail upper,
                  ProfileKind kind = ProfileKind::generic);

    /// c * ‖x‖^s tabulated on [m_lo, m_hi] with the same law as both tails.
    static RadialProfile power(int p, int n, double s, double c, int m_lo, int m_hi,
                               ProfileKind kind = ProfileKind::generic);

    /// Default jump kernel w(‖y‖) = ‖y‖^alpha.
    static RadialProfile w_power(int p, int n, double alpha, int m_lo = -60, int m_hi = 60);

    /// Tabulated kernel checked against C0 p^{m alpha} <= w <= C1 p^{m alpha}
    /// on the table and with positive values; tails must be pure p^{m alpha}
    /// multiples inside the same bounds.
    static RadialProfile w_tabulated(int p, int n, double alpha, double C0, double C1, int m_lo,
                                     std::vector<double> values, double c_lower, double c_upper);

    double operator()(int m) const;

    int prime() const { return p_; }
    int dim() const { return n_; }
    int m_lo() const { return m_lo_; }
    int m_hi() const { return m_lo_ + static_cast<int>(v_.size()) - 1; }
    const std::vector<double>& values() const { return v_; }
    const PowerTail& lower() const { return lower_; }
    const PowerTail& upper() const { return upper_; }
    ProfileKind kind() const { return kind_; }

    /// Power exponent of a w-kernel (throws for other kinds).
    double alpha() const;

    RadialProfile scaled(double a) const;
    /// Pointwise a*f + b*g on the union table; tails must share exponents.
    static RadialProfile combine(double a, const RadialProfile& f, double b, const RadialProfile& g);

private:
    int p_;
    int n_;
    int m_lo_;
    std::vector<double> v_;
    PowerTail lower_;
    PowerTail upper_;
    ProfileKind kind_;
    std::optional<double> alpha_;
};

void write_profile(std::ostream& os, const RadialProfile& f);
RadialProfile read_profile(std::istream& is);

/// Integral of Psi(-y.xi) over the shell ‖y‖ = p^k with ‖xi‖ = p^r, exact.
Rational shell_character_integral(int k, int r, int n, int p);

/// A_w(p^m) = ∫ (1 - Psi(-y.xi)) / w(‖y‖) d^n y as a shell sum.
SeriesValue compute_symbol(const RadialProfile& w, int m, double rel_tol = 1e-3);

/// A_w(p^m) / p^{m(alpha-n)} for w = ‖y‖^alpha.
double symbol_power_constant(int p, int n, double alpha);

/// Inverse Fourier transform of a radial profile at ‖x‖ = p^beta.
SeriesValue radial_inverse_fourier(const RadialProfile& f, int beta);
/// Same transform at x = 0: the full integral of f.
SeriesValue radial_integral(const RadialProfile& f);

/// sum_{m <= gamma} f(p^m) p^{mn}(1 - p^{-n}).
SeriesValue ball_integral_radial(const RadialProfile& f, int gamma);

/// Gamma_n(n + gamma) = (1 - p^gamma) / (1 - p^{-gamma-n}).
double taibleson_gamma(double gamma, int n, int p);

/// (W_w f)(x) at ‖x‖ = p^beta for a radial f, by the difference integral.
SeriesValue radial_apply_w(const RadialProfile& f, const RadialProfile& w, int beta);

/// ∫ F(‖x-eta‖) G(‖eta-xi‖) d^n eta with ‖x-xi‖ = p^d (nullopt when x = xi).
/// F and G take a shell exponent; shells outside [k_lo, k_hi] are dropped.
double two_center_integral(const std::function<double(int)>& F, const std::function<double(int)>& G,
                           std::optional<int> d, int p, int n, int k_lo, int k_hi);

struct ConvBoundReport {
    double constant = 0.0;                 // sup over samples and b of I * b^alpha / (1 + ‖x‖^lambda)
    std::vector<double> per_b;             // sup over samples for each b
    std::vector<double> b_values;
    double ratio() const;                  // max/min of per_b
};

/// I(x, b) = ∫ (b + ‖x-xi‖)^{-alpha-n} ‖xi‖^lambda d^n xi.
double conv_integral(double b, double lambda, double alpha, std::optional<int> x_shell, int p, int n);

ConvBoundReport conv_bound_check(const std::vector<double>& b_values, double lambda, double alpha,
                                 const std::vector<std::optional<int>>& x_shells, int p, int n);

}  // namespace padic
