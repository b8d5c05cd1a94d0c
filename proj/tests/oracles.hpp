#pragma once
// Independent reference computations for the tests. Nothing here calls the
// library's series code; everything is a direct sum.

#include <cmath>
#include <complex>
#include <functional>
#include <optional>
#include <vector>

namespace oracle {

inline double ppow(int p, double e) { return std::pow(static_cast<double>(p), e); }

/// ∫_{‖y‖ = p^k} exp(2πi {y xi}) dy over Q_p^n with xi = (p^{-r}, 0, ..), by
/// enumerating y modulo p^{J+1} digit by digit.
inline double brute_shell_character(int k, int r, int n, int p) {
    const int lo = -k, J = std::max(r, lo) + 1;
    const int D = J - lo + 1;  // digits per coordinate
    const double cell = ppow(p, -static_cast<double>(J + 1) * n);
    long long per = 1;
    for (int i = 0; i < D; ++i) per *= p;
    long long total = 1;
    for (int c = 0; c < n; ++c) total *= per;
    std::complex<double> sum = 0.0;
    std::vector<int> d(static_cast<std::size_t>(D));
    for (long long code = 0; code < total; ++code) {
        long long rest = code;
        bool on_shell = false;
        double frac = 0.0;
        for (int c = 0; c < n; ++c) {
            long long v = rest % per;
            rest /= per;
            for (int i = 0; i < D; ++i) {
                d[static_cast<std::size_t>(i)] = static_cast<int>(v % p);
                v /= p;
            }
            if (d[0] != 0) on_shell = true;
            if (c == 0)
                for (int i = 0; i < D; ++i) {
                    const int pos = lo + i - r;  // position after multiplying by p^{-r}
                    if (pos < 0) frac += d[static_cast<std::size_t>(i)] * ppow(p, pos);
                }
        }
        if (!on_shell) continue;
        sum += std::polar(1.0, 2.0 * M_PI * (frac - std::floor(frac)));
    }
    return (sum * cell).real();
}

/// Same integral from ∫_{B_k} exp(2πi {y xi}) = p^{kn} [k + r <= 0]; n = 1.
inline double shell_character(int k, int r, int p) {
    auto ball = [&](int g) { return g + r <= 0 ? ppow(p, g) : 0.0; };
    return ball(k) - ball(k - 1);
}

/// A(p^m) for w = ‖y‖^alpha, n = 1: sum over shells of (vol - char) / w.
inline double symbol(int p, double alpha, int m) {
    double a = 0.0;
    const int k0 = -m + 1;
    for (int k = k0; k < k0 + 400; ++k) {
        const double vol = ppow(p, k) * (1.0 - 1.0 / p);
        a += (vol - shell_character(k, m, p)) * ppow(p, -k * alpha);
    }
    return a;
}

/// Z(x, t) on ‖x‖ = p^beta (nullopt: x = 0), n = 1, as the naive Fourier
/// series over the shells m = -shells .. shells.
inline double heat_kernel(int p, double alpha, double kappa, std::optional<int> beta, double t, int shells = 60) {
    double z = 0.0;
    for (int m = -shells; m <= shells; ++m) {
        const double e = std::exp(-kappa * t * symbol(p, alpha, m));
        z += e * (beta ? shell_character(m, *beta, p) : ppow(p, m) * (1.0 - 1.0 / p));
    }
    return z;
}

}  // namespace oracle
