#include "padicpar/radial.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace padic {

namespace {

constexpr int kExtraShells = 40;

double ppow(int p, double e) { return std::pow(static_cast<double>(p), e); }

double shell_vol(int p, int n, int k) { return ppow(p, double(k) * n) * (1.0 - ppow(p, -n)); }

}  // namespace

double PowerTail::at(int p, int m) const {
    if (c == 0.0) return 0.0;
    return c * ppow(p, double(m) * s);
}

std::string to_string(ProfileKind k) {
    switch (k) {
        case ProfileKind::w_kernel: return "w-kernel";
        case ProfileKind::symbol: return "symbol";
        case ProfileKind::kernel_slice: return "kernel-slice";
        case ProfileKind::generic: return "generic";
    }
    return "generic";
}

ProfileKind profile_kind_from_string(const std::string& s) {
    if (s == "w-kernel") return ProfileKind::w_kernel;
    if (s == "symbol") return ProfileKind::symbol;
    if (s == "kernel-slice") return ProfileKind::kernel_slice;
    if (s == "generic") return ProfileKind::generic;
    throw std::invalid_argument("unknown profile kind: " + s);
}

RadialProfile::RadialProfile(int p, int n, int m_lo, std::vector<double> values, PowerTail lower,
                             PowerTail upper, ProfileKind kind)
    : p_(p), n_(n), m_lo_(m_lo), v_(std::move(values)), lower_(lower), upper_(upper), kind_(kind) {
    if (p < 2) throw std::invalid_argument("profile prime must be >= 2");
    if (n < 1) throw std::invalid_argument("profile dimension must be >= 1");
    if (v_.empty()) throw std::invalid_argument("profile table is empty");
    for (double x : v_)
        if (!std::isfinite(x)) throw std::invalid_argument("profile table has a non-finite value");
    if (kind_ == ProfileKind::w_kernel) {
        for (double x : v_)
            if (!(x > 0.0)) throw std::invalid_argument("w-kernel must be positive away from 0");
        if (!(lower_.c > 0.0) || !(upper_.c > 0.0))
            throw std::invalid_argument("w-kernel tails must be positive");
        if (lower_.s != upper_.s) throw std::invalid_argument("w-kernel tails must share one exponent");
        alpha_ = upper_.s;
    }
}

RadialProfile RadialProfile::power(int p, int n, double s, double c, int m_lo, int m_hi, ProfileKind kind) {
    if (m_hi < m_lo) throw std::invalid_argument("empty profile range");
    std::vector<double> v;
    v.reserve(static_cast<std::size_t>(m_hi - m_lo + 1));
    PowerTail t{s, c};
    for (int m = m_lo; m <= m_hi; ++m) v.push_back(t.at(p, m));
    return RadialProfile(p, n, m_lo, std::move(v), t, t, kind);
}

RadialProfile RadialProfile::w_power(int p, int n, double alpha, int m_lo, int m_hi) {
    if (!(alpha > n)) throw std::invalid_argument("hypothesis alpha > n violated");
    return power(p, n, alpha, 1.0, m_lo, m_hi, ProfileKind::w_kernel);
}

RadialProfile RadialProfile::w_tabulated(int p, int n, double alpha, double C0, double C1, int m_lo,
                                         std::vector<double> values, double c_lower, double c_upper) {
    if (!(alpha > n)) throw std::invalid_argument("hypothesis alpha > n violated");
    if (!(C0 > 0.0) || C1 < C0) throw std::invalid_argument("w-kernel needs 0 < C0 <= C1");
    auto inside = [&](double c) { return c >= C0 * (1 - 1e-12) && c <= C1 * (1 + 1e-12); };
    for (std::size_t i = 0; i < values.size(); ++i) {
        int m = m_lo + static_cast<int>(i);
        double r = values[i] / ppow(p, m * alpha);
        if (!inside(r))
            throw std::invalid_argument("w-kernel violates C0 |y|^alpha <= w <= C1 |y|^alpha at shell " +
                                        std::to_string(m));
    }
    if (!inside(c_lower) || !inside(c_upper))
        throw std::invalid_argument("w-kernel tail coefficients outside [C0, C1]");
    RadialProfile w(p, n, m_lo, std::move(values), {alpha, c_lower}, {alpha, c_upper}, ProfileKind::w_kernel);
    return w;
}

double RadialProfile::operator()(int m) const {
    if (m < m_lo_) return lower_.at(p_, m);
    if (m > m_hi()) return upper_.at(p_, m);
    return v_[static_cast<std::size_t>(m - m_lo_)];
}

double RadialProfile::alpha() const {
    if (!alpha_) throw std::logic_error("profile is not a w-kernel");
    return *alpha_;
}

RadialProfile RadialProfile::scaled(double a) const {
    std::vector<double> v = v_;
    for (double& x : v) x *= a;
    ProfileKind k = (kind_ == ProfileKind::w_kernel && !(a > 0.0)) ? ProfileKind::generic : kind_;
    return RadialProfile(p_, n_, m_lo_, std::move(v), {lower_.s, lower_.c * a}, {upper_.s, upper_.c * a}, k);
}

RadialProfile RadialProfile::combine(double a, const RadialProfile& f, double b, const RadialProfile& g) {
    if (f.p_ != g.p_ || f.n_ != g.n_) throw std::invalid_argument("profiles over different spaces");
    auto merge = [](const PowerTail& x, double ax, const PowerTail& y, double by) {
        if (x.c == 0.0 || ax == 0.0) return PowerTail{y.s, by * y.c};
        if (y.c == 0.0 || by == 0.0) return PowerTail{x.s, ax * x.c};
        if (x.s != y.s) throw std::invalid_argument("cannot combine tails with different exponents");
        return PowerTail{x.s, ax * x.c + by * y.c};
    };
    int lo = std::min(f.m_lo(), g.m_lo());
    int hi = std::max(f.m_hi(), g.m_hi());
    std::vector<double> v;
    for (int m = lo; m <= hi; ++m) v.push_back(a * f(m) + b * g(m));
    return RadialProfile(f.p_, f.n_, lo, std::move(v), merge(f.lower_, a, g.lower_, b),
                         merge(f.upper_, a, g.upper_, b), ProfileKind::generic);
}

void write_profile(std::ostream& os, const RadialProfile& f) {
    auto old = os.precision(17);
    os << "# radial profile\n";
    os << "p " << f.prime() << "\n";
    os << "n " << f.dim() << "\n";
    os << "m_lo " << f.m_lo() << "\n";
    os << "m_hi " << f.m_hi() << "\n";
    os << "kind " << to_string(f.kind()) << "\n";
    os << "lower_tail " << f.lower().s << " " << f.lower().c << "\n";
    os << "upper_tail " << f.upper().s << " " << f.upper().c << "\n";
    for (int m = f.m_lo(); m <= f.m_hi(); ++m) os << m << " " << f(m) << "\n";
    os.precision(old);
}

RadialProfile read_profile(std::istream& is) {
    int p = 0, n = 0, m_lo = 0, m_hi = 0;
    bool have_lo = false, have_hi = false;
    ProfileKind kind = ProfileKind::generic;
    PowerTail lower, upper;
    std::vector<std::pair<int, double>> rows;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string key;
        if (!(ls >> key)) continue;
        auto fail = [&] { throw std::runtime_error("profile parse error at line " + std::to_string(lineno)); };
        if (key == "p") { if (!(ls >> p)) fail(); }
        else if (key == "n") { if (!(ls >> n)) fail(); }
        else if (key == "m_lo") { if (!(ls >> m_lo)) fail(); have_lo = true; }
        else if (key == "m_hi") { if (!(ls >> m_hi)) fail(); have_hi = true; }
        else if (key == "kind") { std::string k; if (!(ls >> k)) fail(); kind = profile_kind_from_string(k); }
        else if (key == "lower_tail") { if (!(ls >> lower.s >> lower.c)) fail(); }
        else if (key == "upper_tail") { if (!(ls >> upper.s >> upper.c)) fail(); }
        else {
            std::istringstream row(line);
            int m;
            double v;
            if (!(row >> m >> v)) fail();
            rows.emplace_back(m, v);
        }
    }
    if (!have_lo || !have_hi || m_hi < m_lo) throw std::runtime_error("profile header missing m_lo/m_hi");
    std::vector<double> v(static_cast<std::size_t>(m_hi - m_lo + 1), std::numeric_limits<double>::quiet_NaN());
    for (auto [m, x] : rows) {
        if (m < m_lo || m > m_hi) throw std::runtime_error("profile row outside [m_lo, m_hi]");
        v[static_cast<std::size_t>(m - m_lo)] = x;
    }
    for (double x : v)
        if (std::isnan(x)) throw std::runtime_error("profile table has missing rows");
    return RadialProfile(p, n, m_lo, std::move(v), lower, upper, kind);
}

Rational shell_character_integral(int k, int r, int n, int p) {
    if (r <= -k) return rational_pow(p, k * n) * Rational(rational_pow(p, n) - 1) / rational_pow(p, n);
    if (r == -k + 1) return -rational_pow(p, (k - 1) * n);
    return Rational(0);
}

SeriesValue compute_symbol(const RadialProfile& w, int m, double rel_tol) {
    if (w.kind() != ProfileKind::w_kernel) throw std::invalid_argument("compute_symbol needs a w-kernel profile");
    const int p = w.prime();
    const int n = w.dim();
    const double s = w.upper().s;
    if (!(s > n)) throw std::domain_error("symbol series diverges: w tail exponent must exceed n");
    // p^{kn}/w(p^k), computed without forming p^{kn} on the power-law tails
    auto q = [&](int k) {
        if (k < w.m_lo()) return ppow(p, k * (n - w.lower().s)) / w.lower().c;
        if (k > w.m_hi()) return ppow(p, k * (n - s)) / w.upper().c;
        return ppow(p, double(k) * n) / w(k);
    };
    const double shell = 1.0 - ppow(p, -n);
    const int k0 = -m + 1;
    double sum = q(k0);
    const int k_end = std::max(k0, w.m_hi()) + kExtraShells;
    for (int k = k0 + 1; k <= k_end; ++k) sum += shell * q(k);
    const double r = ppow(p, n - s);
    const double tail = shell * q(k_end + 1) / (1.0 - r);
    sum += tail;
    if (tail > rel_tol * sum) throw std::runtime_error("symbol tail bound exceeds tolerance");
    return {sum, tail};
}

double symbol_power_constant(int p, int n, double alpha) {
    return (1.0 - ppow(p, -alpha)) / (ppow(p, alpha - n) - 1.0);
}

SeriesValue ball_integral_radial(const RadialProfile& f, int gamma) {
    const int p = f.prime();
    const int n = f.dim();
    const double shell = 1.0 - ppow(p, -n);
    const int L = std::min(gamma, f.m_lo()) - kExtraShells;
    double sum = 0.0;
    for (int m = gamma; m >= L; --m) sum += f(m) * shell_vol(p, n, m);
    const PowerTail& t = f.lower();
    double tail = 0.0;
    if (t.c != 0.0) {
        const double e = t.s + n;
        if (!(e > 0.0)) throw std::domain_error("ball integral diverges: inner tail exponent s <= -n");
        tail = t.c * shell * ppow(p, (L - 1) * e) / (1.0 - ppow(p, -e));
    }
    return {sum + tail, std::abs(tail)};
}

SeriesValue radial_integral(const RadialProfile& f) {
    const int p = f.prime();
    const int n = f.dim();
    const int top = f.m_hi() + kExtraShells;
    SeriesValue inner = ball_integral_radial(f, top);
    const PowerTail& t = f.upper();
    double tail = 0.0;
    if (t.c != 0.0) {
        const double e = t.s + n;
        if (!(e < 0.0)) throw std::domain_error("integral diverges: outer tail exponent s >= -n");
        tail = t.c * (1.0 - ppow(p, -n)) * ppow(p, (top + 1) * e) / (1.0 - ppow(p, e));
    }
    return {inner.value + tail, inner.tail_bound + std::abs(tail)};
}

SeriesValue radial_inverse_fourier(const RadialProfile& f, int beta) {
    const int p = f.prime();
    const int n = f.dim();
    const double pn = ppow(p, -n);
    // S = sum_{j>=0} f(p^{-beta-j}) p^{-nj}
    const int J = std::max(0, -beta - (f.m_lo() - kExtraShells));
    double S = 0.0;
    for (int j = 0; j < J; ++j) S += f(-beta - j) * ppow(p, -double(n) * j);
    double rem = 0.0;
    const PowerTail& t = f.lower();
    if (t.c != 0.0) {
        const double e = t.s + n;
        if (!(e > 0.0)) throw std::domain_error("inverse transform diverges: inner tail exponent s <= -n");
        rem = t.c * ppow(p, (-beta - J) * t.s - double(n) * J) / (1.0 - ppow(p, -e));
    }
    S += rem;
    const double scale = ppow(p, -double(beta) * n);
    const double g = scale * ((1.0 - pn) * S - f(-beta + 1));
    return {g, std::abs(scale * (1.0 - pn) * rem)};
}

double taibleson_gamma(double gamma, int n, int p) {
    const double den = 1.0 - ppow(p, -gamma - n);
    if (den == 0.0 || std::abs(gamma + n) < 1e-14) throw std::domain_error("Taibleson gamma has a pole at gamma = -n");
    return (1.0 - ppow(p, gamma)) / den;
}

SeriesValue radial_apply_w(const RadialProfile& f, const RadialProfile& w, int beta) {
    if (f.prime() != w.prime() || f.dim() != w.dim()) throw std::invalid_argument("profiles over different spaces");
    const int p = f.prime();
    const int n = f.dim();
    const double fb = f(beta);
    SeriesValue ball = ball_integral_radial(f, beta - 1);
    double inner = (ball.value - fb * ppow(p, double(beta - 1) * n)) / w(beta);
    double bound = ball.tail_bound / w(beta);

    const int k_end = std::max({beta + 1, f.m_hi(), w.m_hi()}) + kExtraShells;
    double outer = 0.0;
    for (int k = beta + 1; k <= k_end; ++k) outer += (f(k) - fb) * shell_vol(p, n, k) / w(k);
    const double shell = 1.0 - ppow(p, -n);
    const double sw = w.upper().s;
    const double cw = w.upper().c;
    if (!(sw > n)) throw std::domain_error("W series diverges: w tail exponent must exceed n");
    double rem = 0.0;
    {
        // -f(beta) * sum_{k > k_end} vs(k)/w(k)
        const double r = ppow(p, n - sw);
        rem -= fb * shell * ppow(p, (k_end + 1) * (n - sw)) / cw / (1.0 - r);
    }
    const PowerTail& tf = f.upper();
    if (tf.c != 0.0) {
        const double e = tf.s + n - sw;
        if (!(e < 0.0)) throw std::domain_error("W series diverges: growth of f too fast for w");
        rem += tf.c / cw * shell * ppow(p, (k_end + 1) * e) / (1.0 - ppow(p, e));
    }
    outer += rem;
    bound += std::abs(rem);
    return {inner + outer, bound};
}

double two_center_integral(const std::function<double(int)>& F, const std::function<double(int)>& G,
                           std::optional<int> d, int p, int n, int k_lo, int k_hi) {
    double sum = 0.0;
    if (!d) {
        for (int a = k_lo; a <= k_hi; ++a) sum += F(a) * G(a) * shell_vol(p, n, a);
        return sum;
    }
    const int D = *d;
    if (D >= k_lo && D <= k_hi) {
        const double gd = G(D);
        for (int a = k_lo; a < D; ++a) sum += F(a) * gd * shell_vol(p, n, a);
        double inner = 0.0;
        for (int b = k_lo; b < D; ++b) inner += G(b) * shell_vol(p, n, b);
        const double fd = F(D);
        sum += fd * inner + fd * gd * ppow(p, double(D) * n) * (1.0 - 2.0 * ppow(p, -n));
    }
    for (int a = std::max(k_lo, D + 1); a <= k_hi; ++a) sum += F(a) * G(a) * shell_vol(p, n, a);
    return sum;
}

double ConvBoundReport::ratio() const {
    if (per_b.empty()) return 1.0;
    auto [lo, hi] = std::minmax_element(per_b.begin(), per_b.end());
    return *hi / *lo;
}

double conv_integral(double b, double lambda, double alpha, std::optional<int> x_shell, int p, int n) {
    if (!(b > 0.0)) throw std::invalid_argument("conv_integral needs b > 0");
    if (!(lambda >= 0.0) || !(lambda < alpha)) throw std::domain_error("conv bound needs 0 <= lambda < alpha");
    const double lp = std::log(static_cast<double>(p));
    const double shell = std::log1p(-ppow(p, -n));
    // log of (b + p^a)^{-alpha-n}
    auto logF = [&](int a) {
        double la = a * lp;
        double big = std::max(la, std::log(b));
        return -(alpha + n) * (big + std::log1p(std::exp(std::min(la, std::log(b)) - big)));
    };
    auto logvs = [&](int a) { return a * n * lp + shell; };
    auto upper_sum = [&](int from, double base) {
        // sum_{a >= from} F(a) G(a) vs(a), G(a) = p^{a lambda}
        double s = 0.0;
        for (int a = from; a < from + 200000; ++a) {
            double term = std::exp(logF(a) + a * lambda * lp + logvs(a));
            s += term;
            if (a > from + 8 && a * lp > std::log(b) && term < 1e-18 * (s + base)) break;
        }
        return s;
    };
    if (!x_shell) {
        // x = 0: both centers coincide
        double s = 0.0;
        const int top = std::max(0, static_cast<int>(std::ceil(std::log(b) / lp)));
        for (int a = top; a > top - 4000; --a) {
            double term = std::exp(logF(a) + a * lambda * lp + logvs(a));
            s += term;
            if (term < 1e-18 * s) break;
        }
        return s + upper_sum(top + 1, s);
    }
    const int D = *x_shell;
    double s = 0.0;
    const double gD = std::exp(D * lambda * lp);
    for (int a = D - 1; a > D - 4000; --a) {
        double term = std::exp(logF(a) + logvs(a)) * gD;
        s += term;
        if (term < 1e-18 * s) break;
    }
    // ‖eta - x‖ = p^D: ‖eta‖ < p^D part and ‖eta‖ = p^D part
    const double e = lambda + n;
    const double inner = (1.0 - ppow(p, -n)) * std::exp((D - 1) * e * lp) / (1.0 - ppow(p, -e));
    const double fD = std::exp(logF(D));
    s += fD * (inner + gD * ppow(p, double(D) * n) * (1.0 - 2.0 * ppow(p, -n)));
    return s + upper_sum(D + 1, s);
}

ConvBoundReport conv_bound_check(const std::vector<double>& b_values, double lambda, double alpha,
                                 const std::vector<std::optional<int>>& x_shells, int p, int n) {
    if (!(lambda < alpha)) throw std::domain_error("conv bound needs lambda < alpha");
    ConvBoundReport rep;
    rep.b_values = b_values;
    for (double b : b_values) {
        double best = 0.0;
        for (const auto& xs : x_shells) {
            const double xn = xs ? ppow(p, *xs) : 0.0;
            const double v = conv_integral(b, lambda, alpha, xs, p, n) * std::pow(b, alpha) /
                             (1.0 + std::pow(xn, lambda));
            best = std::max(best, v);
        }
        rep.per_b.push_back(best);
        rep.constant = std::max(rep.constant, best);
    }
    if (!std::isfinite(rep.constant)) throw std::runtime_error("conv bound constant is not finite");
    return rep;
}

}  // namespace padic
