#include "padicpar/padic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace padic {

namespace {

void check_prime(int p) {
    if (p < 2) throw std::invalid_argument("prime must be >= 2");
    for (int q = 2; q * q <= p; ++q)
        if (p % q == 0) throw std::invalid_argument("p must be prime");
}

void check_window(Window w) {
    if (w.lo > w.hi) throw std::invalid_argument("window requires lo <= hi");
}

std::int64_t ipow_checked(std::int64_t p, int k) {
    std::int64_t r = 1;
    for (int i = 0; i < k; ++i) {
        if (r > std::numeric_limits<std::int64_t>::max() / p)
            throw std::overflow_error("p^k exceeds int64");
        r *= p;
    }
    return r;
}

long long inverse_mod(long long b, long long p) {
    long long t = 0, nt = 1, r = p, nr = ((b % p) + p) % p;
    while (nr != 0) {
        long long q = r / nr;
        std::swap(t, nt);
        nt -= q * t;
        std::swap(r, nr);
        nr -= q * r;
    }
    if (r != 1) throw std::invalid_argument("denominator not invertible mod p");
    return (t % p + p) % p;
}

}  // namespace

Rational rational_pow(int p, int k) {
    if (k >= 0) return Rational(ipow_checked(p, k));
    return Rational(1, ipow_checked(p, -k));
}

double real_pow(int p, double k) { return std::pow(static_cast<double>(p), k); }

PAdicScalar::PAdicScalar(int p, Window w) : p_(p), w_(w), d_(static_cast<std::size_t>(w.width()), 0) {
    check_prime(p);
    check_window(w);
}

PAdicScalar PAdicScalar::from_integer(long long v, int p, Window w) {
    return from_rational(v, 1, p, w);
}

PAdicScalar PAdicScalar::from_rational(long long a, long long b, int p, Window w) {
    if (b == 0) throw std::invalid_argument("zero denominator");
    PAdicScalar x(p, w);
    if (a == 0) return x;
    int v = 0;
    while (a % p == 0) { a /= p; ++v; }
    while (b % p == 0) { b /= p; --v; }
    if (b < 0) { a = -a; b = -b; }
    const long long binv = inverse_mod(b, p);
    __int128 num = a;
    for (int pos = v; pos <= w.hi; ++pos) {
        if (num == 0) break;
        long long r = static_cast<long long>(((num % p) + p) % p);
        long long dgt = static_cast<long long>((static_cast<__int128>(r) * binv) % p);
        num = (num - static_cast<__int128>(dgt) * b) / p;
        if (pos < w.lo) {
            if (dgt != 0) x.lost_low_ = true;
            continue;
        }
        x.d_[static_cast<std::size_t>(pos - w.lo)] = static_cast<int>(dgt);
    }
    if (num != 0) x.lost_high_ = true;
    return x;
}

PAdicScalar PAdicScalar::from_digits(int p, Window w, std::vector<int> digits) {
    PAdicScalar x(p, w);
    if (static_cast<int>(digits.size()) != w.width())
        throw std::invalid_argument("digit count does not match window");
    for (int dg : digits)
        if (dg < 0 || dg >= p) throw std::invalid_argument("digit out of range");
    x.d_ = std::move(digits);
    return x;
}

int PAdicScalar::digit(int j) const {
    if (j < w_.lo || j > w_.hi) return 0;
    return d_[static_cast<std::size_t>(j - w_.lo)];
}

bool PAdicScalar::is_zero() const {
    return std::all_of(d_.begin(), d_.end(), [](int v) { return v == 0; });
}

std::optional<int> PAdicScalar::ord() const {
    for (int j = w_.lo; j <= w_.hi; ++j)
        if (digit(j) != 0) return j;
    return std::nullopt;
}

Rational PAdicScalar::norm() const {
    auto o = ord();
    if (!o) return Rational(0);
    return rational_pow(p_, -*o);
}

double PAdicScalar::norm_value() const {
    auto o = ord();
    if (!o) return 0.0;
    return real_pow(p_, -*o);
}

Rational PAdicScalar::fractional_part() const {
    if (lost_low_) throw WindowError("window too narrow: negative digits were truncated");
    if (w_.lo >= 0) return Rational(0);
    // sum_{j<0} d_j p^j = (sum_{j<0} d_j p^{j-lo}) / p^{-lo}
    std::int64_t num = 0;
    const std::int64_t den = ipow_checked(p_, -w_.lo);
    std::int64_t scale = 1;
    for (int j = w_.lo; j < 0; ++j) {
        num += static_cast<std::int64_t>(digit(j)) * scale;
        if (j + 1 < 0) scale *= p_;
    }
    return Rational(num, den);
}

std::complex<double> PAdicScalar::character() const {
    Rational f = fractional_part();
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(f.numerator()) /
                         static_cast<double>(f.denominator());
    return std::polar(1.0, angle);
}

PAdicScalar PAdicScalar::operator-() const { return PAdicScalar(p_, w_) - *this; }

PAdicScalar operator+(const PAdicScalar& a, const PAdicScalar& b) {
    if (a.p_ != b.p_) throw std::invalid_argument("prime mismatch");
    Window w{std::min(a.w_.lo, b.w_.lo), std::min(a.w_.hi, b.w_.hi)};
    PAdicScalar r(a.p_, w);
    int carry = 0;
    for (int j = w.lo; j <= w.hi; ++j) {
        int s = a.digit(j) + b.digit(j) + carry;
        carry = s >= a.p_ ? 1 : 0;
        r.d_[static_cast<std::size_t>(j - w.lo)] = s - carry * a.p_;
    }
    bool dropped = carry != 0;
    for (int j = w.hi + 1; j <= a.w_.hi; ++j) dropped = dropped || a.digit(j) != 0;
    for (int j = w.hi + 1; j <= b.w_.hi; ++j) dropped = dropped || b.digit(j) != 0;
    r.lost_high_ = a.lost_high_ || b.lost_high_ || dropped;
    r.lost_low_ = a.lost_low_ || b.lost_low_;
    return r;
}

PAdicScalar operator-(const PAdicScalar& a, const PAdicScalar& b) {
    if (a.p_ != b.p_) throw std::invalid_argument("prime mismatch");
    Window w{std::min(a.w_.lo, b.w_.lo), std::min(a.w_.hi, b.w_.hi)};
    PAdicScalar r(a.p_, w);
    int borrow = 0;
    for (int j = w.lo; j <= w.hi; ++j) {
        int s = a.digit(j) - b.digit(j) - borrow;
        borrow = s < 0 ? 1 : 0;
        r.d_[static_cast<std::size_t>(j - w.lo)] = s + borrow * a.p_;
    }
    bool dropped = borrow != 0;
    for (int j = w.hi + 1; j <= a.w_.hi; ++j) dropped = dropped || a.digit(j) != 0;
    for (int j = w.hi + 1; j <= b.w_.hi; ++j) dropped = dropped || b.digit(j) != 0;
    r.lost_high_ = a.lost_high_ || b.lost_high_ || dropped;
    r.lost_low_ = a.lost_low_ || b.lost_low_;
    return r;
}

PAdicScalar operator*(const PAdicScalar& a, const PAdicScalar& b) {
    if (a.p_ != b.p_) throw std::invalid_argument("prime mismatch");
    const int p = a.p_;
    auto oa = a.ord();
    auto ob = b.ord();
    Window w{std::min(a.w_.lo, b.w_.lo), std::min(a.w_.hi, b.w_.hi)};
    if (!oa || !ob) {
        PAdicScalar z(p, w);
        z.lost_low_ = a.lost_low_ || b.lost_low_;
        return z;
    }
    // An input known only mod p^{hi+1} contaminates the product above hi + ord(other).
    if (a.lost_high_) w.hi = std::min(w.hi, a.w_.hi + *ob);
    if (b.lost_high_) w.hi = std::min(w.hi, b.w_.hi + *oa);
    if (w.hi < w.lo) throw WindowError("product has no determined digits in the window");

    const int base = a.w_.lo + b.w_.lo;
    const int top = w.hi;  // highest position we need
    const int len = top - base + 1;
    std::vector<long long> acc(static_cast<std::size_t>(std::max(len, 0)) + 1, 0);
    for (int i = *oa; i <= a.w_.hi; ++i) {
        int da = a.digit(i);
        if (da == 0) continue;
        for (int j = *ob; j <= b.w_.hi && i + j <= top; ++j) {
            int db = b.digit(j);
            if (db == 0) continue;
            acc[static_cast<std::size_t>(i + j - base)] += static_cast<long long>(da) * db;
        }
    }
    PAdicScalar r(p, w);
    long long carry = 0;
    bool lost_low = a.lost_low_ || b.lost_low_;
    for (int k = 0; k < len; ++k) {
        long long s = acc[static_cast<std::size_t>(k)] + carry;
        int dg = static_cast<int>(s % p);
        carry = s / p;
        int pos = base + k;
        if (pos < w.lo) {
            if (dg != 0) lost_low = true;
        } else {
            r.d_[static_cast<std::size_t>(pos - w.lo)] = dg;
        }
    }
    bool dropped = carry != 0;
    if (!dropped) {
        // any nonzero product digit above top?
        for (int i = *oa; i <= a.w_.hi && !dropped; ++i)
            for (int j = *ob; j <= b.w_.hi; ++j)
                if (i + j > top && a.digit(i) != 0 && b.digit(j) != 0) { dropped = true; break; }
    }
    r.lost_high_ = a.lost_high_ || b.lost_high_ || dropped;
    r.lost_low_ = lost_low;
    return r;
}

bool PAdicScalar::same_value(const PAdicScalar& o) const {
    if (p_ != o.p_) return false;
    const int lo = std::min(w_.lo, o.w_.lo);
    const int hi = std::min(w_.hi, o.w_.hi);
    for (int j = lo; j <= hi; ++j)
        if (digit(j) != o.digit(j)) return false;
    return true;
}

std::string PAdicScalar::digit_string() const {
    std::string s = std::to_string(w_.lo) + ":";
    for (int j = w_.lo; j <= w_.hi; ++j) {
        int dg = digit(j);
        if (p_ <= 36) {
            s.push_back(static_cast<char>(dg < 10 ? '0' + dg : 'a' + dg - 10));
        } else {
            if (j > w_.lo) s.push_back('.');
            s += std::to_string(dg);
        }
    }
    return s;
}

OrdNorm ord_and_norm(const PAdicScalar& x) { return {x.ord(), x.norm()}; }
Rational fractional_part(const PAdicScalar& x) { return x.fractional_part(); }
std::complex<double> character(const PAdicScalar& x) { return x.character(); }

PAdicPoint::PAdicPoint(std::vector<PAdicScalar> coords) : c_(std::move(coords)) {
    if (c_.empty()) throw std::invalid_argument("point needs at least one coordinate");
    for (const auto& s : c_)
        if (s.prime() != c_.front().prime()) throw std::invalid_argument("prime mismatch");
}

PAdicPoint PAdicPoint::zero(int p, int n, Window w) {
    return PAdicPoint(std::vector<PAdicScalar>(static_cast<std::size_t>(n), PAdicScalar(p, w)));
}

int PAdicPoint::prime() const { return c_.front().prime(); }

bool PAdicPoint::is_zero() const {
    return std::all_of(c_.begin(), c_.end(), [](const PAdicScalar& s) { return s.is_zero(); });
}

bool PAdicPoint::truncated() const {
    return std::any_of(c_.begin(), c_.end(), [](const PAdicScalar& s) { return s.truncated(); });
}

std::optional<int> PAdicPoint::ord() const {
    std::optional<int> best;
    for (const auto& s : c_) {
        auto o = s.ord();
        if (o && (!best || *o < *best)) best = o;
    }
    return best;
}

Rational PAdicPoint::norm() const {
    auto o = ord();
    return o ? rational_pow(prime(), -*o) : Rational(0);
}

double PAdicPoint::norm_value() const {
    auto o = ord();
    return o ? real_pow(prime(), -*o) : 0.0;
}

std::optional<int> PAdicPoint::norm_exp() const {
    auto o = ord();
    if (!o) return std::nullopt;
    return -*o;
}

PAdicPoint operator+(const PAdicPoint& a, const PAdicPoint& b) {
    if (a.dim() != b.dim()) throw std::invalid_argument("dimension mismatch");
    std::vector<PAdicScalar> c;
    c.reserve(a.c_.size());
    for (std::size_t i = 0; i < a.c_.size(); ++i) c.push_back(a.c_[i] + b.c_[i]);
    return PAdicPoint(std::move(c));
}

PAdicPoint operator-(const PAdicPoint& a, const PAdicPoint& b) {
    if (a.dim() != b.dim()) throw std::invalid_argument("dimension mismatch");
    std::vector<PAdicScalar> c;
    c.reserve(a.c_.size());
    for (std::size_t i = 0; i < a.c_.size(); ++i) c.push_back(a.c_[i] - b.c_[i]);
    return PAdicPoint(std::move(c));
}

bool PAdicPoint::same_value(const PAdicPoint& o) const {
    if (dim() != o.dim()) return false;
    for (std::size_t i = 0; i < c_.size(); ++i)
        if (!c_[i].same_value(o.c_[i])) return false;
    return true;
}

PAdicScalar dot(const PAdicPoint& a, const PAdicPoint& b) {
    if (a.dim() != b.dim()) throw std::invalid_argument("dimension mismatch");
    PAdicScalar s = a[0] * b[0];
    for (int i = 1; i < a.dim(); ++i) s = s + a[i] * b[i];
    return s;
}

std::complex<double> pairing_character(const PAdicPoint& x, const PAdicPoint& xi) {
    return dot(x, xi).character();
}

bool Ball::contains(const PAdicPoint& x) const {
    auto o = (x - center).ord();
    return !o || *o >= -radius_exp;
}

BallRelation relate(const Ball& a, const Ball& b) {
    if (a.radius_exp == b.radius_exp) {
        return a.contains(b.center) ? BallRelation::equal : BallRelation::disjoint;
    }
    if (a.radius_exp < b.radius_exp)
        return b.contains(a.center) ? BallRelation::first_inside : BallRelation::disjoint;
    return a.contains(b.center) ? BallRelation::second_inside : BallRelation::disjoint;
}

Rational ball_volume(int p, int gamma, int n) { return rational_pow(p, gamma * n); }

Rational shell_volume(int p, int gamma, int n) {
    return rational_pow(p, gamma * n) - rational_pow(p, (gamma - 1) * n);
}

double ball_volume_value(int p, double gamma, int n) { return real_pow(p, gamma * n); }

double shell_volume_value(int p, int gamma, int n) {
    return real_pow(p, static_cast<double>(gamma) * n) * (1.0 - real_pow(p, -n));
}

namespace {

PAdicScalar random_digits(int p, Window w, int from, CounterRng& rng, int lead_value) {
    std::vector<int> d(static_cast<std::size_t>(w.width()), 0);
    for (int j = std::max(from, w.lo); j <= w.hi; ++j)
        d[static_cast<std::size_t>(j - w.lo)] = static_cast<int>(rng.below(static_cast<std::uint64_t>(p)));
    if (lead_value >= 0 && from >= w.lo && from <= w.hi) d[static_cast<std::size_t>(from - w.lo)] = lead_value;
    return PAdicScalar::from_digits(p, w, std::move(d));
}

}  // namespace

PAdicPoint sample_uniform(const Ball& ball, CounterRng& rng) {
    const int p = ball.center.prime();
    const int from = -ball.radius_exp;
    std::vector<PAdicScalar> c;
    for (const auto& s : ball.center.coords()) {
        if (from < s.window().lo) throw WindowError("precision window too narrow for ball radius");
        c.push_back(random_digits(p, s.window(), from, rng, -1));
    }
    return ball.center + PAdicPoint(std::move(c));
}

PAdicPoint sample_shell(const PAdicPoint& center, int gamma, CounterRng& rng) {
    const int p = center.prime();
    const int n = center.dim();
    const int lead = -gamma;
    for (const auto& s : center.coords())
        if (lead < s.window().lo || lead > s.window().hi)
            throw WindowError("precision window too narrow for shell");
    // leading digit vector uniform over the p^n - 1 nonzero vectors
    std::uint64_t total = 1;
    for (int i = 0; i < n; ++i) total *= static_cast<std::uint64_t>(p);
    std::uint64_t code = 1 + rng.below(total - 1);
    std::vector<PAdicScalar> c;
    for (int i = 0; i < n; ++i) {
        int lv = static_cast<int>(code % static_cast<std::uint64_t>(p));
        code /= static_cast<std::uint64_t>(p);
        c.push_back(random_digits(p, center[i].window(), lead, rng, lv));
    }
    return center + PAdicPoint(std::move(c));
}

}  // namespace padic
