#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/rational.hpp>

#include "padicpar/rng.hpp"

namespace padic {

using Rational = boost::rational<std::int64_t>;

/// Raised when a digit window cannot hold a requested value or operation.
class WindowError : public std::range_error {
public:
    using std::range_error::range_error;
};

/// Digit positions [lo, hi]; digit j carries weight p^j.
struct Window {
    int lo = -16;
    int hi = 15;
    int width() const { return hi - lo + 1; }
    bool operator==(const Window&) const = default;
};

/// p^k as an exact rational; throws std::overflow_error past int64.
Rational rational_pow(int p, int k);
double real_pow(int p, double k);

/// Element of Q_p known through digit position `hi`.
///
/// Digits below `lo` are exactly zero. Digits above `hi` are dropped; when a
/// value or operation produced nonzero digits there, `lost_high()` is set and
/// the value is only determined modulo p^{hi+1}. `lost_low()` marks digits that
/// fell below the window, which makes the fractional part unavailable.
class PAdicScalar {
public:
    PAdicScalar() = default;
    PAdicScalar(int p, Window w);

    static PAdicScalar from_integer(long long v, int p, Window w = {});
    /// a/b by the p-adic division algorithm.
    static PAdicScalar from_rational(long long a, long long b, int p, Window w = {});
    /// digits[k] is the digit at position w.lo + k.
    static PAdicScalar from_digits(int p, Window w, std::vector<int> digits);

    int prime() const { return p_; }
    Window window() const { return w_; }
    int digit(int j) const;
    const std::vector<int>& digits() const { return d_; }

    bool is_zero() const;
    bool lost_high() const { return lost_high_; }
    bool lost_low() const { return lost_low_; }
    bool truncated() const { return lost_high_ || lost_low_; }

    /// nullopt encodes ord(0) = +infinity.
    std::optional<int> ord() const;
    Rational norm() const;
    double norm_value() const;

    /// {x}_p as an exact rational in [0,1).
    Rational fractional_part() const;
    std::complex<double> character() const;

    PAdicScalar operator-() const;
    friend PAdicScalar operator+(const PAdicScalar& a, const PAdicScalar& b);
    friend PAdicScalar operator-(const PAdicScalar& a, const PAdicScalar& b);
    friend PAdicScalar operator*(const PAdicScalar& a, const PAdicScalar& b);

    /// Value equality on the positions both operands determine.
    bool same_value(const PAdicScalar& other) const;

    /// "lo:" followed by digits lo..hi, least significant first.
    std::string digit_string() const;

private:
    int p_ = 2;
    Window w_{};
    std::vector<int> d_;
    bool lost_high_ = false;
    bool lost_low_ = false;
};

struct OrdNorm {
    std::optional<int> ord;
    Rational norm;
};

OrdNorm ord_and_norm(const PAdicScalar& x);
Rational fractional_part(const PAdicScalar& x);
std::complex<double> character(const PAdicScalar& x);

/// Point of Q_p^n; coordinates share one prime.
class PAdicPoint {
public:
    PAdicPoint() = default;
    explicit PAdicPoint(std::vector<PAdicScalar> coords);
    static PAdicPoint zero(int p, int n, Window w = {});

    int prime() const;
    int dim() const { return static_cast<int>(c_.size()); }
    const PAdicScalar& operator[](int i) const { return c_[static_cast<std::size_t>(i)]; }
    const std::vector<PAdicScalar>& coords() const { return c_; }

    bool is_zero() const;
    bool truncated() const;
    std::optional<int> ord() const;
    Rational norm() const;
    double norm_value() const;
    /// Shell exponent k with ‖x‖ = p^k; nullopt for the origin.
    std::optional<int> norm_exp() const;

    friend PAdicPoint operator+(const PAdicPoint& a, const PAdicPoint& b);
    friend PAdicPoint operator-(const PAdicPoint& a, const PAdicPoint& b);
    bool same_value(const PAdicPoint& other) const;

private:
    std::vector<PAdicScalar> c_;
};

/// xi . x = sum_j xi_j x_j
PAdicScalar dot(const PAdicPoint& a, const PAdicPoint& b);

/// Psi(x . xi) = chi_p(sum_j x_j xi_j)
std::complex<double> pairing_character(const PAdicPoint& x, const PAdicPoint& xi);

struct Ball {
    PAdicPoint center;
    int radius_exp = 0;

    bool contains(const PAdicPoint& x) const;
};

enum class BallRelation { disjoint, equal, first_inside, second_inside };

/// Ultrametric balls are nested or disjoint; this says which.
BallRelation relate(const Ball& a, const Ball& b);

Rational ball_volume(int p, int gamma, int n);
Rational shell_volume(int p, int gamma, int n);
double ball_volume_value(int p, double gamma, int n);
double shell_volume_value(int p, int gamma, int n);

/// Haar-uniform point of the ball.
PAdicPoint sample_uniform(const Ball& ball, CounterRng& rng);

/// Haar-uniform point of the shell ‖x - center‖ = p^gamma.
PAdicPoint sample_shell(const PAdicPoint& center, int gamma, CounterRng& rng);

}  // namespace padic
