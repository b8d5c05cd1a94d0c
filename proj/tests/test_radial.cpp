#include <cmath>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "padicpar/radial.hpp"

using namespace padic;

TEST_CASE("shell character integral against brute force") {
    CHECK(shell_character_integral(0, 0, 1, 2) == Rational(1, 2));
    for (int p : {2, 3, 5}) CHECK(shell_character_integral(0, 2, 1, p) == Rational(0));
    for (int p : {2, 3})
        for (int k = -3; k <= 3; ++k)
            for (int r = -3; r <= 3; ++r)
                CHECK(boost::rational_cast<double>(shell_character_integral(k, r, 1, p)) ==
                      doctest::Approx(oracle::brute_shell_character(k, r, 1, p)).epsilon(1e-12));
    for (int k = -2; k <= 2; ++k)
        for (int r = -2; r <= 2; ++r)
            CHECK(boost::rational_cast<double>(shell_character_integral(k, r, 2, 2)) ==
                  doctest::Approx(oracle::brute_shell_character(k, r, 2, 2)).epsilon(1e-12));
}

TEST_CASE("symbol of the power kernel") {
    const RadialProfile w = RadialProfile::w_power(2, 1, 2.0);
    // homogeneity: A(p^m) / p^{m(alpha - n)} is the constant 3/4 (frozen from the shell-sum oracle)
    for (int m = -6; m <= 6; ++m) {
        const double a = compute_symbol(w, m).value;
        CHECK(a == doctest::Approx(oracle::symbol(2, 2.0, m)).epsilon(1e-12));
        CHECK(a / std::pow(2.0, m) == doctest::Approx(0.75).epsilon(1e-12));
    }
    CHECK(symbol_power_constant(2, 1, 2.0) == doctest::Approx(0.75));
    const RadialProfile w3 = RadialProfile::w_power(3, 1, 2.5);
    double prev = 0.0;
    for (int m = -20; m <= 10; ++m) {
        const double a = compute_symbol(w3, m).value;
        CHECK(a >= prev);
        prev = a;
    }
    CHECK(compute_symbol(w3, -40).value < 1e-25);
}

TEST_CASE("Taibleson gamma factor") {
    CHECK(taibleson_gamma(1.0, 1, 2) == doctest::Approx(-4.0 / 3.0));
    CHECK(taibleson_gamma(0.5, 2, 3) == doctest::Approx((1 - std::sqrt(3.0)) / (1 - std::pow(3.0, -2.5))));
}

TEST_CASE("ball integral of a convergent power profile") {
    // f(p^m) = p^m on Q_2: sum_{m<=0} p^m p^m (1/2) = 2/3
    const RadialProfile f = RadialProfile::power(2, 1, 1.0, 1.0, -30, 30);
    const SeriesValue s = ball_integral_radial(f, 0);
    double partial = 0.0;
    for (int m = 0; m >= -49; --m) partial += std::pow(2.0, 2.0 * m) * 0.5;
    CHECK(s.value == doctest::Approx(2.0 / 3.0).epsilon(1e-13));
    CHECK(std::abs(s.value - partial) < 1e-14);
}

TEST_CASE("inverse Fourier transform of a radial step") {
    // 1 on ‖xi‖ <= 1, 0.5 on ‖xi‖ = 2, 0 beyond
    std::vector<double> vals(11, 1.0);
    vals.push_back(0.5);
    const RadialProfile f(2, 1, -10, vals, PowerTail{0.0, 1.0}, PowerTail{0.0, 0.0});
    for (int beta = -3; beta <= 3; ++beta) {
        double direct = 0.0;
        for (int m = -200; m <= 1; ++m) direct += f(m) * oracle::shell_character(m, beta, 2);
        CHECK(radial_inverse_fourier(f, beta).value == doctest::Approx(direct).epsilon(1e-12));
    }
}

TEST_CASE("convolution bound constant is stable in b") {
    const std::vector<double> bs{0.125, 0.25, 0.5, 1, 2, 4, 8};
    std::vector<std::optional<int>> xs{std::nullopt};
    for (int k = -4; k <= 8; ++k) xs.push_back(k);
    const ConvBoundReport r = conv_bound_check(bs, 0.0, 2.0, xs, 2, 1);
    CHECK(std::isfinite(r.constant));
    CHECK(r.ratio() < 10.0);
    // I(2b) ≈ 2^{-alpha} I(b) at x = 0 for large b
    const double i1 = conv_integral(64.0, 0.0, 2.0, std::nullopt, 2, 1);
    const double i2 = conv_integral(128.0, 0.0, 2.0, std::nullopt, 2, 1);
    CHECK(i2 / i1 == doctest::Approx(0.25).epsilon(0.05));
    CHECK_THROWS(conv_integral(1.0, 2.0, 2.0, std::nullopt, 2, 1));
}

TEST_CASE("profile text round trip") {
    const RadialProfile w = RadialProfile::w_power(3, 2, 3.5, -5, 5);
    std::stringstream ss;
    write_profile(ss, w);
    const RadialProfile r = read_profile(ss);
    CHECK(r.m_lo() == w.m_lo());
    CHECK(r.m_hi() == w.m_hi());
    for (int m = -8; m <= 8; ++m) CHECK(r(m) == doctest::Approx(w(m)));
}
