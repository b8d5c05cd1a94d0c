#include <cmath>
#include <map>

#include "doctest.h"
#include "padicpar/padic.hpp"
#include "padicpar/rng.hpp"

using namespace padic;

namespace {

// Value of a window-exact scalar as a rational (integers and p-power denominators only).
Rational value_of(const PAdicScalar& x) {
    Rational v(0);
    for (int j = x.window().lo; j <= x.window().hi; ++j)
        if (int d = x.digit(j)) v += Rational(d) * rational_pow(x.prime(), j);
    // read the top half of the window as negative numbers
    const Rational mod = rational_pow(x.prime(), x.window().hi + 1);
    if (2 * v >= mod) v -= mod;
    return v;
}

long long random_int(CounterRng& rng, long long span) {
    return static_cast<long long>(rng.below(static_cast<std::uint64_t>(2 * span + 1))) - span;
}

}  // namespace

TEST_CASE("digit expansion of small rationals") {
    const PAdicScalar x = PAdicScalar::from_rational(7, 4, 2);
    CHECK(x.ord() == -2);
    CHECK(x.digit(-2) == 1);
    CHECK(x.digit(-1) == 1);
    CHECK(x.digit(0) == 1);
    CHECK(x.digit(1) == 0);
    CHECK(x.fractional_part() == Rational(3, 4));
    CHECK(x.norm() == Rational(4));
}

TEST_CASE("additive character values") {
    const auto c2 = PAdicScalar::from_rational(1, 2, 2).character();
    CHECK(c2.real() == doctest::Approx(-1.0));
    CHECK(std::abs(c2.imag()) < 1e-15);
    const auto c3 = PAdicScalar::from_rational(1, 3, 3).character();
    CHECK(c3.real() == doctest::Approx(-0.5));
    CHECK(c3.imag() == doctest::Approx(std::sqrt(3.0) / 2.0));
    // integers are in the kernel
    CHECK(PAdicScalar::from_integer(12345, 5).character().real() == doctest::Approx(1.0));
}

TEST_CASE("ball volumes") {
    CHECK(ball_volume(2, 0, 1) == Rational(1));
    CHECK(ball_volume(3, 0, 4) == Rational(1));
    CHECK(ball_volume(2, 3, 2) == Rational(64));
    CHECK(shell_volume(3, 1, 1) == Rational(2));
    CHECK(shell_volume(2, 0, 2) == Rational(3, 4));
}

TEST_CASE("dot product in Q_2^2") {
    const PAdicPoint a({PAdicScalar::from_integer(1, 2), PAdicScalar::from_integer(2, 2)});
    const PAdicPoint b({PAdicScalar::from_integer(2, 2), PAdicScalar::from_integer(1, 2)});
    const PAdicScalar d = dot(a, b);
    CHECK(value_of(d) == Rational(4));
    CHECK(d.norm() == Rational(1, 4));
}

TEST_CASE("property: arithmetic agrees with rationals and the norm is ultrametric") {
    for (int p : {2, 3, 5, 7}) {
        CounterRng rng(11, static_cast<std::uint64_t>(p));
        for (int trial = 0; trial < 300; ++trial) {
            // |ab| stays inside half the 2-adic window modulus
            const long long a = random_int(rng, 150), b = random_int(rng, 150);
            const int ea = static_cast<int>(rng.below(4)), eb = static_cast<int>(rng.below(4));
            long long da = 1, db = 1;
            for (int i = 0; i < ea; ++i) da *= p;
            for (int i = 0; i < eb; ++i) db *= p;
            const PAdicScalar x = PAdicScalar::from_rational(a, da, p), y = PAdicScalar::from_rational(b, db, p);
            REQUIRE(value_of(x) == Rational(a, da));
            const PAdicScalar s = x + y, d = x - y, m = x * y;
            CHECK(value_of(s) == Rational(a, da) + Rational(b, db));
            CHECK(value_of(d) == Rational(a, da) - Rational(b, db));
            CHECK(value_of(m) == Rational(a, da) * Rational(b, db));
            CHECK(s.norm() <= std::max(x.norm(), y.norm()));
            if (x.norm() != y.norm()) CHECK(s.norm() == std::max(x.norm(), y.norm()));
            CHECK((x - x).is_zero());
            CHECK((s - y).same_value(x));
            // |xy| = |x||y|
            CHECK(m.norm() == x.norm() * y.norm());
        }
    }
}

TEST_CASE("negative integers carry through the window") {
    const PAdicScalar m1 = PAdicScalar::from_integer(-1, 3, Window{0, 9});
    for (int j = 0; j <= 9; ++j) CHECK(m1.digit(j) == 2);
    CHECK((m1 + PAdicScalar::from_integer(1, 3, Window{0, 9})).is_zero());
}

TEST_CASE("carries past the window are reported") {
    const PAdicScalar big = PAdicScalar::from_integer(7, 2, Window{0, 2});
    const PAdicScalar s = big + PAdicScalar::from_integer(1, 2, Window{0, 2});
    CHECK(s.is_zero());
    CHECK(s.lost_high());
}

TEST_CASE("fractional part needs the low digits") {
    PAdicScalar x = PAdicScalar::from_rational(1, 8, 2, Window{-1, 4});
    CHECK(x.lost_low());
    CHECK_THROWS_AS(x.fractional_part(), WindowError);
}

TEST_CASE("balls are nested or disjoint") {
    CounterRng rng(5, 0);
    for (int trial = 0; trial < 200; ++trial) {
        const PAdicPoint c1({PAdicScalar::from_integer(random_int(rng, 40), 2)});
        const PAdicPoint c2({PAdicScalar::from_integer(random_int(rng, 40), 2)});
        const Ball a{c1, static_cast<int>(rng.below(5)) - 4}, b{c2, static_cast<int>(rng.below(5)) - 4};
        const BallRelation r = relate(a, b);
        const bool ca = b.contains(c1), cb = a.contains(c2);
        if (r == BallRelation::disjoint) CHECK((!ca && !cb));
        if (r == BallRelation::equal) CHECK((ca && cb && a.radius_exp == b.radius_exp));
        if (r == BallRelation::first_inside) CHECK((ca && a.radius_exp <= b.radius_exp));
        if (r == BallRelation::second_inside) CHECK((cb && b.radius_exp <= a.radius_exp));
    }
}

TEST_CASE("shell sampling lands on the shell with Haar sub-ball masses") {
    // ‖x‖ = 2 in Q_2: digits at -1 fixed to 1; the three digits below it are uniform
    const PAdicPoint origin = PAdicPoint::zero(2, 1);
    const int N = 100000;
    std::map<int, int> counts;
    CounterRng rng(42, 1);
    for (int i = 0; i < N; ++i) {
        const PAdicPoint x = sample_shell(origin, 1, rng);
        REQUIRE(x.norm_exp() == 1);
        counts[x[0].digit(0) + 2 * x[0].digit(1) + 4 * x[0].digit(2)]++;
    }
    const double q = 1.0 / 8.0, sigma = std::sqrt(q * (1 - q) / N);
    for (int k = 0; k < 8; ++k) CHECK(std::abs(counts[k] / double(N) - q) < 4 * sigma);
}

TEST_CASE("uniform sampling on a one-digit window") {
    const Ball b{PAdicPoint::zero(2, 1, Window{0, 0}), 0};
    CounterRng rng(3, 3);
    int ones = 0;
    const int N = 20000;
    for (int i = 0; i < N; ++i) {
        const PAdicPoint x = sample_uniform(b, rng);
        const int d = x[0].digit(0);
        REQUIRE((d == 0 || d == 1));
        ones += d;
    }
    CHECK(std::abs(ones / double(N) - 0.5) < 4 * std::sqrt(0.25 / N));
}

TEST_CASE("shells coarser than the window are rejected") {
    CounterRng rng(1, 1);
    CHECK_THROWS_AS(sample_shell(PAdicPoint::zero(2, 1, Window{-4, 4}), 10, rng), WindowError);
}

TEST_CASE("counter generator streams are reproducible and distinct") {
    CounterRng a(9, 4), b(9, 4), c(9, 5);
    bool differs = false;
    for (int i = 0; i < 100; ++i) {
        const auto x = a(), y = b(), z = c();
        CHECK(x == y);
        differs = differs || x != z;
    }
    CHECK(differs);
    CounterRng r(1, 2);
    double mean = 0.0;
    for (int i = 0; i < 100000; ++i) mean += r.uniform01();
    CHECK(mean / 100000 == doctest::Approx(0.5).epsilon(0.01));
}
