#include <algorithm>
#include <cmath>
#include <tuple>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "padicpar/heat_kernel.hpp"

using namespace padic;

namespace {

double mass(const HeatKernel& hk, double t) {
    double m = hk.z(Shell{}, t).value * ball_volume_value(hk.prime(), -80, hk.dim());
    for (int k = -79; k <= 160; ++k) m += hk.z(Shell{k}, t).value * shell_volume_value(hk.prime(), k, hk.dim());
    return m;
}

}  // namespace

TEST_CASE("kernel values against the naive Fourier series") {
    const HeatKernel hk(HeatKernelParams::power(2, 1, 2.0, 1.0));
    for (Shell b : {Shell{}, Shell{-2}, Shell{0}, Shell{1}, Shell{3}})
        CHECK(hk.z(b, 1.0).value == doctest::Approx(oracle::heat_kernel(2, 2.0, 1.0, b, 1.0)).epsilon(1e-12));
    // frozen from the oracle
    CHECK(hk.z(Shell{}, 1.0).value == doctest::Approx(0.96179513943210038).epsilon(1e-13));
    CHECK(hk.z(Shell{-2}, 1.0).value == doctest::Approx(0.94191596771592145).epsilon(1e-13));
    CHECK(hk.z(Shell{0}, 1.0).value == doctest::Approx(0.40599651938999937).epsilon(1e-13));
    CHECK(hk.z(Shell{1}, 1.0).value == doctest::Approx(0.15676012679741441).epsilon(1e-13));
    CHECK(hk.z(Shell{3}, 1.0).value == doctest::Approx(0.013863803925078563).epsilon(1e-12));

    const HeatKernel h3(HeatKernelParams::power(3, 1, 2.5, 1.0));
    CHECK(h3.z(Shell{-1}, 0.5).value == doctest::Approx(1.897285383905418).epsilon(1e-12));
    CHECK(h3.z(Shell{0}, 0.5).value == doctest::Approx(0.3643955614074833).epsilon(1e-12));
    CHECK(h3.z(Shell{2}, 0.5).value == doctest::Approx(0.0020328473567627764).epsilon(1e-11));
}

TEST_CASE("unit mass and positivity") {
    for (auto [p, n, alpha] : {std::tuple{2, 1, 2.5}, std::tuple{3, 1, 1.5}, std::tuple{2, 2, 3.0}}) {
        const HeatKernel hk(HeatKernelParams::power(p, n, alpha, 1.0));
        for (double t : {1e-3, 0.1, 1.0, 4.0}) {
            CHECK(std::abs(mass(hk, t) - 1.0) < 1e-9);
            for (int k = -20; k <= 20; ++k) CHECK(hk.z(Shell{k}, t).value >= -1e-12);
        }
    }
}

TEST_CASE("time derivative matches a finite difference") {
    const HeatKernel hk(HeatKernelParams::power(2, 1, 2.5, 1.0));
    for (Shell b : {Shell{}, Shell{-1}, Shell{2}, Shell{6}}) {
        const double t = 0.3, h = 1e-5;
        const double fd = (hk.z(b, t + h).value - hk.z(b, t - h).value) / (2 * h);
        CHECK(hk.z_dt(b, t).value == doctest::Approx(fd).epsilon(1e-6));
    }
}

TEST_CASE("heat equation: dZ/dt = kappa W_alpha Z") {
    const HeatKernel hk(HeatKernelParams::power(3, 1, 2.5, 2.0));
    for (Shell b : {Shell{}, Shell{-3}, Shell{0}, Shell{4}}) {
        const double lhs = hk.z_dt(b, 0.7).value;
        const double rhs = hk.kappa() * hk.w_gamma_z(2.5, b, 0.7).value;
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
    }
}

TEST_CASE("W_gamma Z integrates to zero") {
    const HeatKernel hk(HeatKernelParams::power(2, 1, 2.5, 1.0));
    for (double gamma : {2.5, 1.75})
        for (double s : {0.01, 1.0}) CHECK(std::abs(hk.ball_integral_w_gamma_z_s(gamma, 200, s)) < 1e-8);
}

TEST_CASE("ball probabilities") {
    const HeatKernel hk(HeatKernelParams::power(2, 1, 2.5, 1.0));
    double prev = 0.0;
    for (int g = -20; g <= 40; ++g) {
        const BallMass b = hk.ball_mass(g, 1.0);
        CHECK(b.inside >= prev - 1e-15);
        CHECK(b.inside + b.outside == doctest::Approx(1.0).epsilon(1e-12));
        prev = b.inside;
    }
    // concentration as t -> 0
    CHECK(hk.ball_prob(0, 1e-6) > 0.999);
    CHECK(hk.ball_prob(-1, 1e-8) > hk.ball_prob(-1, 1e-2));
}

TEST_CASE("larger kappa spreads the kernel") {
    const HeatKernel a(HeatKernelParams::power(2, 1, 2.5, 1.0));
    const HeatKernel b(HeatKernelParams::power(2, 1, 2.5, 2.0));
    CHECK(b.z(Shell{}, 1.0).value < a.z(Shell{}, 1.0).value);
    // only kappa t matters
    CHECK(b.z(Shell{3}, 0.5).value == doctest::Approx(a.z(Shell{3}, 1.0).value).epsilon(1e-14));
}

TEST_CASE("power-law decay") {
    const HeatKernel hk(HeatKernelParams::power(2, 1, 2.5, 1.0));
    CHECK(decay_slope(hk, 1.0, 20, 40) == doctest::Approx(-2.5).epsilon(0.01));
}

TEST_CASE("parametrised kernel uses a0 at the frozen point") {
    const HeatKernelParams base = HeatKernelParams::power(2, 1, 2.5, 1.0);
    const ParamKernel pk(base, [](const PAdicPoint& y, double) { return y.norm_exp() && *y.norm_exp() > 0 ? 2.0 : 1.0; },
                         0.5);
    const HeatKernel hk(base);
    const PAdicPoint near = PAdicPoint::zero(2, 1);
    const PAdicPoint far({PAdicScalar::from_rational(1, 4, 2)});
    CHECK(pk.z(Shell{1}, 0.3, near, 0.0) == doctest::Approx(hk.z(Shell{1}, 0.3).value));
    CHECK(pk.z(Shell{1}, 0.3, far, 0.0) == doctest::Approx(hk.z(Shell{1}, 0.6).value));
    CHECK_THROWS(ParamKernel(base, [](const PAdicPoint&, double) { return 0.1; }, 0.5).z(Shell{0}, 1.0, near, 0.0));
}

TEST_CASE("kernel csv") {
    const HeatKernel hk(HeatKernelParams::power(2, 1, 2.5, 1.0));
    std::ostringstream os;
    write_kernel_csv(os, hk, {0, 1}, {1.0}, 2.5);
    std::string s = os.str();
    CHECK(std::count(s.begin(), s.end(), '\n') == 3);
}

TEST_CASE("invalid parameters") {
    CHECK_THROWS(HeatKernel(HeatKernelParams::power(2, 1, 1.0, 1.0)));
    CHECK_THROWS(HeatKernel(HeatKernelParams::power(4, 1, 2.5, 1.0)));
    CHECK_THROWS(HeatKernel(HeatKernelParams::power(2, 1, 2.5, 0.0)));
}
