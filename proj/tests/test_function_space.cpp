#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "padicpar/function_space.hpp"
#include "padicverify/checks.hpp"

using namespace padic;

namespace {

double sup_abs_diff(const LocallyConstantFn& a, const LocallyConstantFn& b, int ext = 20) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.cells(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    for (int k = a.M() + 1; k <= a.M() + ext; ++k) d = std::max(d, std::abs(a.exterior(k) - b.exterior(k)));
    return d;
}

}  // namespace

TEST_CASE("cell indexing") {
    const LocallyConstantFn f(3, 2, -1, 1);
    CHECK(f.side() == 9);
    CHECK(f.cells() == 81);
    CHECK(f.cell_volume() == doctest::Approx(1.0 / 9.0));
    CounterRng rng(5, 0);
    for (std::size_t c = 0; c < f.cells(); c += 7) {
        const PAdicPoint x = f.cell_point(c);
        CHECK(f.cell_of(x) == c);
        CHECK(f.cell_shell(c) == (c == 0 ? Shell{} : x.norm_exp()));
    }
}

TEST_CASE("both routes to W agree") {
    for (auto [p, n] : {std::pair{2, 1}, std::pair{3, 1}, std::pair{2, 2}}) {
        const double d = padicverify::w_route_disagreement(p, n, n + 1.5, 5, 11, -2, 1);
        CHECK(d < 1e-10);
    }
}

TEST_CASE("W kills constants and acts on a ball indicator in closed form") {
    const RadialProfile w = RadialProfile::w_power(2, 1, 2.5);
    const LocallyConstantFn one = LocallyConstantFn::constant(2, 1, -2, 1, 3.0);
    const LocallyConstantFn w1 = apply_W_direct(w, one);
    for (std::size_t i = 0; i < w1.cells(); ++i) CHECK(std::abs(w1[i]) < 1e-13);
    CHECK(std::abs(w1.exterior(5)) < 1e-13);

    const LocallyConstantFn ind = LocallyConstantFn::indicator_ball(2, 1, -2, 1, 0);
    const LocallyConstantFn wi = apply_W_direct(w, ind);
    CHECK(wi[0] == doctest::Approx(-outer_w_mass(w, 0)));
    for (int k = 2; k <= 10; ++k) CHECK(wi.exterior(k) == doctest::Approx(std::pow(2.0, -2.5 * k)).epsilon(1e-12));
}

TEST_CASE("W of a compactly supported function integrates to zero") {
    CounterRng rng(7, 1);
    const RadialProfile w = RadialProfile::w_power(3, 1, 2.5);
    for (int c = 0; c < 5; ++c) {
        LocallyConstantFn f = padicverify::random_function(3, 1, -2, 1, rng);
        f.set_tail(std::nullopt);
        CHECK(std::abs(apply_W_direct(w, f).integral()) < 1e-10);
    }
}

TEST_CASE("integral of a convolution is the product of integrals") {
    CounterRng rng(3, 2);
    for (int c = 0; c < 5; ++c) {
        LocallyConstantFn f = padicverify::random_function(2, 1, -2, 1, rng);
        LocallyConstantFn g = padicverify::random_function(2, 1, -2, 1, rng);
        f.set_tail(std::nullopt);
        g.set_tail(std::nullopt);
        const LocallyConstantFn h = convolve(f, g);
        CHECK(h.integral() == doctest::Approx(f.integral() * g.integral()).epsilon(1e-10));
    }
}

TEST_CASE("heat convolution: transform route matches direct sums") {
    const HeatKernel hk(HeatKernelParams::power(2, 1, 2.5, 1.0));
    CounterRng rng(9, 0);
    for (double s : {0.05, 1.0}) {
        LocallyConstantFn f = padicverify::random_function(2, 1, -2, 2, rng);
        f.set_tail(std::nullopt);
        const LocallyConstantFn a = convolve_heat(hk, s, f);
        const LocallyConstantFn b = convolve_heat_direct(hk, s, f);
        CHECK(sup_abs_diff(a, b) < 1e-10);
        CHECK(a.integral() == doctest::Approx(f.integral()).epsilon(1e-8));
    }
}

TEST_CASE("comparison function") {
    const double gamma = 0.3;
    const LocallyConstantFn psi = build_psi(2, 1, 3, gamma, 2);
    for (int k = 3; k <= 12; ++k) CHECK(psi.exterior(k) == doctest::Approx(std::pow(2.0, k * gamma)));
    CHECK(psi[0] == doctest::Approx(psi_core_value(2, 1, 3, gamma)));
    CHECK(psi_core_value(2, 1, 3, gamma) < std::pow(2.0, -3 * gamma));
}

TEST_CASE("ball pieces round trip") {
    CounterRng rng(21, 4);
    for (int c = 0; c < 10; ++c) {
        const LocallyConstantFn f = padicverify::random_function(3, 1, -2, 1, rng, 8);
        const LocallyConstantFn g = LocallyConstantFn::from_pieces(3, 1, -2, 1, f.pieces(), f.tail());
        CHECK(sup_abs_diff(f, g) < 1e-14);
        CHECK(f.pieces().size() <= f.cells());
    }
}

TEST_CASE("regrid keeps values") {
    CounterRng rng(2, 2);
    LocallyConstantFn f = padicverify::random_function(2, 1, -1, 1, rng);
    f.set_tail(std::nullopt);
    const LocallyConstantFn g = f.regrid(-3, 2);
    CounterRng pts(4, 4);
    for (int i = 0; i < 50; ++i) {
        const PAdicPoint x = sample_uniform(Ball{PAdicPoint::zero(2, 1), 1}, pts);
        CHECK(g(x) == doctest::Approx(f(x)));
    }
    CHECK(g.integral() == doctest::Approx(f.integral()));
}

TEST_CASE("growth norm") {
    LocallyConstantFn f = LocallyConstantFn::constant(2, 1, 0, 1, 1.0);
    f.set_tail(RadialTail::power(1, 0.5, 1.0));
    CHECK(std::isfinite(mlambda_norm(f, 0.5)));
    CHECK(std::isinf(mlambda_norm(f, 0.25)));
}

TEST_CASE("grids must agree") {
    const LocallyConstantFn a(2, 1, 0, 1), b(2, 1, -1, 1);
    CHECK_THROWS_AS(a + b, std::invalid_argument);
}

TEST_CASE("property: W is nonnegative at a global minimum") {
    const RadialProfile w = RadialProfile::w_power(2, 1, 2.5);
    CounterRng rng(31, 0);
    int tried = 0;
    for (int c = 0; c < 40; ++c) {
        const LocallyConstantFn f = padicverify::random_function(2, 1, -2, 1, rng, 5);
        const auto it = std::min_element(f.values().begin(), f.values().end());
        if (*it > f.exterior(f.M() + 1)) continue;  // minimum sits on the tail
        ++tried;
        const std::size_t cell = static_cast<std::size_t>(it - f.values().begin());
        CHECK(apply_W_direct(w, f)[cell] >= -1e-12);
    }
    CHECK(tried > 5);
}

TEST_CASE("property: W keeps polynomial growth below the gap") {
    for (double alpha : {2.0, 2.5, 3.0}) {
        LocallyConstantFn f = LocallyConstantFn::indicator_ball(2, 1, -1, 1, 0);
        const double lambda = 0.9 * (alpha - 1.0);
        f.set_tail(RadialTail::power(1, lambda, 1.0));
        f.lambda = lambda;
        const LocallyConstantFn g = apply_W_direct(RadialProfile::w_power(2, 1, alpha), f);
        CHECK(std::isfinite(mlambda_norm(g, lambda)));
    }
}

TEST_CASE("convolution: approximate identity and commutativity") {
    CounterRng rng(13, 1);
    LocallyConstantFn f = padicverify::random_function(3, 1, -2, 1, rng);
    LocallyConstantFn g = padicverify::random_function(3, 1, -2, 1, rng);
    f.set_tail(std::nullopt);
    g.set_tail(std::nullopt);
    // normalised indicator of B_{-2}, the cell size of f
    const LocallyConstantFn delta = std::pow(3.0, 2) * LocallyConstantFn::indicator_ball(3, 1, -2, 1, -2);
    CHECK(sup_abs_diff(convolve(f, delta), f) < 1e-12);
    CHECK(sup_abs_diff(convolve(f, g), convolve(g, f)) < 1e-12);
}
