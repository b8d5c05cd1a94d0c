#include <cmath>

#include "doctest.h"
#include "padicpar/cauchy.hpp"
#include "padicverify/checks.hpp"

using namespace padic;

namespace {

CauchyProblemConst problem(LocallyConstantFn phi, std::optional<TimeSampledFn> f, double T = 1.0) {
    return CauchyProblemConst{HeatKernelParams::power(2, 1, 2.5, 1.0), std::move(phi), std::move(f), T};
}

}  // namespace

TEST_CASE("unit source gives u = t") {
    const LocallyConstantFn zero(2, 1, -2, 1);
    const CauchySolver s(problem(zero, TimeSampledFn::constant_in_time(LocallyConstantFn::constant(2, 1, -2, 1, 1.0))));
    for (double t : {0.1, 0.5, 1.0}) {
        const LocallyConstantFn u = s.solve(t);
        for (std::size_t i = 0; i < u.cells(); ++i) CHECK(u[i] == doctest::Approx(t).epsilon(1e-9));
        CHECK(u.exterior(10) == doctest::Approx(t).epsilon(1e-9));
    }
}

TEST_CASE("constant initial datum is stationary") {
    const CauchySolver s(problem(LocallyConstantFn::constant(2, 1, -1, 1, 2.0), std::nullopt));
    const LocallyConstantFn u = s.solve(0.8);
    for (std::size_t i = 0; i < u.cells(); ++i) CHECK(u[i] == doctest::Approx(2.0).epsilon(1e-10));
    // datum on another prime is rejected
    CHECK_THROWS(CauchySolver(problem(LocallyConstantFn::constant(3, 1, -1, 1, 2.0), std::nullopt)));
}

TEST_CASE("solution satisfies the equation") {
    CounterRng rng(17, 0);
    const LocallyConstantFn phi = padicverify::random_function(2, 1, -2, 1, rng);
    const LocallyConstantFn f0 = padicverify::random_function(2, 1, -2, 1, rng);
    const LocallyConstantFn f1 = padicverify::random_function(2, 1, -2, 1, rng);
    const CauchySolver s(problem(phi, TimeSampledFn({0.0, 1.0}, {f0, f1}), 1.0));
    for (double t : {0.25, 0.75}) CHECK(residual(s, t) < 1e-4);
}

TEST_CASE("semigroup and linearity") {
    CounterRng rng(19, 0);
    const LocallyConstantFn phi = padicverify::random_function(2, 1, -2, 1, rng);
    const LocallyConstantFn phi2 = padicverify::random_function(2, 1, -2, 1, rng);
    const CauchySolver s(problem(phi, std::nullopt, 2.0));
    CHECK(padicverify::solver_semigroup_error(s, 0.4, 0.6) < 1e-8);
    const auto pb = problem(phi, TimeSampledFn::constant_in_time(phi2));
    CHECK(padicverify::const_linearity_error(pb, phi2, 0.5) < 1e-12);
}

TEST_CASE("eigenfunction of W decays at its symbol rate") {
    // 1_{B_0} - p^{-1} 1_{B_1} has a single dual shell (‖xi‖ = 1), so Z_t * g = e^{-t A(p)} g
    const int p = 2;
    const LocallyConstantFn g =
        LocallyConstantFn::indicator_ball(p, 1, -1, 2, 0) - (1.0 / p) * LocallyConstantFn::indicator_ball(p, 1, -1, 2, 1);
    const CauchySolver s(problem(g, std::nullopt));
    const double a = s.kernel().symbol(0);
    const LocallyConstantFn u = s.solve(0.7);
    for (std::size_t i = 0; i < u.cells(); ++i) CHECK(u[i] == doctest::Approx(std::exp(-0.7 * a) * g[i]).epsilon(1e-10));
}

TEST_CASE("nonnegative data stay nonnegative") {
    const LocallyConstantFn phi = LocallyConstantFn::indicator_ball(2, 1, -2, 1, -1);
    const CauchySolver s(problem(phi, TimeSampledFn::constant_in_time(LocallyConstantFn::indicator_ball(2, 1, -2, 1, 0))));
    const LocallyConstantFn u = s.solve(1.0);
    for (std::size_t i = 0; i < u.cells(); ++i) CHECK(u[i] >= -1e-12);
    for (int k = 2; k < 30; ++k) CHECK(u.exterior(k) >= -1e-12);
}

TEST_CASE("validation names the hypothesis") {
    LocallyConstantFn phi = LocallyConstantFn::constant(2, 1, -1, 1, 1.0);
    phi.lambda = 2.0;
    try {
        CauchySolver s(problem(phi, std::nullopt));
        FAIL("accepted growth beyond the gap");
    } catch (const std::domain_error& e) {
        CHECK(std::string(e.what()).find("alpha - n > lambda") != std::string::npos);
    }
    const CauchySolver s(problem(LocallyConstantFn::constant(2, 1, -1, 1, 1.0), std::nullopt));
    CHECK_THROWS_AS(s.solve(1.5), std::out_of_range);
    CHECK_THROWS_AS(s.solve(0.0), std::out_of_range);
}

TEST_CASE("time sampled source interpolates") {
    const LocallyConstantFn a = LocallyConstantFn::constant(2, 1, 0, 1, 1.0);
    const LocallyConstantFn b = LocallyConstantFn::constant(2, 1, 0, 1, 3.0);
    const TimeSampledFn f({0.0, 1.0}, {a, b});
    CHECK(f.at(0.25)[0] == doctest::Approx(1.5));
    CHECK(f.at(5.0)[0] == doctest::Approx(3.0));
    CHECK_THROWS(TimeSampledFn({1.0, 0.5}, {a, b}));
}
