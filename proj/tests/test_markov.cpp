#include <algorithm>
#include <cmath>
#include <sstream>

#include "doctest.h"
#include "padicpar/markov.hpp"

using namespace padic;

namespace {

BatchConfig config(std::size_t count, unsigned threads) {
    BatchConfig c;
    c.seed = 42;
    c.count = count;
    c.times = {0.0, 0.25, 1.0};
    c.threads = threads;
    return c;
}

}  // namespace

TEST_CASE("sampler table is the kernel's ball law") {
    const HeatKernel hk(HeatKernelParams::power(2, 1, 2.5, 1.0));
    const ShellSampler sm(hk, 0.5);
    CHECK(sm.lo() < sm.hi());
    for (int g = sm.lo(); g <= sm.hi(); ++g) {
        CHECK(sm.cdf(g) == doctest::Approx(hk.ball_mass_s(g, 0.5).inside).epsilon(1e-14));
        if (g > sm.lo()) CHECK(sm.cdf(g) >= sm.cdf(g - 1));
    }
    CounterRng rng(1, 1);
    for (int i = 0; i < 1000; ++i) {
        const int g = sm.draw(rng);
        CHECK(g > sm.lo());
        CHECK(g <= sm.hi());
    }
    CHECK_THROWS(ShellSampler(hk, 0.0));
}

TEST_CASE("same seed, same trajectories, any thread count") {
    const HeatKernelParams hp = HeatKernelParams::power(3, 1, 2.5, 1.0);
    const TrajectoryBatch a = simulate(config(3000, 1), hp);
    const TrajectoryBatch b = simulate(config(3000, 1), hp);
    const TrajectoryBatch c = simulate(config(3000, 3), hp);
    CHECK(a.raw() == b.raw());
    CHECK(a.raw() == c.raw());
    BatchConfig other = config(3000, 1);
    other.seed = 43;
    CHECK(simulate(other, hp).raw() != a.raw());
}

TEST_CASE("ball masses match the kernel") {
    const HeatKernelParams hp = HeatKernelParams::power(2, 1, 2.5, 1.0);
    const TrajectoryBatch b = simulate(config(20000, 1), hp);
    const HeatKernel hk(hp);
    for (const BallCheck& c : ball_mass_checks(b, hk, {-2, 0, 2, 4})) CHECK(c.pass());
}

TEST_CASE("short steps rarely leave the unit ball") {
    BatchConfig c = config(20000, 1);
    c.times = {0.0, 1e-4};
    const TrajectoryBatch b = simulate(c, HeatKernelParams::power(2, 1, 2.5, 1.0));
    std::size_t stay = 0;
    for (std::size_t i = 0; i < b.count(); ++i) {
        const Shell s = b.displacement_shell(i, 1);
        if (!s || *s <= 0) ++stay;
    }
    CHECK(static_cast<double>(stay) / b.count() >= 0.99);
}

TEST_CASE("increments beyond the window are an error") {
    BatchConfig c = config(2000, 1);
    c.times = {0.0, 1e6};
    c.window = Window{-4, 10};
    CHECK_THROWS_AS(simulate(c, HeatKernelParams::power(2, 1, 1.5, 1.0)), WindowError);
}

TEST_CASE("histogram bins the cells and the outside") {
    const TrajectoryBatch b = simulate(config(5000, 1), HeatKernelParams::power(2, 1, 2.5, 1.0));
    const TransitionHistogram h = histogram(b, 2, -1, 1);
    CHECK(h.counts.size() == 5);  // 2^{1-(-1)} cells of B_1 plus the outside
    std::uint64_t sum = 0;
    for (auto c : h.counts) sum += c;
    CHECK(sum == 5000);
    CHECK(h.total == 5000);
    TransitionHistogram twice = h;
    twice.merge(h);
    CHECK(twice.total == 10000);
}

TEST_CASE("trajectory csv") {
    const TrajectoryBatch b = simulate(config(4, 1), HeatKernelParams::power(2, 2, 3.0, 1.0));
    std::ostringstream os, os2;
    b.write_csv(os);
    simulate(config(4, 1), HeatKernelParams::power(2, 2, 3.0, 1.0)).write_csv(os2);
    const std::string s = os.str();
    CHECK(s.rfind("traj_id,t,x0,x1,shell\n", 0) == 0);
    CHECK(std::count(s.begin(), s.end(), '\n') == 1 + 4 * 3);
    CHECK(s.find("origin") != std::string::npos);  // node 0 has no displacement
    CHECK(s == os2.str());
}

TEST_CASE("variable coefficients agree with the fundamental solution") {
    CoefficientField cf = CoefficientField::constant(2, 1, 2.5, 1.0, -1, 0, 1.0);
    cf.mu = 0.5;
    LocallyConstantFn a = LocallyConstantFn::constant(2, 1, -1, 0, 1.0);
    a[1] = 1.5;
    cf.a0 = {a};
    LeviConfig lc;
    lc.mesh_nodes = 16;
    lc.exterior_shells = 24;
    const FundamentalSolution fs(cf, lc);
    BatchConfig c = config(20000, 1);
    c.times = {0.0, 1.0};
    c.steps_per_interval = 32;
    const TrajectoryBatch b = simulate(c, cf);
    CHECK(b.scheme() == Scheme::frozen_euler);
    CHECK(empirical_vs_lambda(b, fs).pass());
}
