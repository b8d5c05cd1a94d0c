#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "padicpar/levi.hpp"
#include "padicverify/checks.hpp"

using namespace padic;

namespace {

LeviConfig small_config() {
    LeviConfig c;
    c.mesh_nodes = 16;
    c.exterior_shells = 24;
    return c;
}

// a0(t) = 1 + t everywhere
CoefficientField time_varying(int samples) {
    CoefficientField cf = CoefficientField::constant(2, 1, 2.5, 1.0, -1, 0, 1.0);
    cf.times.clear();
    cf.a0.clear();
    for (int i = 0; i < samples; ++i) {
        const double t = static_cast<double>(i) / (samples - 1);
        cf.times.push_back(t);
        cf.a0.push_back(LocallyConstantFn::constant(2, 1, -1, 0, 1.0 + t));
    }
    cf.v = 0.5;
    return cf;
}

}  // namespace

TEST_CASE("constant coefficients reproduce the heat kernel") {
    const FundamentalSolution fs(CoefficientField::constant(2, 1, 2.5, 1.0, -1, 0, 1.0), small_config());
    CHECK(padicverify::degeneration_error(fs) < 1e-6);
    for (const auto& t : fs.series().terms) CHECK(t.sup_mass < 1e-12);
}

TEST_CASE("spatially constant a0(t) gives the kernel at s = ∫ a0") {
    const FundamentalSolution fs(time_varying(17), small_config());
    const HeatKernel hk(HeatKernelParams::power(2, 1, 2.5, 1.0));
    const double t = 1.0;
    const DenseMatrix L = fs.lambda_mass(t, 0);
    const double s = t + 0.5 * t * t;
    const LocallyConstantFn z = padicverify::kernel_function(hk, s / hk.kappa(), fs.field().ell(), fs.field().M());
    // row of the origin cell: mass of the origin cell and of a few exterior shells
    const double vol0 = fs.state_volume(0);
    CHECK(L(0, 0) == doctest::Approx(z[0] * vol0).epsilon(2e-3));
    for (std::size_t st = fs.cell_states(); st < fs.cell_states() + 6; ++st)
        CHECK(L(0, st) == doctest::Approx(hk.z(fs.state_shell(st), s).value * fs.state_volume(st)).epsilon(2e-3));
}

TEST_CASE("variable coefficients: mass, positivity and Chapman–Kolmogorov") {
    CoefficientField cf = CoefficientField::constant(2, 1, 2.5, 1.0, -1, 0, 1.0);
    cf.mu = 0.5;
    LocallyConstantFn a = LocallyConstantFn::constant(2, 1, -1, 0, 1.0);
    a[1] = 1.5;
    cf.a0 = {a};
    const FundamentalSolution fs(cf, small_config());
    const padicverify::LambdaSummary s = padicverify::lambda_summary(fs, {fs.mesh().size() - 1});
    CHECK(s.mass_error < 1e-3);
    CHECK(s.min_density > -1e-6);
    for (const auto& pr : padicverify::ck_probes(fs, 5, 3)) CHECK(pr.residual < 1e-2);
    CHECK(fs.phi_residual(1.0, 0) < 1e-3);
}

TEST_CASE("hypotheses are named") {
    CoefficientField cf = CoefficientField::constant(2, 1, 2.5, 1.0, -1, 0, 1.0);
    cf.mu = 2.0;
    try {
        cf.validate();
        FAIL("accepted a0 < mu");
    } catch (const std::domain_error& e) {
        CHECK(std::string(e.what()).find("parabolicity") != std::string::npos);
    }
    cf = CoefficientField::constant(2, 1, 2.5, 1.0, -1, 0, 1.0);
    cf.alphas = {1.6, 1.5};
    cf.a = {{LocallyConstantFn::constant(2, 1, -1, 0, 0.1)}, {LocallyConstantFn::constant(2, 1, -1, 0, 0.1)}};
    CHECK_THROWS_WITH_AS(cf.validate(), doctest::Contains("alpha_1 < ... < alpha_N"), std::domain_error);
    cf.alphas = {1.6, 2.4};
    // alpha_{N+1} = 1 + 1.5 * 0.5 = 1.75 < 2.4
    CHECK_THROWS_WITH_AS(cf.validate(), doctest::Contains("alpha_{N+1}"), std::domain_error);
}

TEST_CASE("mesh queries") {
    const FundamentalSolution fs(CoefficientField::constant(2, 1, 2.5, 1.0, -1, 0, 1.0), small_config());
    CHECK(fs.mesh().front() == 0.0);
    CHECK(fs.mesh().back() == doctest::Approx(1.0));
    CHECK_THROWS(fs.node(0.123456));
    CHECK(fs.states() == fs.cell_states() + 24);
}

TEST_CASE("time integral majorant holds with a stable constant") {
    std::vector<double> ratios;
    for (double tau : {0.0, 0.5, 0.9, 0.99}) {
        const JBoundResult r = j_bound(Shell{0}, 1.0, tau, 0.5, 0.5, 0.4, 0.4, 1.5, 2, 1);
        CHECK(r.j > 0.0);
        ratios.push_back(r.ratio());
    }
    const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
    CHECK(*hi / *lo < 10.0);
    CHECK_THROWS(j_bound(Shell{0}, 1.0, 1.0, 0.5, 0.5, 0.4, 0.4, 1.5, 2, 1));
}
