#include <doctest.h>

#include <cmath>

#include "adiabatica/experiments.hpp"
#include "adiabatica/models.hpp"
#include "adiabatica/runner.hpp"

using namespace adiabatica;

namespace {

ErrorCurve synthetic(const std::vector<double>& eps,
                     const std::function<double(double)>& err) {
    ErrorCurve c;
    c.epsilons = eps;
    for (double e : eps) c.errors.push_back(err(e));
    return c;
}

ScalarSymbol1 gaussian(double q0, double p0, double sigma) {
    Selector s;
    s.name = "gaussian";
    s.params = {{"q0", q0}, {"p0", p0}, {"sigma", sigma}};
    return make_observable(s);
}

} // namespace

TEST_CASE("fit_order recovers the slope of a noisy power law") {
    const auto c = synthetic({1.0 / 8, 1.0 / 16, 1.0 / 32, 1.0 / 64}, [](double e) {
        return e * e * (1.0 + 0.1 * std::sin(1.0 / e));
    });
    const OrderFit fit = fit_order(c);
    CHECK(!fit.exact);
    CHECK(fit.slope > 1.8);
    CHECK(fit.slope < 2.2);
    CHECK(fit.r_squared > 0.99);
}

TEST_CASE("fit_order flags exact-zero curves instead of fitting") {
    const auto c = synthetic({1.0 / 8, 1.0 / 16, 1.0 / 32}, [](double) { return 1e-16; });
    const OrderFit fit = fit_order(c);
    CHECK(fit.exact);
}

TEST_CASE("fit_order refuses curves with fewer than three points") {
    const auto c = synthetic({1.0 / 8, 1.0 / 16}, [](double e) { return e; });
    CHECK_THROWS_AS(fit_order(c), DegenerateFit);
}

TEST_CASE("egorov error vanishes at t = 0") {
    auto m = make_model("avoided_crossing");
    Grid g;
    g.N = 128;
    g.epsilon = 1.0 / 8;
    const SymbolModel qm = periodized_for_grid(m.symbol, g);
    const GridPack pack = GridPack::build(qm, g);
    const auto a = gaussian(0.5, 0.0, 0.7);
    const double err = egorov_error(qm, a.value, 0.0, FlowMode::corrected_truncated, pack);
    CHECK(err < 1e-10);
}

TEST_CASE("decoupled diagonal model: projector commutes with the propagator") {
    auto m = make_model("decoupled_diag");
    Grid g;
    g.N = 128;
    g.epsilon = 1.0 / 8;
    const GridPack pack = GridPack::build(m.symbol, g);
    CHECK(projector_invariance(1.0, pack) < 1e-10);
}

TEST_CASE("decoupled diagonal model: effective-Hamiltonian residual at rounding level") {
    auto m = make_model("decoupled_diag");
    Grid g;
    g.N = 128;
    g.epsilon = 1.0 / 8;
    const GridPack pack = GridPack::build(m.symbol, g);
    CHECK(effective_hamiltonian_residual(m.symbol, pack, true) < 1e-9);
}

TEST_CASE("scalar Moyal commutator remainder is at least third order") {
    // localized Gaussians; N large enough that the momentum window holds them.
    // The eps = 1/8 point is pre-asymptotic (local slope 2.5), so the sweep
    // starts at 1/16 where the third-order remainder dominates.
    const auto a = gaussian(0.4, 0.2, 0.6);
    const auto b = gaussian(-0.3, -0.1, 0.5);
    std::vector<double> errs;
    const std::vector<double> eps = {1.0 / 16, 1.0 / 32, 1.0 / 64};
    for (double e : eps) {
        Grid g;
        g.N = 1024;
        g.epsilon = e;
        errs.push_back(moyal_commutator_error(a, b, g));
    }
    ErrorCurve c;
    c.epsilons = eps;
    c.errors = errs;
    const OrderFit fit = fit_order(c);
    CHECK(fit.slope > 2.7);
}

TEST_CASE("gaussian observable derivatives match finite differences") {
    const auto a = gaussian(0.3, -0.4, 0.8);
    const double h = 1e-6;
    const double q = 0.9, p = -0.2;
    CHECK(a.dq(q, p) ==
          doctest::Approx((a.value(q + h, p) - a.value(q - h, p)) / (2 * h)).epsilon(1e-5));
    CHECK(a.dp(q, p) ==
          doctest::Approx((a.value(q, p + h) - a.value(q, p - h)) / (2 * h)).epsilon(1e-5));
}

TEST_CASE("energy window is a smooth bump supported on [center-width, center+width]") {
    Selector s;
    s.name = "bump";
    s.params = {{"center", 1.0}, {"width", 0.5}};
    const auto f = make_energy_window(s);
    CHECK(f(1.0) == doctest::Approx(1.0));
    CHECK(f(0.49) == 0.0);
    CHECK(f(1.51) == 0.0);
    CHECK(f(1.2) > 0.0);
    CHECK(f(1.2) < 1.0);
}
