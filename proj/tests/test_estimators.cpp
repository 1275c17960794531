#include <doctest.h>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>

#include "gen.hpp"
#include "sbmkit/estimators.hpp"

using namespace sbmkit;

TEST_CASE("closed-form exit time of the stable ball") {
    CHECK(stable_ball_exit_time(1.0, 3, 1.0, 0.0) == doctest::Approx(0.5).epsilon(1e-14));
    // Brownian limit alpha -> 2 is (r^2 - |x|^2) / (2d) for E exp(i xi W_t) = exp(-t xi^2)
    CHECK(stable_ball_exit_time(1.999999, 3, 1.0, 0.5) == doctest::Approx(0.75 / 6).epsilon(1e-5));
    CHECK_THROWS_AS(stable_ball_exit_time(1.0, 3, 1.0, 1.0), std::domain_error);
}

TEST_CASE("ball Green function integrates to the mean exit time") {
    gen::for_all(6, 20, [](gen::Gen& g, int) {
        const double a = g.uniform(0.3, 1.8);
        const int d = 3;
        const double r = g.uniform(0.5, 2.0);
        CAPTURE(a);
        CAPTURE(r);
        // x = 0: G_B(0, y) is radial; int_B G = 4 pi int_0^r rho^2 G(rho) d rho
        boost::math::quadrature::tanh_sinh<double> q;
        const double integral = q.integrate(
            [&](double rho) {
                // the pole at rho = 0 is integrable; tanh_sinh may still land on it in floating point
                const double v = 4 * M_PI * rho * rho * stable_ball_green(a, d, r, {0, 0, 0}, {rho, 0, 0});
                return std::isfinite(v) ? v : 0.0;
            },
            0.0, r);
        CHECK(integral == doctest::Approx(stable_ball_exit_time(a, d, r, 0.0)).epsilon(1e-6));
    });
}

TEST_CASE("ball Green function is symmetric and below the free Green function") {
    gen::for_all(30, 21, [](gen::Gen& g, int) {
        const double a = g.uniform(0.3, 1.8);
        Point x = g.point_in_box(3, 0.55), y = g.point_in_box(3, 0.55);
        const double gxy = stable_ball_green(a, 3, 1.0, x, y), gyx = stable_ball_green(a, 3, 1.0, y, x);
        CHECK(gxy == doctest::Approx(gyx).epsilon(1e-12));
        const double riesz = std::tgamma((3 - a) / 2) /
                             (std::pow(2.0, a) * std::pow(M_PI, 1.5) * std::tgamma(a / 2)) *
                             std::pow(distance(x, y), a - 3);
        CHECK(gxy <= riesz * (1 + 1e-12));
        CHECK(gxy > 0);
    });
}

TEST_CASE("ball Poisson kernel is a probability density") {
    for (double a : {0.5, 1.0, 1.5}) {
        CAPTURE(a);
        auto shell = [&](double s) {
            const double rho = 1 + s;
            return 4 * M_PI * rho * rho * stable_ball_poisson_kernel(a, 3, 1.0, {0, 0, 0}, {rho, 0, 0});
        };
        // 1 + s cannot resolve the s^{-a/2} pole at the sphere, so the first delta of the shell is
        // integrated from the leading term 4 pi c (2 s)^{-a/2}
        const double delta = 1e-6;
        const double c = std::tgamma(1.5) * std::pow(M_PI, -2.5) * std::sin(M_PI * a / 2);
        const double near = 4 * M_PI * c * std::pow(2.0, -a / 2) * std::pow(delta, 1 - a / 2) / (1 - a / 2);
        const double total = near +
                             boost::math::quadrature::tanh_sinh<double>().integrate(shell, delta, 1.0) +
                             boost::math::quadrature::exp_sinh<double>().integrate(shell, 1.0, INFINITY);
        CHECK(total == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("Martin kernel is the boundary limit of Green ratios") {
    const double a = 1.0;
    const Point z{1, 0, 0};
    const Point y{1 - 1e-7, 0, 0};
    for (Point x : {Point{0.3, 0.2, 0}, Point{-0.5, 0, 0.1}}) {
        const double ratio = stable_ball_green(a, 3, 1.0, x, y) / stable_ball_green(a, 3, 1.0, {0, 0, 0}, y);
        const double m = stable_ball_martin_kernel(a, 3, 1.0, x, z) / stable_ball_martin_kernel(a, 3, 1.0, {0, 0, 0}, z);
        CHECK(ratio == doctest::Approx(m).epsilon(1e-5));
    }
}

TEST_CASE("trend fit recovers power laws") {
    const std::vector<double> r{0.5, 0.25, 0.125, 0.0625};
    std::vector<double> c;
    for (double x : r) c.push_back(3 * std::pow(x, 0.7));
    const Trend t = fit_trend(r, c);
    CHECK(t.slope == doctest::Approx(0.7).epsilon(1e-10));
    CHECK(t.spread == doctest::Approx(std::pow(8.0, 0.7)).epsilon(1e-10));
    CHECK_THROWS_AS(fit_trend({1.0}, {1.0}), std::invalid_argument);
}

TEST_CASE("exit-time oracle report at a small sample") {
    ExitOracleOptions o;
    o.paths = 4000;
    o.dt = 1e-3;
    o.seed = 3;
    o.refine_levels = 4;
    const auto rep = verify_exit_time_oracle(SubordinatorModel(BernsteinFamily(Family::Stable, 1.0)), o);
    CHECK(rep.theorem_tag == "exit_time_oracle");
    CHECK(rep.constants.at("exact") == doctest::Approx(0.5));
    CHECK(std::fabs(rep.constants.at("mean") - 0.5) < 5 * rep.constants.at("se") + 0.01);
    CHECK(rep.mc_se > 0);
}

TEST_CASE("slowly varying radius") {
    CHECK(slowly_varying_radius(BernsteinFamily(Family::Stable, 1.0)) == doctest::Approx(1.0));
    const double r = slowly_varying_radius(BernsteinFamily(Family::StableMixture, 1.0, 0.5));
    CHECK(r > 0);
    CHECK(r <= 1);
}

TEST_CASE("boundary patches split the exterior shell") {
    const Domain D = Domain::ball(2);
    const Point q{1, 0, 0};
    const Point t = patch_tangent(D, q);
    CHECK(std::fabs(t[0] * 1 + t[1] * 0) < 1e-12);
    const double r = 0.1;
    CHECK(boundary_patch(D, q, t, r, {1.3, 0.05, 0}) != -1);
    CHECK(boundary_patch(D, q, t, r, {1.3, 0.05, 0}) != boundary_patch(D, q, t, r, {1.3, -0.05, 0}));
    CHECK(boundary_patch(D, q, t, r, {1.05, 0.0, 0}) == -1);  // inside 2r
    CHECK(boundary_patch(D, q, t, r, {0.7, 0.0, 0}) == -1);   // inside D
}

TEST_CASE("jump-exit histogram agrees with the compensator (small sample)") {
    const KernelEvaluator ke(SubordinatorModel(BernsteinFamily(Family::Stable, 1.0)), 3);
    PoissonKernelOptions po;
    po.mc.paths = 4000;
    po.mc.dt_scale = 1e-3;
    po.mc.seed = 5;
    const auto rep = estimate_poisson_kernel(ke, po);
    CHECK(rep.theorem_tag == "poisson_kernel_levy_system");
    // histogram and closed-form cell masses agree
    const auto& h = rep.series.at("histogram");
    const auto& se = rep.series.at("histogram_se");
    const auto& cf = rep.series.at("closed_form");
    for (std::size_t i = 0; i < h.size(); ++i) CHECK(std::fabs(h[i] - cf[i]) <= 4 * se[i] + 1e-3);
    CHECK(rep.constants.at("P2_constant") > 0);
}
