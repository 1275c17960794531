#include <doctest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>

#include "gen.hpp"
#include "sbmkit/martin.hpp"

using namespace sbmkit;

TEST_CASE("Epanechnikov kernel integrates to one") {
    for (int d = 1; d <= 3; ++d) {
        const double b = 0.3;
        // radial integral of the profile times the sphere area
        const double area = d == 1 ? 2.0 : d == 2 ? 2 * M_PI : 4 * M_PI;
        const double total = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
            [&](double rho) { return area * std::pow(rho, d - 1) * epanechnikov({rho, 0, 0}, d, b); }, 0.0, b);
        CHECK(total == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(epanechnikov({b, 0, 0}, d, b) == 0.0);
    }
}

TEST_CASE("default bandwidth follows the N^{-1/(d+4)} rule") {
    CHECK(default_bandwidth(3, 128) == doctest::Approx(0.4 * std::pow(128.0, -1.0 / 7)));
    CHECK(default_bandwidth(3, 100000) < default_bandwidth(3, 1000));
}

TEST_CASE("probe geometry is validated") {
    const Domain D = Domain::ball(3);
    const auto p = MartinProbe::along_normal(D, {1, 0, 0}, {0, 0, 0}, {{-0.4, 0, 0}}, 0.5, 4, 0.1);
    REQUIRE(p.approach.size() == 4);
    CHECK(p.approach[0][0] == doctest::Approx(0.75));
    CHECK(p.approach[3][0] == doctest::Approx(1 - 0.5 / 16));
    CHECK_THROWS_AS(MartinProbe::along_normal(D, {0.5, 0, 0}, {0, 0, 0}, {}, 0.5, 4, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(MartinProbe::along_normal(D, {1, 0, 0}, {0.95, 0, 0}, {}, 0.5, 4, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(MartinProbe::along_normal(D, {1, 0, 0}, {0, 0, 0}, {{0.7, 0, 0}}, 0.5, 4, 0.1),
                    std::invalid_argument);
    CHECK_THROWS_AS(MartinProbe::along_normal(D, {1, 0, 0}, {0, 0, 0}, {}, 0.5, 0, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(MartinProbe::along_normal(D, {1, 0, 0}, {0, 0, 0}, {}, 0.5, 3, 0.0), std::invalid_argument);
}

TEST_CASE("smoothed Green function tends to the Green function as the bandwidth shrinks") {
    const Point y{0.75, 0, 0}, x{-0.5, 0, 0};
    const double exact = stable_ball_green(1.0, 3, 1.0, y, x);
    CHECK(smoothed_stable_ball_green(1.0, 3, 1.0, y, x, 1e-3) == doctest::Approx(exact).epsilon(1e-5));
    const double smooth = smoothed_stable_ball_green(1.0, 3, 1.0, y, x, 0.1);
    CHECK(smooth == doctest::Approx(exact).epsilon(0.05));
}

TEST_CASE("Martin estimates: normalisation and starvation") {
    const SubordinatorModel st(BernsteinFamily(Family::Stable, 1.0));
    const Domain D = Domain::ball(3);
    const auto probe = MartinProbe::along_normal(D, {1, 0, 0}, {0, 0, 0}, {{0.35, 0, 0}, {-0.4, 0, 0}}, 0.5, 2, 0.2);
    PathConfig cfg;
    cfg.dt = 2e-3;
    cfg.refine_levels = 3;
    cfg.seed = 1;
    const auto t = estimate_martin(probe, st, cfg, 4000, 0, 10);
    REQUIRE(t.m.size() == 2);
    for (std::size_t m = 0; m < t.m.size(); ++m) {
        // closer to z, the point near z dominates the far one
        CHECK(t.m[m][0] > t.m[m][1]);
        for (double v : t.m[m]) CHECK(v > 0);
    }
    const auto rep = martin_report(probe, st, cfg, t, 0);
    const Check* norm_check = rep.checks.empty() ? nullptr : &rep.checks.front();
    REQUIRE(norm_check != nullptr);
    CHECK(norm_check->pass);
    CHECK_THROWS_AS(estimate_martin(probe, st, cfg, 100, 0, 1000), BandwidthStarvation);
}

TEST_CASE("oscillation fit recovers a synthetic power law") {
    const Domain D = Domain::ball(3);
    const auto probe = MartinProbe::along_normal(D, {1, 0, 0}, {0, 0, 0}, {{-0.4, 0, 0}}, 0.5, 6, 0.1);
    MartinTable t;
    t.y = probe.approach;
    t.x = probe.x_grid;
    t.paths = 100000;
    for (const auto& y : probe.approach) {
        const double s = distance(y, probe.z) / 0.5;
        const double v = 2.0 + 3.0 * std::pow(s, 1.5);
        t.m.push_back({v});
        t.se.push_back({1e-4});
        t.m_half.push_back({v});
        t.se_half.push_back({1.4e-4});
        t.g_x0.push_back(1.0);
        t.g_x0_se.push_back(0.0);
        t.effective.push_back(100000);
    }
    const auto rep = oscillation_decay(probe, t);
    CHECK(rep.constants.at("beta_hat") == doctest::Approx(1.5).epsilon(0.02));
    CHECK(rep.pass());
}
