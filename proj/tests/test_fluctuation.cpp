#include <doctest.h>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>

#include "gen.hpp"
#include "sbmkit/fluctuation.hpp"

using namespace sbmkit;

namespace {

// Half-line Green function of the symmetric alpha-stable process up to a
// constant: |x-y|^{alpha-1} int_0^w s^{alpha/2-1} (1+s)^{-1/2} ds with
// w = 4xy / (x-y)^2 (the interval formula of Blumenthal, Getoor and Ray
// with the interval sent to (0, inf)).
double riesz_halfline(double alpha, double x, double y) {
    const double w = 4 * x * y / ((x - y) * (x - y));
    boost::math::quadrature::tanh_sinh<double> q;
    const double a = alpha / 2;
    // s = t^{1/a} removes the endpoint singularity
    const double inner = q.integrate(
        [&](double t) {
            const double s = std::pow(t, 1 / a);
            return std::pow(1 + s, -0.5) / a;
        },
        0.0, std::pow(w, a));
    return std::pow(std::fabs(x - y), alpha - 1) * inner;
}

}  // namespace

TEST_CASE("stable ladder exponents are explicit") {
    const LadderData st(BernsteinFamily(Family::Stable, 1.0));
    CHECK(chi(st, 4.0) == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(rho(st, 4.0) == doctest::Approx(2.0).epsilon(1e-6));
    const LadderData st15(BernsteinFamily(Family::Stable, 1.5));
    for (double l : {1e-2, 1.0, 1e3}) CHECK(chi(st15, l) == doctest::Approx(std::pow(l, 0.75)).epsilon(1e-6));
    const auto p = ladder_potential(st, 1.0);
    CHECK(p.V == doctest::Approx(2 / std::sqrt(M_PI)).epsilon(1e-10));
    CHECK(p.v == doctest::Approx(1 / std::sqrt(M_PI)).epsilon(1e-10));
}

TEST_CASE("special identity chi rho = lambda for random families") {
    gen::for_all(10, 6, [](gen::Gen& g, int) {
        const BernsteinFamily f = g.family();
        CAPTURE(f.describe());
        const LadderData ladder(f);
        for (int k = 0; k < 5; ++k) {
            const double l = g.log_uniform(1e-3, 1e6);
            CHECK(chi(ladder, l) * rho(ladder, l) / l == doctest::Approx(1.0).epsilon(1e-4));
        }
    });
    const LadderData mix(BernsteinFamily(Family::StableMixture, 1.0, 0.5));
    CHECK(chi(mix, 1.0) * rho(mix, 1.0) == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(verify_special_identity(mix).pass());
}

TEST_CASE("chi and rho are increasing with chi(0+) = 0") {
    const LadderData ladder(BernsteinFamily(Family::Relativistic, 1.0));
    double pc = 0, pr = 0;
    for (double e = -6; e <= 6; e += 0.5) {
        const double l = std::pow(10.0, e);
        CHECK(chi(ladder, l) > pc);
        CHECK(rho(ladder, l) > pr);
        pc = chi(ladder, l);
        pr = rho(ladder, l);
    }
    CHECK(chi(ladder, 1e-10) < 1e-4);
}

TEST_CASE("ladder exponent approaches its large-lambda limit") {
    for (auto f : {BernsteinFamily(Family::StableMixture, 1.0, 0.5), BernsteinFamily(Family::Relativistic, 1.0)}) {
        CAPTURE(f.describe());
        const LadderData ladder(f);
        const auto rep = verify_ladder_limit(ladder, {1e8});
        CHECK(rep.pass());
    }
}

TEST_CASE("ladder potential: monotonicity and small-x asymptotics") {
    const LadderData rel(BernsteinFamily(Family::Relativistic, 1.0));
    const double x = 1e-3;
    const auto p = ladder_potential(rel, x);
    const double scaled = p.v * std::tgamma(0.5) * std::sqrt(x) * std::sqrt(rel.family().phi(1 / (x * x)) * x);
    CHECK(scaled >= 0.97);
    CHECK(scaled <= 1.03);
    double pv = INFINITY, pV = 0;
    for (double e = -4; e <= 2; e += 0.25) {
        const auto q = ladder_potential(rel, std::pow(10.0, e));
        CHECK(q.v <= pv * (1 + 1e-9));
        CHECK(q.V >= pV);
        pv = q.v;
        pV = q.V;
    }
    CHECK(rel.crosscheck_gap() < 1e-4);
}

TEST_CASE("half-line Green function") {
    gen::for_all(3, 7, [](gen::Gen& g, int) {
        const LadderData ladder(g.family());
        const double x = g.uniform(0.05, 2), y = g.uniform(0.05, 2);
        if (std::fabs(x - y) < 1e-3) return;
        const double a = halfline_green(ladder, x, y), b = halfline_green(ladder, y, x);
        CHECK(a >= 0);
        CHECK(a == doctest::Approx(b).epsilon(1e-8));
    });
    // shape agrees with the classical stable kernel
    for (double alpha : {1.0, 1.5}) {
        const LadderData st(BernsteinFamily(Family::Stable, alpha));
        const double ref = halfline_green(st, 1.0, 2.0) / riesz_halfline(alpha, 1.0, 2.0);
        for (auto [x, y] : {std::pair{0.3, 1.0}, std::pair{2.5, 0.7}, std::pair{0.1, 3.0}})
            CHECK(halfline_green(st, x, y) / riesz_halfline(alpha, x, y) == doctest::Approx(ref).epsilon(1e-6));
    }
    const LadderData cauchy(BernsteinFamily(Family::Stable, 1.0));
    CHECK(std::isinf(halfline_green(cauchy, 1.0, 1.0)));
    double prev = INFINITY;
    for (double x : {0.5, 0.1, 0.01, 1e-4}) {
        const double v = halfline_green(cauchy, x, 1.0);
        CHECK(v < prev);
        prev = v;
    }
    CHECK_THROWS_AS(halfline_green(cauchy, 0.0, 1.0), std::domain_error);
}

TEST_CASE("interval exit bound") {
    const LadderData st(BernsteinFamily(Family::Stable, 1.0));
    const auto b = interval_exit_bound(st, 1.0, 0.5);
    CHECK(b.majorant == doctest::Approx(2 * (2 / std::sqrt(M_PI)) * (2 / std::sqrt(M_PI)) * std::sqrt(0.5)).epsilon(1e-9));
    CHECK(b.two_sided <= b.majorant);
    CHECK(interval_exit_bound(st, 1.0, 1e-8).majorant < 1e-3);
    // exact Cauchy mean exit time from (0, 1) is sqrt(x(1-x)) / 1 (d = 1, alpha = 1)
    for (double x : {0.1, 0.3, 0.5, 0.9}) CHECK(std::sqrt(x * (1 - x)) <= interval_exit_bound(st, 1.0, x).majorant);
    CHECK_THROWS_AS(interval_exit_bound(st, 1.0, 1.5), std::domain_error);
}
