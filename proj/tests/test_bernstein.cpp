#include <doctest.h>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>

#include "gen.hpp"
#include "sbmkit/bernstein.hpp"

using namespace sbmkit;

namespace {

// Independent check of a Laplace pair: int_0^inf e^{-lambda t} f(t) dt.
double laplace_of(const std::function<double(double)>& f, double lambda) {
    boost::math::quadrature::exp_sinh<double> q;
    return q.integrate([&](double t) { return std::exp(-lambda * t) * f(t); }, 1e-12);
}

// int_0^inf (1 - e^{-lambda t}) mu(t) dt
double bernstein_of(const std::function<double(double)>& mu, double lambda) {
    boost::math::quadrature::exp_sinh<double> q;
    return q.integrate([&](double t) { return -std::expm1(-lambda * t) * mu(t); }, 1e-12);
}

double stable_mu(double a, double t) { return a / std::tgamma(1 - a) * std::pow(t, -1 - a); }

}  // namespace

TEST_CASE("phi and ell closed forms") {
    const BernsteinFamily st(Family::Stable, 1.0);
    CHECK(phi(st, 4.0) == doctest::Approx(2.0));
    CHECK(ell(st, 123.0) == doctest::Approx(1.0));
    const BernsteinFamily mix(Family::StableMixture, 1.0, 0.5);
    CHECK(ell(mix, 16.0) == doctest::Approx(1.5).epsilon(1e-14));
    const BernsteinFamily rel(Family::Relativistic, 1.0);
    CHECK(ell(rel, 1e8) == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(phi(rel, 3.0) == doctest::Approx(1.0).epsilon(1e-14));  // sqrt(4) - 1
    // Relativistic phi at tiny lambda: a * lambda without cancellation
    CHECK(phi(rel, 1e-14) == doctest::Approx(0.5e-14).epsilon(1e-10));
    const BernsteinFamily lp(Family::LogWeightPos, 1.0, 0.5);
    CHECK(phi(lp, 2.0) == doctest::Approx(std::sqrt(2.0) * std::pow(std::log(3.0), 0.25)));
    const BernsteinFamily ln(Family::LogWeightNeg, 1.0, 0.5);
    CHECK(phi(ln, 2.0) == doctest::Approx(std::sqrt(2.0) * std::pow(std::log(3.0), -0.25)));
}

TEST_CASE("family parameters are validated") {
    CHECK_THROWS_AS(BernsteinFamily(Family::Stable, 2.0), std::invalid_argument);
    CHECK_THROWS_AS(BernsteinFamily(Family::Stable, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(BernsteinFamily(Family::StableMixture, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(BernsteinFamily(Family::StableMixture, 1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(BernsteinFamily(Family::Stable, 1.0, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(phi(BernsteinFamily(Family::Stable, 1.0), 0.0), std::domain_error);
    CHECK_THROWS_AS(phi(BernsteinFamily(Family::Stable, 1.0), NAN), std::domain_error);
    for (auto f : {Family::Stable, Family::Relativistic, Family::StableMixture, Family::LogWeightPos,
                   Family::LogWeightNeg})
        CHECK(parse_family(family_key(f)) == f);
    CHECK_THROWS_AS(parse_family("gamma"), std::invalid_argument);
}

TEST_CASE("phi is increasing and concave on a log grid for random families") {
    gen::for_all(40, 3, [](gen::Gen& g, int i) {
        const BernsteinFamily f = g.family();
        CAPTURE(i);
        CAPTURE(f.describe());
        std::vector<double> lam, val;
        for (double e = -6; e <= 12; e += 0.25) {
            lam.push_back(std::pow(10.0, e));
            val.push_back(phi(f, lam.back()));
        }
        for (std::size_t k = 1; k < lam.size(); ++k) CHECK(val[k] > val[k - 1]);
        for (std::size_t k = 1; k + 1 < lam.size(); ++k) {
            const double s1 = (val[k] - val[k - 1]) / (lam[k] - lam[k - 1]);
            const double s2 = (val[k + 1] - val[k]) / (lam[k + 1] - lam[k]);
            CHECK(s2 <= s1 * (1 + 1e-9));
        }
    });
}

TEST_CASE("phi_inverse inverts phi") {
    gen::for_all(20, 4, [](gen::Gen& g, int) {
        const BernsteinFamily f = g.family();
        const double lam = g.log_uniform(1e-4, 1e8);
        CHECK(phi_inverse(f, phi(f, lam)) == doctest::Approx(lam).epsilon(1e-8));
    });
}

TEST_CASE("stable potential and Levy densities") {
    const SubordinatorModel st(BernsteinFamily(Family::Stable, 1.0));
    CHECK(potential_density_u(st, 1.0) == doctest::Approx(1 / std::sqrt(M_PI)).epsilon(1e-12));
    CHECK(levy_density_mu(st, 1.0) == doctest::Approx(0.5 / std::sqrt(M_PI)).epsilon(1e-12));
    for (double lam : {0.1, 1.0, 10.0}) {
        CHECK(laplace_of([&](double t) { return st.potential_density(t); }, lam) ==
              doctest::Approx(1 / std::sqrt(lam)).epsilon(1e-6));
        CHECK(bernstein_of([&](double t) { return st.levy_density(t); }, lam) ==
              doctest::Approx(std::sqrt(lam)).epsilon(1e-6));
    }
    CHECK(st.gamma_a1() == doctest::Approx(0.5));
}

TEST_CASE("mixture Levy density is the sum of stable densities") {
    const SubordinatorModel mix(BernsteinFamily(Family::StableMixture, 1.0, 0.5));
    for (double t : {1e-3, 1.0, 50.0})
        CHECK(levy_density_mu(mix, t) == doctest::Approx(stable_mu(0.5, t) + stable_mu(0.25, t)).epsilon(1e-10));
}

TEST_CASE("relativistic densities") {
    const SubordinatorModel rel(BernsteinFamily(Family::Relativistic, 1.0));
    const double t = 1e-4;
    const double pred = std::pow(t, -0.5) / std::tgamma(0.5) / rel.ell(1 / t);
    CHECK(potential_density_u(rel, t) == doctest::Approx(pred).epsilon(0.03));
    CHECK(levy_density_mu(rel, 1e-6) * std::pow(1e-6, 1.5) * 2 * std::tgamma(0.5) == doctest::Approx(1.0).epsilon(1e-5));
    for (double lam : {0.5, 5.0}) {
        CHECK(laplace_of([&](double s) { return rel.potential_density(s); }, lam) ==
              doctest::Approx(1 / rel.phi(lam)).epsilon(1e-6));
        CHECK(bernstein_of([&](double s) { return rel.levy_density(s); }, lam) ==
              doctest::Approx(rel.phi(lam)).epsilon(1e-6));
    }
}

TEST_CASE("inverted densities satisfy the Laplace identities") {
    for (auto fam : {BernsteinFamily(Family::LogWeightPos, 1.0, 0.5), BernsteinFamily(Family::LogWeightNeg, 1.2, 0.4),
                     BernsteinFamily(Family::StableMixture, 1.5, 0.5)}) {
        CAPTURE(fam.describe());
        const SubordinatorModel m(fam);
        const auto u = m.tabulate_u(1e-10, 1e8, 24);
        for (double lam : {0.3, 3.0, 30.0}) {
            boost::math::quadrature::exp_sinh<double> q;
            const double lu = q.integrate([&](double t) { return std::exp(-lam * t) * (*u)(t); }, 1e-12);
            CHECK(lu == doctest::Approx(1 / m.phi(lam)).epsilon(1e-4));
        }
    }
}

TEST_CASE("u and mu are strictly decreasing") {
    gen::for_all(6, 5, [](gen::Gen& g, int) {
        const SubordinatorModel m(g.family());
        CAPTURE(m.family().describe());
        double pu = INFINITY, pm = INFINITY;
        for (double e = -5; e <= 2; e += 0.5) {
            const double t = std::pow(10.0, e);
            const double u = m.potential_density(t), mu = m.levy_density(t);
            CHECK(u < pu);
            CHECK(mu < pm);
            pu = u;
            pm = mu;
        }
    });
}

TEST_CASE("log-ratio domination hypothesis") {
    const auto st = check_condition_2_5(BernsteinFamily(Family::Stable, 1.0));
    CHECK(st.pass());
    CHECK(st.constants.size() > 0);
    CHECK(check_condition_2_5(BernsteinFamily(Family::StableMixture, 1.0, 0.5)).pass());
    CHECK(check_condition_2_5(BernsteinFamily(Family::LogWeightPos, 1.0, 0.5)).pass());
}

TEST_CASE("standing assumptions") {
    const auto st = check_A1_A4(SubordinatorModel(BernsteinFamily(Family::Stable, 1.0)));
    CHECK(st.pass());
    const Check* a4 = st.find("mu(t) <= C1 mu(t+1) for t > 1");
    REQUIRE(a4 != nullptr);
    CHECK(a4->constant == doctest::Approx(std::pow(2.0, 1.5)).epsilon(1e-6));
    CHECK(check_A1_A4(SubordinatorModel(BernsteinFamily(Family::Relativistic, 1.0))).pass());
    const auto j = st.to_json();
    for (const auto& c : j["checks"]) {
        CHECK(c.contains("assumption"));
        CHECK(c.contains("grid"));
        CHECK(c.contains("constant"));
        CHECK(c.contains("pass"));
    }
}
