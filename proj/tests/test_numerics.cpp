#include <doctest.h>

#include <cmath>
#include <complex>
#include <set>

#include "gen.hpp"
#include "sbmkit/interp.hpp"
#include "sbmkit/laplace.hpp"
#include "sbmkit/quadrature.hpp"
#include "sbmkit/rng.hpp"

using namespace sbmkit;

TEST_CASE("adaptive quadrature reproduces polynomial and exponential integrals") {
    gen::for_all(20, 1, [](gen::Gen& g, int) {
        const int k = g.integer(0, 9);
        const double b = g.uniform(0.1, 3.0);
        const double got = integrate<double>([k](double x) { return std::pow(x, k); }, 0.0, b);
        CHECK(got == doctest::Approx(std::pow(b, k + 1) / (k + 1)).epsilon(1e-12));
    });
    const double e = integrate<double>([](double x) { return std::exp(-x); }, 0.0, 50.0);
    CHECK(e == doctest::Approx(1 - std::exp(-50.0)).epsilon(1e-12));
}

TEST_CASE("log-tail quadrature handles power-law integrands") {
    // int_0^inf x^{s-1} / (1 + x) dx = pi / sin(pi s)
    for (double s : {0.25, 0.5, 0.8}) {
        const double got = integrate_log_tail<double>([s](double x) { return std::pow(x, s - 1) / (1 + x); }, 0.0,
                                                      -200.0, 200.0);
        CHECK(got == doctest::Approx(M_PI / std::sin(M_PI * s)).epsilon(1e-9));
    }
}

TEST_CASE("non-converging quadrature raises QuadratureError") {
    QuadOptions q;
    q.max_subdivisions = 3;
    q.rel_tol = 1e-15;
    q.abs_tol = 0;
    CHECK_THROWS_AS(integrate<double>([](double x) { return std::sin(1 / x); }, 1e-6, 1.0, q), QuadratureError);
}

TEST_CASE("Laplace inversions recover known originals") {
    const auto w = stehfest_weights<long double>(16);
    auto f1 = [](auto s) { using T = decltype(s); return T(1) / (s + T(1)); };  // e^{-t}
    auto f2 = [](auto s) { using T = decltype(s); return T(1) / (s * s); };  // t
    for (long double t : {0.1L, 1.0L, 3.0L}) {
        CHECK(double(gaver_stehfest(f1, t, w)) == doctest::Approx(std::exp(-double(t))).epsilon(1e-5));
        CHECK(double(fixed_talbot<long double>(f1, t, 24)) == doctest::Approx(std::exp(-double(t))).epsilon(1e-9));
        CHECK(double(euler_bromwich<long double>(f2, t)) == doctest::Approx(double(t)).epsilon(1e-7));
    }
    CHECK_THROWS_AS(stehfest_weights<double>(7), std::invalid_argument);
}

TEST_CASE("Stehfest weights sum to zero") {
    // The transform of f = 1 is 1/s, which the weights must reproduce exactly.
    for (int n : {8, 12, 16}) {
        const auto w = stehfest_weights<long double>(n);
        long double sum = 0;
        for (auto v : w) sum += v;
        CHECK(double(std::fabs(sum)) < 1e-6);
        auto one = [](long double s) { return 1 / s; };
        CHECK(double(gaver_stehfest(one, 2.0L, w)) == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("Pchip preserves monotone data") {
    gen::for_all(30, 2, [](gen::Gen& g, int) {
        std::vector<double> x{0}, y{g.uniform(-1, 1)};
        for (int i = 0; i < 12; ++i) {
            x.push_back(x.back() + g.uniform(0.01, 1));
            y.push_back(y.back() + g.uniform(0, 1) * (g.integer(0, 3) == 0 ? 0 : 1));
        }
        const Pchip p(x, y);
        double prev = -INFINITY;
        for (int i = 0; i <= 400; ++i) {
            const double t = x.front() + (x.back() - x.front()) * i / 400.0;
            const double v = p(t);
            CHECK(v >= prev - 1e-12);
            prev = v;
        }
        for (std::size_t i = 0; i < x.size(); ++i) CHECK(p(x[i]) == doctest::Approx(y[i]));
    });
}

TEST_CASE("log-log table is exact for power laws, including extrapolation") {
    const LogLogTable t([](double s) { return 3 * std::pow(s, -1.3); }, 1e-3, 1e3, 8);
    for (double s : {1e-5, 2e-3, 0.7, 10.0, 5e4}) CHECK(t(s) == doctest::Approx(3 * std::pow(s, -1.3)).epsilon(1e-10));
}

TEST_CASE("random streams: determinism, independence, uniform moments") {
    RandomStream a(42, 7), b(42, 7), c(42, 8), d(43, 7);
    std::set<std::uint64_t> firsts;
    for (int i = 0; i < 100; ++i) {
        const auto x = a();
        CHECK(x == b());
        firsts.insert(x);
    }
    CHECK(c() != RandomStream(42, 7)());
    CHECK(d() != RandomStream(42, 7)());
    CHECK(firsts.size() == 100);

    RandomStream u(1, 0);
    double sum = 0, sum2 = 0, nsum = 0, nsum2 = 0, esum = 0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double v = u.uniform();
        CHECK_FALSE((v <= 0 || v >= 1));
        sum += v;
        sum2 += v * v;
        const double z = u.normal();
        nsum += z;
        nsum2 += z * z;
        esum += u.exponential();
    }
    CHECK(std::fabs(sum / n - 0.5) < 5 * std::sqrt(1.0 / 12 / n));
    CHECK(std::fabs(sum2 / n - 1.0 / 3) < 0.005);
    CHECK(std::fabs(nsum / n) < 5 / std::sqrt(double(n)));
    CHECK(std::fabs(nsum2 / n - 1) < 0.02);
    CHECK(std::fabs(esum / n - 1) < 5 / std::sqrt(double(n)));
}

TEST_CASE("Philox known-answer vector") {
    // Random123 kat_vectors: philox4x32_10 with zero counter and key.
    const PhiloxBlock out = philox4x32({0, 0, 0, 0}, {0, 0});
    CHECK(out[0] == 0x6627e8d5u);
    CHECK(out[1] == 0xe169c58du);
    CHECK(out[2] == 0xbc57ac4cu);
    CHECK(out[3] == 0x9b00dbd8u);
}
