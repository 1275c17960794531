#include <doctest.h>

#include <atomic>
#include <cmath>
#include <set>

#include "gen.hpp"
#include "sbmkit/estimators.hpp"
#include "sbmkit/simulate.hpp"

using namespace sbmkit;

namespace {

// mean and SE of exp(-lambda S_h) over n draws
MeanSE laplace_sample(const IncrementSampler& s, double h, double lambda, std::size_t n, std::uint64_t seed) {
    std::vector<double> v(n);
    RandomStream rng(seed, 0);
    for (auto& x : v) {
        const double inc = s(h, rng);
        REQUIRE(inc > 0);
        x = std::exp(-lambda * inc);
    }
    return mean_se(v);
}

}  // namespace

TEST_CASE("subordinator increments have the right Laplace transform") {
    const double h = 0.01;
    const std::vector<BernsteinFamily> fams{BernsteinFamily(Family::Stable, 1.0),
                                            BernsteinFamily(Family::StableMixture, 1.0, 0.5),
                                            BernsteinFamily(Family::Relativistic, 1.0),
                                            BernsteinFamily(Family::LogWeightPos, 1.0, 0.5),
                                            BernsteinFamily(Family::LogWeightNeg, 1.0, 0.5)};
    for (const auto& f : fams) {
        CAPTURE(f.describe());
        const SubordinatorModel m(f);
        const IncrementSampler s(m, 1e-10);
        const std::size_t n = f.kind() == Family::LogWeightPos || f.kind() == Family::LogWeightNeg ? 100000 : 250000;
        for (double lambda : {1.0, 10.0}) {
            const MeanSE e = laplace_sample(s, h, lambda, n, 17);
            const double exact = std::exp(-h * m.phi(lambda));
            CHECK(std::fabs(e.mean - exact) <= 3 * e.se);
        }
    }
}

TEST_CASE("positive stable sampler") {
    RandomStream rng(5, 1);
    std::vector<double> v(400000);
    for (auto& x : v) x = std::exp(-2.0 * IncrementSampler::positive_stable(0.3, 0.5, rng));
    const MeanSE e = mean_se(v);
    CHECK(std::fabs(e.mean - std::exp(-0.5 * std::pow(2.0, 0.3))) <= 3 * e.se);
}

TEST_CASE("path configuration is validated") {
    PathConfig c;
    c.dt = 0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = {};
    c.eps_jump = 0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = {};
    c.refine_levels = -1;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("exit records are consistent and reproducible across worker counts") {
    const SubordinatorModel m(BernsteinFamily(Family::StableMixture, 1.0, 0.5));
    PathConfig cfg;
    cfg.dt = 1e-3;
    cfg.refine_levels = 4;
    const PathSimulator sim(m, cfg);
    for (const auto& D : {Domain::ball(3), Domain::lshape(2), Domain::two_balls(2)}) {
        const Point start = D.center();
        const auto a = simulate_exits(sim, D, start, 400, 99, 1);
        const auto b = simulate_exits(sim, D, start, 400, 99, 3);
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            CHECK(a[i].exit_time == b[i].exit_time);
            CHECK(a[i].exit_point == b[i].exit_point);
            CHECK(a[i].exit_time > 0);
            CHECK_FALSE(D.contains(a[i].exit_point));
            CHECK(D.distance_to_boundary(a[i].pre_jump_point) >= 0);
        }
    }
}

TEST_CASE("start next to the boundary exits almost at once") {
    const SubordinatorModel m(BernsteinFamily(Family::Stable, 1.0));
    PathConfig cfg;
    cfg.dt = 1e-4;
    const PathSimulator sim(m, cfg);
    const auto e = simulate_exits(sim, Domain::ball(3), {1 - 1e-7, 0, 0}, 200, 3, 1);
    std::vector<double> t;
    for (const auto& r : e) t.push_back(r.exit_time);
    CHECK(mean_se(t).mean < 1e-3);
}

TEST_CASE("horizon overrun raises HorizonError") {
    const SubordinatorModel m(BernsteinFamily(Family::Stable, 1.0));
    PathConfig cfg;
    cfg.dt = 1e-3;
    cfg.t_max = 2e-3;
    const PathSimulator sim(m, cfg);
    CHECK_THROWS_AS(simulate_exits(sim, Domain::ball(3, 100.0), {0, 0, 0}, 10, 1, 1), HorizonError);
}

TEST_CASE("mean exit time of the ball against the closed form (small sample)") {
    const SubordinatorModel m(BernsteinFamily(Family::Stable, 1.0));
    PathConfig cfg;
    cfg.dt = 1e-3;
    cfg.refine_levels = 6;
    const PathSimulator sim(m, cfg);
    const auto rows = estimate_exit_time(sim, Domain::ball(3), {{0, 0, 0}, {0.5, 0, 0}}, 20000, 4, 0);
    for (const auto& r : rows) {
        const double exact = stable_ball_exit_time(1.0, 3, 1.0, norm(r.x));
        CHECK(std::fabs(r.mean - exact) <= std::max(4 * r.se, 0.02 * exact));
    }
}

TEST_CASE("harmonic measure sums to one and respects isotropy") {
    const SubordinatorModel m(BernsteinFamily(Family::Stable, 1.0));
    PathConfig cfg;
    cfg.dt = 1e-3;
    const PathSimulator sim(m, cfg);
    auto octant = [](const Point& y) { return (y[0] > 0) + 2 * (y[1] > 0) + 4 * (y[2] > 0); };
    const auto hm = harmonic_measure(sim, Domain::ball(3), {0, 0, 0}, octant, 8, 8000, 12, 0);
    double total = 0;
    for (double p : hm.probability) total += p;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    for (int k = 1; k < 8; ++k)
        CHECK(std::fabs(hm.probability[k] - hm.probability[0]) <=
              3 * std::hypot(hm.se[k], hm.se[0]));
}

TEST_CASE("parallel_for visits each index once and rethrows") {
    std::vector<std::atomic<int>> hits(1000);
    parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i]++; });
    for (auto& h : hits) CHECK(h.load() == 1);
    CHECK_THROWS_AS(parallel_for(10, 3, [](std::size_t i) {
                        if (i == 7) throw std::runtime_error("boom");
                    }),
                    std::runtime_error);
}

TEST_CASE("derived seeds differ by label and by run seed") {
    std::set<std::uint64_t> s;
    for (const char* l : {"a", "b", "harnack/r=0.5", "bhp/0/r=0.25"})
        for (std::uint64_t seed : {0ull, 1ull, 42ull}) s.insert(derive_seed(seed, l));
    CHECK(s.size() == 12);
    CHECK(derive_seed(7, "x") == derive_seed(7, "x"));
}

TEST_CASE("worker count resolution") {
    CHECK(resolve_workers(3) == 3);
    CHECK(resolve_workers(0) >= 1);
}
