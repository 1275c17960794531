#include <doctest.h>

#include <cmath>

#include "gen.hpp"
#include "sbmkit/domain.hpp"

using namespace sbmkit;

namespace {

std::vector<Domain> catalog(int d) {
    std::vector<Domain> out{Domain::ball(d), Domain::box(d)};
    if (d >= 2) {
        out.push_back(Domain::lshape(d));
        out.push_back(Domain::slit_ball(d));
    }
    out.push_back(Domain::two_balls(d));
    return out;
}

}  // namespace

TEST_CASE("domain keys round-trip") {
    for (auto k : {DomainKind::Ball, DomainKind::Box, DomainKind::LShape, DomainKind::SlitBall, DomainKind::TwoBalls})
        CHECK(parse_domain(domain_key(k)) == k);
    CHECK_THROWS_AS(parse_domain("torus"), std::invalid_argument);
    CHECK_THROWS_AS(Domain::lshape(1), std::invalid_argument);
}

TEST_CASE("distance to the complement is consistent with membership and 1-Lipschitz") {
    for (int d = 1; d <= 3; ++d)
        for (const auto& D : catalog(d)) {
            CAPTURE(D.name());
            CAPTURE(d);
            gen::for_all(300, 10 + d, [&](gen::Gen& g, int) {
                const Point x = g.point_in_box(d, 3.0), y = g.point_in_box(d, 3.0);
                const double dx = D.distance_to_boundary(x);
                CHECK(dx >= 0);
                if (dx > 0) CHECK(D.contains(x));
                if (!D.contains(x)) CHECK(dx == 0);
                CHECK(std::fabs(dx - D.distance_to_boundary(y)) <= distance(x, y) + 1e-12);
                // the ball of radius dx about x lies in D
                if (dx > 0) {
                    Point dir = g.point_in_box(d, 1.0);
                    const double n = norm(dir);
                    if (n > 0) CHECK(D.contains(add(x, dir, 0.999 * dx / n)));
                }
            });
        }
}

TEST_CASE("witness balls sit inside D and inside B(Q, r)") {
    for (int d = 2; d <= 3; ++d)
        for (const auto& D : catalog(d)) {
            CAPTURE(D.name());
            for (const auto& q : D.catalog_boundary_points()) {
                CHECK_FALSE(D.contains(q));
                for (double r = D.r_char(); r > D.r_char() / 64; r /= 2) {
                    const Point a = D.witness(q, r);
                    CHECK(D.distance_to_boundary(a) >= D.kappa() * r * (1 - 1e-9));
                    CHECK(distance(a, q) + D.kappa() * r <= r * (1 + 1e-9));
                }
                try {
                    CHECK(norm(D.outward_normal(q)) == doctest::Approx(1.0));
                } catch (const std::invalid_argument&) {
                    // corners and slit tips have no normal
                }
            }
            CHECK(D.audit_kappa(16, 4, 16) >= D.kappa() * (1 - 1e-9));
        }
}

TEST_CASE("catalog geometry") {
    const Domain b = Domain::ball(3, 2.0);
    CHECK(b.diameter() == doctest::Approx(4.0));
    CHECK(b.distance_to_boundary({0.5, 0, 0}) == doctest::Approx(1.5));
    const Domain l = Domain::lshape(2);
    CHECK_FALSE(l.contains({0.5, 0.5, 0}));
    CHECK(l.contains({-0.5, 0.5, 0}));
    const Domain s = Domain::slit_ball(2);
    CHECK_FALSE(s.contains({0.5, 0.0, 0}));
    CHECK(s.contains({-0.5, 0.0, 0}));
    const Domain t = Domain::two_balls(3);
    CHECK_FALSE(t.contains({0, 0, 0}));
    CHECK(t.contains(t.center()));
}
