#include "sbmkit/domain.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "sbmkit/rng.hpp"

namespace sbmkit {

namespace {

constexpr double kTwoPi = 6.283185307179586476925;

// Unit vectors of the nonzero integer lattice points in [-m, m]^d; the set is
// invariant under coordinate permutations and reflections.
std::vector<Point> lattice_directions(int d, int m) {
    std::vector<Point> out;
    const int k2 = d >= 2 ? m : 0, k3 = d >= 3 ? m : 0;
    for (int a = -m; a <= m; ++a)
        for (int b = -k2; b <= k2; ++b)
            for (int c = -k3; c <= k3; ++c) {
                if (a == 0 && b == 0 && c == 0) continue;
                Point p{double(a), double(b), double(c)};
                const double n = norm(p);
                out.push_back({p[0] / n, p[1] / n, p[2] / n});
            }
    return out;
}

const std::vector<Point>& directions(int d) {
    static const std::vector<Point> dirs[3] = {lattice_directions(1, 1), lattice_directions(2, 3),
                                               lattice_directions(3, 2)};
    return dirs[d - 1];
}

Point sphere_point(int d, double u0, double u1) {
    if (d == 1) return {u0 < 0.5 ? -1.0 : 1.0, 0, 0};
    if (d == 2) return {std::cos(kTwoPi * u0), std::sin(kTwoPi * u0), 0};
    const double z = 2 * u0 - 1, s = std::sqrt(std::max(0.0, 1 - z * z));
    return {s * std::cos(kTwoPi * u1), s * std::sin(kTwoPi * u1), z};
}

}  // namespace

double norm(const Point& x) { return std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]); }

double distance(const Point& x, const Point& y) {
    const double a = x[0] - y[0], b = x[1] - y[1], c = x[2] - y[2];
    return std::sqrt(a * a + b * b + c * c);
}

Point add(const Point& x, const Point& y, double scale) {
    return {x[0] + scale * y[0], x[1] + scale * y[1], x[2] + scale * y[2]};
}

std::string domain_key(DomainKind k) {
    switch (k) {
        case DomainKind::Ball: return "ball";
        case DomainKind::Box: return "box";
        case DomainKind::LShape: return "lshape";
        case DomainKind::SlitBall: return "slitball";
        case DomainKind::TwoBalls: return "twoballs";
    }
    return "unknown";
}

DomainKind parse_domain(const std::string& key) {
    for (auto k : {DomainKind::Ball, DomainKind::Box, DomainKind::LShape, DomainKind::SlitBall, DomainKind::TwoBalls})
        if (domain_key(k) == key) return k;
    throw std::invalid_argument("unknown domain '" + key + "' (expected ball, box, lshape, slitball, twoballs)");
}

Domain::Domain(DomainKind kind, int d, double size, double kappa, double r_char)
    : kind_(kind), d_(d), size_(size), kappa_(kappa), r_char_(r_char) {
    if (d < 1 || d > 3) throw std::invalid_argument("domains are supported in dimension 1, 2, 3");
    if (!(size > 0)) throw std::invalid_argument("domain size must be positive");
    const double seen = audit_kappa();
    if (seen < kappa_ * (1 - 1e-12)) {
        std::ostringstream msg;
        msg << name() << ": witness balls reach only kappa = " << seen << " < " << kappa_;
        throw std::logic_error(msg.str());
    }
}

Domain Domain::ball(int d, double radius) { return Domain(DomainKind::Ball, d, radius, 0.5, radius); }
Domain Domain::box(int d, double half_width) { return Domain(DomainKind::Box, d, half_width, 0.25, half_width); }

Domain Domain::lshape(int d) {
    if (d < 2) throw std::invalid_argument("lshape needs d >= 2");
    return Domain(DomainKind::LShape, d, 1.0, 0.25, 0.5);
}

Domain Domain::slit_ball(int d) {
    if (d < 2) throw std::invalid_argument("slitball needs d >= 2");
    return Domain(DomainKind::SlitBall, d, 1.0, 0.125, 0.5);
}

Domain Domain::two_balls(int d, double gap) { return Domain(DomainKind::TwoBalls, d, gap, 0.5, 1.0); }

Domain Domain::make(DomainKind kind, int d) {
    switch (kind) {
        case DomainKind::Ball: return ball(d);
        case DomainKind::Box: return box(d);
        case DomainKind::LShape: return lshape(d);
        case DomainKind::SlitBall: return slit_ball(d);
        case DomainKind::TwoBalls: return two_balls(d);
    }
    throw std::invalid_argument("unknown domain kind");
}

double Domain::ball_offset() const { return 1 + size_ / 2; }

bool Domain::contains(const Point& x) const {
    switch (kind_) {
        case DomainKind::Ball: return x[0] * x[0] + x[1] * x[1] + x[2] * x[2] < size_ * size_;
        case DomainKind::Box:
            for (int i = 0; i < d_; ++i)
                if (!(std::fabs(x[i]) < size_)) return false;
            return true;
        case DomainKind::LShape:
            for (int i = 0; i < d_; ++i)
                if (!(std::fabs(x[i]) < 1)) return false;
            return x[0] < 0 || x[1] < 0;
        case DomainKind::SlitBall:
            return x[0] * x[0] + x[1] * x[1] + x[2] * x[2] < 1 && !(x[1] == 0 && x[0] >= 0);
        case DomainKind::TwoBalls: {
            const double c = ball_offset(), r2 = x[1] * x[1] + x[2] * x[2];
            return (x[0] - c) * (x[0] - c) + r2 < 1 || (x[0] + c) * (x[0] + c) + r2 < 1;
        }
    }
    return false;
}

double Domain::distance_to_boundary(const Point& x) const {
    if (!contains(x)) return 0.0;
    switch (kind_) {
        case DomainKind::Ball: return size_ - norm(x);
        case DomainKind::Box: {
            double m = size_;
            for (int i = 0; i < d_; ++i) m = std::min(m, size_ - std::fabs(x[i]));
            return m;
        }
        case DomainKind::LShape: {
            double m = 1;
            for (int i = 0; i < d_; ++i) m = std::min(m, 1 - std::fabs(x[i]));
            const double a = std::max(0.0, -x[0]), b = std::max(0.0, -x[1]);
            return std::min(m, std::sqrt(a * a + b * b));
        }
        case DomainKind::SlitBall: {
            const double a = std::max(0.0, -x[0]);
            return std::min(1 - norm(x), std::sqrt(a * a + x[1] * x[1]));
        }
        case DomainKind::TwoBalls: {
            const double c = ball_offset();
            return std::max(1 - distance(x, {c, 0, 0}), 1 - distance(x, {-c, 0, 0}));
        }
    }
    return 0.0;
}

double Domain::diameter() const {
    switch (kind_) {
        case DomainKind::Ball: return 2 * size_;
        case DomainKind::Box: return 2 * size_ * std::sqrt(double(d_));
        case DomainKind::LShape: return 2 * std::sqrt(double(d_));
        case DomainKind::SlitBall: return 2.0;
        case DomainKind::TwoBalls: return 2 * ball_offset() + 2;
    }
    return 0.0;
}

Point Domain::center() const {
    switch (kind_) {
        case DomainKind::LShape: return {-0.5, -0.5, 0};
        case DomainKind::SlitBall: return {-0.5, 0, 0};
        case DomainKind::TwoBalls: return {-ball_offset(), 0, 0};
        default: return {0, 0, 0};
    }
}

Point Domain::outward_normal(const Point& q) const {
    if (kind_ == DomainKind::Ball) {
        const double n = norm(q);
        return {q[0] / n, q[1] / n, q[2] / n};
    }
    if (kind_ == DomainKind::TwoBalls) {
        const Point c{q[0] > 0 ? ball_offset() : -ball_offset(), 0, 0};
        const Point v = add(q, c, -1.0);
        const double n = norm(v);
        return {v[0] / n, v[1] / n, v[2] / n};
    }
    // Average of the lattice directions that leave D from q.
    const double eps = 1e-9;
    Point s{0, 0, 0};
    for (const auto& u : directions(d_))
        if (!contains(add(q, u, eps))) s = add(s, u);
    const double n = norm(s);
    // Interior slit points see the complement symmetrically; use the slit direction.
    if (!(n > 0) && kind_ == DomainKind::SlitBall && q[1] == 0 && q[0] >= 0) return {1, 0, 0};
    if (!(n > 0)) throw std::invalid_argument("outward_normal: point is not on the boundary");
    return {s[0] / n, s[1] / n, s[2] / n};
}

Point Domain::witness(const Point& q, double r) const {
    if (!(r > 0)) throw std::invalid_argument("witness requires r > 0");
    Point best = q;
    double best_score = -1;
    auto consider = [&](const Point& u) {
        for (int k = 1; k <= 9; ++k) {
            const double t = 0.1 * k;
            const Point a = add(q, u, t * r);
            const double score = std::min(distance_to_boundary(a), (1 - t) * r) / r;
            if (score > best_score + 1e-15) {
                best_score = score;
                best = a;
            }
        }
    };
    Point n{0, 0, 0};
    bool have_normal = true;
    try {
        n = outward_normal(q);
    } catch (const std::invalid_argument&) {
        have_normal = false;
    }
    if (have_normal) consider({-n[0], -n[1], -n[2]});
    for (const auto& u : directions(d_)) consider(u);
    if (best_score <= 0) throw std::invalid_argument("witness: no interior point found near q");
    return best;
}

std::vector<Point> Domain::catalog_boundary_points() const {
    switch (kind_) {
        case DomainKind::Ball: return {{size_, 0, 0}};
        case DomainKind::Box: return {{size_, 0, 0}};
        case DomainKind::LShape: return {{0, 0, 0}, {-1, -0.5, 0}};
        case DomainKind::SlitBall: return {{0, 0, 0}, {0.5, 0, 0}};
        case DomainKind::TwoBalls: return {{ball_offset() - 1, 0, 0}};
    }
    return {};
}

Point Domain::boundary_point(double u0, double u1, double u2) const {
    switch (kind_) {
        case DomainKind::Ball: {
            const Point s = sphere_point(d_, u0, u1);
            return {size_ * s[0], size_ * s[1], size_ * s[2]};
        }
        case DomainKind::Box:
        case DomainKind::LShape: {
            const double h = kind_ == DomainKind::Box ? size_ : 1.0;
            const int face = std::min(2 * d_ - 1, int(u2 * 2 * d_));
            Point p{0, 0, 0};
            const double free[2] = {u0, u1};
            int used = 0;
            for (int i = 0; i < d_; ++i)
                p[i] = i == face / 2 ? (face % 2 ? h : -h) : h * (2 * free[used++] - 1);
            if (kind_ == DomainKind::LShape && p[0] > 0 && p[1] > 0) {
                // Outer face of the removed quadrant: move onto an inner face.
                if (p[0] >= p[1]) p[0] = 0; else p[1] = 0;
            }
            return p;
        }
        case DomainKind::SlitBall: {
            if (u2 < 0.7 || d_ < 2) return sphere_point(d_, u0, u1);
            const double x0 = u0;
            const double w = std::sqrt(std::max(0.0, 1 - x0 * x0));
            return {x0, 0, d_ == 3 ? w * (2 * u1 - 1) * 0.999 : 0};
        }
        case DomainKind::TwoBalls: {
            const Point s = sphere_point(d_, u0, u1);
            return add(s, {u2 < 0.5 ? -ball_offset() : ball_offset(), 0, 0});
        }
    }
    return {0, 0, 0};
}

double Domain::audit_kappa(int boundary_samples, int levels, int ball_samples, std::uint64_t seed) const {
    RandomStream rng(seed, 0x6b617070);
    std::vector<Point> qs = catalog_boundary_points();
    for (int i = 0; i < boundary_samples; ++i) {
        const double u0 = rng.uniform(), u1 = rng.uniform(), u2 = rng.uniform();
        qs.push_back(boundary_point(u0, u1, u2));
    }
    double seen = 1.0;
    for (const auto& q : qs) {
        for (int l = 0; l < levels; ++l) {
            const double r = r_char_ * std::ldexp(1.0, -l);
            const Point a = witness(q, r);
            const double k = std::min(distance_to_boundary(a), r - distance(a, q)) / r;
            seen = std::min(seen, k);
            // Rejection-sample points of B(A, kappa r) and confirm they lie in D and in B(Q, r).
            const double rad = kappa_ * r * (1 - 1e-9);
            for (int s = 0; s < ball_samples;) {
                Point v{0, 0, 0};
                for (int i = 0; i < d_; ++i) v[i] = 2 * rng.uniform() - 1;
                if (norm(v) >= 1) continue;
                ++s;
                const Point p = add(a, v, rad);
                if (!contains(p) || !(distance(p, q) < r)) {
                    std::ostringstream msg;
                    msg << name() << ": witness ball at r = " << r << " leaves D or B(Q, r)";
                    throw std::logic_error(msg.str());
                }
            }
        }
    }
    return seen;
}

}  // namespace sbmkit
