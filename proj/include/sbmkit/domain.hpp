#pragma once

// Catalog of kappa-fat test domains in R^d, d <= 3, with exact membership,
// exact distance to the complement, and witness points A_r(Q).

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace sbmkit {

/// Point of R^d stored in three slots; coordinates past d are zero.
using Point = std::array<double, 3>;

double norm(const Point& x);
double distance(const Point& x, const Point& y);
Point add(const Point& x, const Point& y, double scale = 1.0);  // x + scale * y

enum class DomainKind { Ball, Box, LShape, SlitBall, TwoBalls };

std::string domain_key(DomainKind k);
DomainKind parse_domain(const std::string& key);

class Domain {
public:
    /// Open ball of the given radius about the origin (an interval when d = 1).
    static Domain ball(int d, double radius = 1.0);
    /// Open cube (-h, h)^d.
    static Domain box(int d, double half_width = 1.0);
    /// (-1, 1)^d with the closed quadrant {x1 >= 0, x2 >= 0} removed; d >= 2.
    static Domain lshape(int d);
    /// Unit ball minus the closed slit {x2 = 0, x1 >= 0}; d >= 2.
    static Domain slit_ball(int d);
    /// Two disjoint unit balls centred at +-(1 + gap/2) e1.
    static Domain two_balls(int d, double gap = 0.5);
    /// Catalog entry by key with default geometry.
    static Domain make(DomainKind kind, int d);

    DomainKind kind() const { return kind_; }
    int dimension() const { return d_; }
    std::string name() const { return domain_key(kind_); }

    bool contains(const Point& x) const;
    /// Distance from x to the complement; 0 outside.
    double distance_to_boundary(const Point& x) const;

    double diameter() const;
    /// Radius, half width, or gap, depending on the kind.
    double size() const { return size_; }
    double kappa() const { return kappa_; }
    double r_char() const { return r_char_; }
    /// Reference interior point (centre of the first component).
    Point center() const;

    /// Interior point A with B(A, kappa r) inside D and inside B(Q, r).
    Point witness(const Point& q, double r) const;
    /// Unit vector pointing out of D at the boundary point q.
    Point outward_normal(const Point& q) const;
    /// Boundary points used by default in the boundary verifiers.
    std::vector<Point> catalog_boundary_points() const;
    /// Pseudo-random boundary point from two uniforms and a selector in [0, 1).
    Point boundary_point(double u0, double u1, double u2) const;

    /// Checks the witness property by sampling boundary points, dyadic radii,
    /// and points of each witness ball; returns the smallest kappa observed.
    double audit_kappa(int boundary_samples = 64, int levels = 6, int ball_samples = 64,
                       std::uint64_t seed = 1) const;

private:
    Domain(DomainKind kind, int d, double size, double kappa, double r_char);
    double ball_offset() const;

    DomainKind kind_;
    int d_;
    double size_;  // radius, half width, or gap
    double kappa_;
    double r_char_;
};

}  // namespace sbmkit
