#pragma once

// Monte Carlo estimators built on the path engine: exit times and their
// envelopes, the jump-exit (Poisson) kernel of a ball, and empirical
// Harnack, boundary Harnack, and Carleson constants on catalog domains.

#include <cstdint>
#include <functional>
#include <vector>

#include "sbmkit/domain.hpp"
#include "sbmkit/kernels.hpp"
#include "sbmkit/report.hpp"
#include "sbmkit/simulate.hpp"

namespace sbmkit {

// Closed forms for the isotropic alpha-stable process (phi = lambda^{alpha/2}) in B(0, r).
double stable_ball_exit_time(double alpha, int d, double r, double x_norm);
double stable_ball_green(double alpha, int d, double r, const Point& x, const Point& y);
double stable_ball_poisson_kernel(double alpha, int d, double r, const Point& x, const Point& y);
/// Unnormalised Martin kernel at z on the sphere: (r^2 - |x|^2)^{alpha/2} / |x - z|^d.
double stable_ball_martin_kernel(double alpha, int d, double r, const Point& x, const Point& z);

/// 1 / phi(r^-2): the time scale of X on spatial scale r.
double time_scale(const SubordinatorModel& model, double r);

/// Shared Monte Carlo knobs. Steps are expressed in units of time_scale(r)
/// for the spatial scale r of each experiment.
struct McOptions {
    std::size_t paths = 20000;
    int workers = 0;
    std::uint64_t seed = 0;
    double dt_scale = 1e-3;
    double adaptive = 0.0;        // see PathConfig::adaptive; 0 = fixed steps
    double dt_max_scale = 0.02;
    int refine_levels = 6;
};

PathConfig path_config_for(const SubordinatorModel& model, double r, const McOptions& mc);

/// Least-squares slope of log c against log r and the spread max c / min c.
struct Trend {
    double slope = 0.0;
    double spread = 1.0;
};
Trend fit_trend(const std::vector<double>& r, const std::vector<double>& c);

struct ExitTimeRow {
    Point x{};
    double mean = 0.0;
    double se = 0.0;
    std::size_t n = 0;
    double mean_steps = 0.0;
};

std::vector<ExitTimeRow> estimate_exit_time(const PathSimulator& sim, const Domain& domain,
                                            const std::vector<Point>& x_grid, std::size_t n,
                                            std::uint64_t seed, int workers = 0);

struct ExitOracleOptions {
    int d = 3;
    double radius = 1.0;
    Point x{};
    std::size_t paths = 100000;
    double dt = 1e-4;
    std::uint64_t seed = 0;
    int workers = 0;
    int refine_levels = 6;
    bool coupled = true;     // also monitor every path on the dt/2 grid
    double rel_tol = 0.01;   // oracle band is max(3 SE, rel_tol * exact)
};

/// Mean exit time from B(0, r) on the dt grid, the same paths on the dt/2
/// grid, and the closed form when the model is stable.
VerificationReport verify_exit_time_oracle(const SubordinatorModel& model, const ExitOracleOptions& opt);

struct EnvelopeOptions {
    int d = 3;
    std::vector<double> radii{0.5, 0.25, 0.125};
    std::vector<double> fractions{0.0, 0.5, 0.75};  // |x| / r on the x grid
    McOptions mc{};
    double max_slope = 0.1;
    double max_spread = 3.0;
};

/// Upper envelope C r^{a/2} (r-|x|)^{a/2} / (ell(r^-2) ell((r-|x|)^-2))^{1/2}
/// and lower envelope C r^a / ell(r^-2) for exits from B(0, r).
VerificationReport verify_exit_time_envelopes(const SubordinatorModel& model, const EnvelopeOptions& opt);

struct PoissonKernelOptions {
    double radius = 1.0;
    Point x{};
    std::vector<double> shells{1.1, 1.25, 1.5, 2.0, 3.0, 5.0, 8.0};  // cell edges in units of radius
    McOptions mc{200000, 0, 0, 2e-4, 0.0, 0.02, 6};
    int table_points = 257;
    double jumped_fraction_warning = 0.5;
};

/// Jump-exit histogram from B(0, r) against the compensator
/// sum_k h_k int_cell J(y - X_k) dy accumulated along the same paths.
VerificationReport estimate_poisson_kernel(const KernelEvaluator& ke, const PoissonKernelOptions& opt);

/// Harmonic measures of exterior cells from several starting points.
struct PatchMeasures {
    std::vector<Point> points;
    std::vector<HarmonicMeasure> measures;  // one per point
};

PatchMeasures measure_patches(const PathSimulator& sim, const Domain& domain, const std::vector<Point>& points,
                              const std::function<int(const Point&)>& cell, int cells, std::size_t n,
                              std::uint64_t seed, int workers);

struct HarnackOptions {
    int d = 3;
    std::vector<double> radii{0.25, 0.125, 0.0625, 0.03125, 0.015625};
    double sample_fraction = 0.45;  // sample points at +-fraction * r e_k and the centre
    McOptions mc{20000, 0, 0, 1e-4, 32.0, 0.02, 6};
    double max_abs_slope = 0.1;
};

VerificationReport verify_harnack(const SubordinatorModel& model, const HarnackOptions& opt);

struct BoundaryOptions {
    std::vector<Point> q_list;     // empty: the domain's catalog points
    std::vector<double> radii;     // empty: four dyadic radii below min(R_char, r5) / 2
    McOptions mc{20000, 0, 0, 1e-4, 32.0, 0.02, 6};
    double m_factor = 4.0;         // M = m_factor * diam(D)
    double min_slope = -0.1;
    double max_spread = 3.0;
};

/// Largest dyadic r <= 1 on which ell(s^-2) / ell(rho^-2) stays in [1/2, 2]
/// for rho <= r and s in [rho/8, 8 rho].
double slowly_varying_radius(const BernsteinFamily& family);

VerificationReport verify_bhp(const SubordinatorModel& model, const Domain& domain, const BoundaryOptions& opt);
VerificationReport verify_carleson(const SubordinatorModel& model, const Domain& domain,
                                   const BoundaryOptions& opt);

/// Exterior shell sector around Q: 2r < |y - Q| < 4r, y outside D, split into
/// two halves by the sign of (y - Q) . t with t orthogonal to the normal.
/// Returns 0, 1, or -1.
int boundary_patch(const Domain& domain, const Point& q, const Point& t, double r, const Point& y);
/// Unit tangent used to split the patches at q.
Point patch_tangent(const Domain& domain, const Point& q);

}  // namespace sbmkit
