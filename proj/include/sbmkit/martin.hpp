#pragma once

// Martin kernel M_D(x, y) = G_D(x, y) / G_D(x0, y) from kernel-density
// occupation estimates, boundary limits along approach sequences, and the
// boundary growth estimate for harmonic measures.

#include <cstdint>
#include <vector>

#include "sbmkit/domain.hpp"
#include "sbmkit/estimators.hpp"
#include "sbmkit/report.hpp"
#include "sbmkit/simulate.hpp"

namespace sbmkit {

/// Too few paths reached the neighbourhood of an evaluation point.
class BandwidthStarvation : public SimulationError {
public:
    using SimulationError::SimulationError;
};

struct MartinProbe {
    Domain domain;
    Point x0{};
    std::vector<Point> x_grid;
    Point z{};                     // boundary point
    std::vector<Point> approach;   // y_m -> z, |y_m - z| strictly decreasing
    double bandwidth = 0.1;

    /// Throws std::invalid_argument when an invariant fails.
    void validate() const;

    /// y_m = z - 2^-m r0 n(z), m = 1..levels, with n the outward normal at z.
    static MartinProbe along_normal(const Domain& domain, const Point& z, const Point& x0,
                                    std::vector<Point> x_grid, double r0, int levels, double bandwidth);
};

/// c N^{-1/(d+4)}.
double default_bandwidth(int d, std::size_t n, double c = 0.4);

/// Epanechnikov kernel (d+2)/(2 V_d b^d) (1 - |u|^2/b^2)_+.
double epanechnikov(const Point& u, int d, double b);

struct MartinTable {
    std::vector<Point> y;                  // approach points
    std::vector<Point> x;                  // x_grid
    std::vector<std::vector<double>> m;    // [level][x]
    std::vector<std::vector<double>> se;
    std::vector<std::vector<double>> m_half;  // first N/2 paths only
    std::vector<std::vector<double>> se_half;
    std::vector<double> g_x0;              // G_D(y_m, x0) estimate
    std::vector<double> g_x0_se;
    std::vector<std::size_t> effective;    // fewest contributing paths over evaluation points
    std::size_t paths = 0;
};

/// For each y_m: N paths from y_m, occupation density at x0 and the x grid,
/// M = G(y_m, x) / G(y_m, x0) with a ratio-estimator standard error.
MartinTable estimate_martin(const MartinProbe& probe, const SubordinatorModel& model, const PathConfig& cfg,
                            std::size_t n, int workers = 0, std::size_t min_effective = 50);

/// Kernel-smoothed closed-form Green function of B(0, r) for the stable process:
/// int K_b(w - x) G_B(y, w) dw.
double smoothed_stable_ball_green(double alpha, int d, double r, const Point& y, const Point& x, double b);

/// Table against oracles (closed form when the model is stable and the domain a
/// centred ball), M(x0, .) = 1, Cauchy criterion along the approach sequence,
/// and the source/evaluation symmetry of the Green estimate.
VerificationReport martin_report(const MartinProbe& probe, const SubordinatorModel& model, const PathConfig& cfg,
                                 std::size_t n, int workers = 0);
VerificationReport martin_report(const MartinProbe& probe, const SubordinatorModel& model, const PathConfig& cfg,
                                 const MartinTable& table, int workers = 0);

/// Exponent beta of the fit M(z, y_m) = L + A (|y_m - z| / r0)^beta, so that
/// |M(z, y_m) - M(z, w)| decays like a power of the distance to the limit point w.
VerificationReport oscillation_decay(const MartinProbe& probe, const MartinTable& table);
VerificationReport oscillation_decay(const MartinProbe& probe, const SubordinatorModel& model, const PathConfig& cfg,
                                     std::size_t n, int workers = 0);

struct GrowthOptions {
    McOptions mc{20000, 0, 0, 1e-4, 32.0, 0.02, 6};
    double patch_factor = 2.0;  // u = P(exit into D^c \ B(Q, patch_factor r))
};

/// u(A_r) / u(A_{(kappa/2)^k r}) for k = 0..k_max, fitted to
/// c (2/kappa)^{gamma k} ell((kappa/2)^{-2k} r^-2) / ell(r^-2).
VerificationReport growth_lemma_check(const SubordinatorModel& model, const Domain& domain, const Point& q,
                                      double r, int k_max, std::size_t n, const GrowthOptions& opt = {});

}  // namespace sbmkit
