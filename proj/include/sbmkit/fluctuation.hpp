#pragma once

// One-dimensional fluctuation theory for X_t = W_{S_t} on the line:
// the ladder height exponent chi, its dual rho, the ladder potential
// density v, and the Green-function bounds built from them.

#include <complex>
#include <memory>
#include <vector>

#include "sbmkit/bernstein.hpp"
#include "sbmkit/laplace.hpp"
#include "sbmkit/quadrature.hpp"
#include "sbmkit/report.hpp"

namespace sbmkit {

struct LadderOptions {
    QuadOptions quad{1e-17, 1e-14, 4000};
    double w_span = 60.0;  // theta = e^w integrated over |w + log lambda| <= w_span
    EulerOptions euler{};
    int stehfest_order = 14;
    double table_lo = 1e-8;
    double table_hi = 1e4;
    int per_decade = 16;
    int crosscheck_stride = 8;  // every k-th table node is re-inverted by Stehfest
    double laplace_tolerance = 1e-5;
};

struct LadderPotential {
    double V;  // V((0, x))
    double v;  // v(x)
};

class LadderData {
public:
    explicit LadderData(BernsteinFamily family, LadderOptions opt = {});

    const BernsteinFamily& family() const { return family_; }
    double alpha() const { return family_.alpha(); }
    const LadderOptions& options() const { return opt_; }

    double chi(double lambda) const;
    double rho(double lambda) const;
    /// Analytic continuation of chi to Re s > 0 (Poisson-integral form).
    std::complex<long double> chi_complex(std::complex<long double> s) const;

    /// v(x) and V((0, x)); exact for Stable, otherwise from a cached inversion.
    LadderPotential potential(double x) const;
    /// Direct (uncached) inversion of 1/chi and 1/(lambda chi) at x.
    LadderPotential invert_potential(double x) const;

    /// Largest relative Stehfest/Euler gap seen on the cross-checked nodes.
    double crosscheck_gap() const;
    /// Relative Laplace-consistency residual of the cached v at the probe points.
    double laplace_residual() const;

private:
    struct Table;
    struct Cache;
    const Table& table() const;
    std::shared_ptr<const Table> build_table() const;

    BernsteinFamily family_;
    LadderOptions opt_;
    std::shared_ptr<Cache> cache_;  // shared by copies; filled once
};

double chi(const LadderData& ladder, double lambda);
double rho(const LadderData& ladder, double lambda);
LadderPotential ladder_potential(const LadderData& ladder, double x);

/// Green function of the process killed on leaving (0, inf), local time
/// normalized to k = 1. Diverges on the diagonal when alpha <= 1.
double halfline_green(const LadderData& ladder, double x, double y);

struct IntervalExitBound {
    double majorant;   // 2 V((0, r)) V((0, x))
    double two_sided;  // 2 V((0, r)) min(V((0, x)), V((0, r - x)))
};

/// Explicit bounds for E_x[tau_(0, r)] = int_0^r G^(0,r)(x, y) dy.
IntervalExitBound interval_exit_bound(const LadderData& ladder, double r, double x);

/// max over a log grid of |chi rho / lambda - 1|.
VerificationReport verify_special_identity(const LadderData& ladder, double lambda_lo = 1e-3,
                                           double lambda_hi = 1e6, int points = 46,
                                           double tolerance = 1e-4);

/// |chi(lambda) / (lambda^{alpha/2} ell(lambda^2)^{1/2}) - 1| at large lambda.
VerificationReport verify_ladder_limit(const LadderData& ladder, const std::vector<double>& lambdas = {1e6, 1e7, 1e8},
                                       double tolerance = 1e-2);

}  // namespace sbmkit
