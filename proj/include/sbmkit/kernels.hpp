#pragma once

// Free-space Green function and jump kernel of X_t = W_{S_t} on R^d by
// subordination, their small-distance predictions, and grid checks of the
// regular-variation inequalities used throughout the estimates.

#include <memory>
#include <vector>

#include "sbmkit/bernstein.hpp"
#include "sbmkit/quadrature.hpp"
#include "sbmkit/report.hpp"

namespace sbmkit {

struct KernelOptions {
    QuadOptions quad{1e-300, 1e-12, 4000};
    double table_lo = 1e-16;  // tabulation range for inverted u and mu
    double table_hi = 1e10;
    int per_decade = 64;
};

class KernelEvaluator {
public:
    KernelEvaluator(SubordinatorModel model, int d, KernelOptions opt = {});

    const SubordinatorModel& model() const { return model_; }
    int dimension() const { return d_; }
    double alpha() const { return model_.alpha(); }

    /// alpha Gamma((d-alpha)/2) / (2^{alpha+1} pi^{d/2} Gamma(1+alpha/2)).
    double green_const() const { return green_const_; }
    /// alpha Gamma((d+alpha)/2) / (2^{1-alpha} pi^{d/2} Gamma(1-alpha/2)).
    double jump_const() const { return jump_const_; }

    /// G at distance r from the pole.
    double green(double r) const;
    /// j(r) = J(x) for |x| = r.
    double jump(double r) const;
    /// Small-distance predictions green_const / (r^{d-alpha} ell(r^-2)) and
    /// jump_const ell(r^-2) / r^{d+alpha}.
    double green_predicted(double r) const;
    double jump_predicted(double r) const;

    double u(double t) const;
    double mu(double t) const;

    /// Same integral evaluated with a caller-supplied tolerance.
    double green(double r, const QuadOptions& quad) const;
    double jump(double r, const QuadOptions& quad) const;

private:
    double subordinate(double r, bool levy, const QuadOptions& quad) const;

    SubordinatorModel model_;
    int d_;
    KernelOptions opt_;
    double green_const_, jump_const_;
    std::shared_ptr<const LogLogTable> u_table_, mu_table_;
};

/// G(x) for a point x in R^d, x != 0.
double green_free(const KernelEvaluator& ke, const std::vector<double>& x);
double jump_kernel(const KernelEvaluator& ke, double r);

/// Largest grid radius r3 below which jump_const/2 <= j(r) r^{d+alpha} / ell(r^-2) <= 2 jump_const.
VerificationReport check_lemma_lJ(const KernelEvaluator& ke, const std::vector<double>& r_grid);

/// Ratio of G and j to their predictions at the given radii; passes when the
/// ratio at the smallest radius lies within tolerance of 1 and the distance
/// to 1 does not grow as r decreases.
VerificationReport verify_kernel_asymptotics(const KernelEvaluator& ke,
                                             const std::vector<double>& radii = {1e-1, 1e-2, 1e-3, 1e-4},
                                             double tolerance = 0.02);

struct RegvarOptions {
    double r_min = 1e-8;
    int points = 161;
    double c_max = 100.0;      // admissibility bound used to pick the default r4
    double stability = 0.05;   // allowed relative change of C under grid doubling
};

/// Minimal constants for the eight regular-variation inequalities on
/// 0 < s < r <= 4 r4, with a grid-doubling stability check.
VerificationReport check_regvar_inequalities(const BernsteinFamily& family, double r4,
                                             const RegvarOptions& opt = {});

/// Largest dyadic r4 <= 1 for which every inequality holds with C <= c_max.
double default_r4(const BernsteinFamily& family, const RegvarOptions& opt = {});

/// Names of the eight inequalities in report order.
const std::vector<std::string>& regvar_inequality_names();

}  // namespace sbmkit
