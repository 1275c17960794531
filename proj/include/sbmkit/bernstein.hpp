#pragma once

// Complete Bernstein functions phi(lambda) = lambda^{alpha/2} ell(lambda) of the
// five supported families, and the subordinator quantities derived from them:
// the potential density u and the Levy density mu.

#include <cmath>
#include <complex>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sbmkit/interp.hpp"
#include "sbmkit/laplace.hpp"
#include "sbmkit/report.hpp"

namespace sbmkit {

enum class Family { Stable, Relativistic, StableMixture, LogWeightPos, LogWeightNeg };

/// Config-file spelling: stable, relativistic, mixture, logpos, logneg.
std::string family_key(Family f);
Family parse_family(const std::string& key);

class BernsteinFamily {
public:
    BernsteinFamily(Family kind, double alpha, std::optional<double> beta = std::nullopt);

    Family kind() const { return kind_; }
    double alpha() const { return alpha_; }
    std::optional<double> beta() const { return beta_; }
    std::string describe() const;

    /// Closed form of phi; T is a real or complex floating type.
    template <class T>
    T phi(T lambda) const;
    /// phi'(lambda), used to recover t*mu(t) by inversion.
    template <class T>
    T dphi(T lambda) const;

    /// log ell(x) for x > 0, computed without cancellation at both ends.
    double log_ell(double x) const;
    long double log_ell(long double x) const;

private:
    template <class R>
    R log_ell_impl(R x) const;

    Family kind_;
    double alpha_;
    std::optional<double> beta_;
};

/// phi(lambda); throws std::domain_error for lambda <= 0 or NaN.
double phi(const BernsteinFamily& family, double lambda);
/// ell(lambda) = phi(lambda) / lambda^{alpha/2}.
double ell(const BernsteinFamily& family, double lambda);
/// Smallest lambda with phi(lambda) >= value (bisection in log lambda).
double phi_inverse(const BernsteinFamily& family, double value);

struct InversionOptions {
    int stehfest_order = 16;
    int talbot_nodes = 24;
    double agreement = 1e-6;  // accepted relative gap between the two methods
};

/// A subordinator with Laplace exponent phi and its densities u and mu.
class SubordinatorModel {
public:
    explicit SubordinatorModel(BernsteinFamily family, std::optional<double> gamma_a1 = std::nullopt,
                               InversionOptions inversion = {});

    const BernsteinFamily& family() const { return family_; }
    double alpha() const { return family_.alpha(); }
    /// Exponent gamma with u(t) ~ c t^{gamma-1} as t -> infinity.
    double gamma_a1() const { return gamma_a1_; }

    double phi(double lambda) const { return sbmkit::phi(family_, lambda); }
    double ell(double lambda) const { return sbmkit::ell(family_, lambda); }

    bool u_closed_form() const;
    bool mu_closed_form() const;

    /// Potential density; exact for Stable, otherwise by Laplace inversion.
    double potential_density(double t) const;
    /// Levy density; exact where known, otherwise by inversion of phi'.
    double levy_density(double t) const;

    /// Tabulated copies for repeated evaluation (closed forms pass through).
    std::shared_ptr<const LogLogTable> tabulate_u(double t_lo, double t_hi, int per_decade = 24) const;
    std::shared_ptr<const LogLogTable> tabulate_mu(double t_lo, double t_hi, int per_decade = 24) const;

    const InversionOptions& inversion() const { return inversion_; }

private:
    double invert(bool levy, double t) const;

    BernsteinFamily family_;
    double gamma_a1_;
    InversionOptions inversion_;
    std::vector<long double> stehfest_;
};

double potential_density_u(const SubordinatorModel& model, double t);
double levy_density_mu(const SubordinatorModel& model, double t);

struct Condition25Options {
    double delta = 0.5;
    double big_m = 10.0;
    int theta_points = 121;
    int lambda_points = 81;
    double lambda_max = 1e8;
    double theta_min = 1e-6;
    double headroom = 1.1;
};

/// Numerical evidence for the log-ratio domination hypothesis on ell.
VerificationReport check_condition_2_5(const BernsteinFamily& family, const Condition25Options& opt = {});

struct AssumptionOptions {
    int dimension = 3;
    double xi = 1.0;
    double t_lo = 1e-6;
    double t_hi = 1e6;
    int points_per_decade = 8;
    double c2_horizon = 10.0;  // M in mu(t) <= C2 mu(2t) on (0, M)
};

/// Checks A1 (large-time potential density), A2/A3 (dominated ell ratios)
/// and A4 (mu(t) <= C1 mu(t+1)) on grids.
VerificationReport check_A1_A4(const SubordinatorModel& model, const AssumptionOptions& opt = {});

// ---------------------------------------------------------------------------

namespace detail {

// log(1 + z) and exp(z) - 1 without cancellation for small z, for real and
// complex arguments alike (Goldberg's correction).
template <class T>
T log1p_any(T z) {
    const T w = T(1) + z;
    if (w == T(1)) return z;
    return std::log(w) * (z / (w - T(1)));
}

template <class T>
T expm1_any(T z) {
    const T u = std::exp(z);
    if (u == T(1)) return z;
    const T um1 = u - T(1);
    if (um1 == T(-1)) return T(-1);
    return um1 * (z / std::log(u));
}

}  // namespace detail

template <class T>
T BernsteinFamily::phi(T lambda) const {
    using std::pow;
    using Real = decltype(std::abs(lambda));
    const Real a = static_cast<Real>(alpha_) / 2;
    switch (kind_) {
        case Family::Stable:
            return pow(lambda, T(a));
        case Family::Relativistic:
            return detail::expm1_any(T(a) * detail::log1p_any(lambda));
        case Family::StableMixture:
            return pow(lambda, T(a)) + pow(lambda, T(static_cast<Real>(*beta_) / 2));
        case Family::LogWeightPos:
            return pow(lambda, T(a)) * pow(detail::log1p_any(lambda), T(static_cast<Real>(*beta_) / 2));
        case Family::LogWeightNeg:
            return pow(lambda, T(a)) * pow(detail::log1p_any(lambda), T(-static_cast<Real>(*beta_) / 2));
    }
    return T(0);
}

template <class T>
T BernsteinFamily::dphi(T lambda) const {
    using std::pow;
    using Real = decltype(std::abs(lambda));
    const Real a = static_cast<Real>(alpha_) / 2;
    switch (kind_) {
        case Family::Stable:
            return T(a) * pow(lambda, T(a - 1));
        case Family::Relativistic:
            return T(a) * pow(lambda + T(1), T(a - 1));
        case Family::StableMixture: {
            const Real b = static_cast<Real>(*beta_) / 2;
            return T(a) * pow(lambda, T(a - 1)) + T(b) * pow(lambda, T(b - 1));
        }
        case Family::LogWeightPos:
        case Family::LogWeightNeg: {
            const Real b = (kind_ == Family::LogWeightPos ? Real(1) : Real(-1)) * static_cast<Real>(*beta_) / 2;
            const T L = detail::log1p_any(lambda);
            return T(a) * pow(lambda, T(a - 1)) * pow(L, T(b)) +
                   T(b) * pow(lambda, T(a)) * pow(L, T(b - 1)) / (lambda + T(1));
        }
    }
    return T(0);
}

}  // namespace sbmkit
