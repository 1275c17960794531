#pragma once

// Numerical inversion of Laplace transforms.
//
//   gaver_stehfest : real-axis samples only; good for smooth, non-oscillating
//                    originals (completely monotone densities in particular).
//   fixed_talbot   : deformed Bromwich contour; needs F on the cut plane.
//   euler_bromwich : Bromwich line Re s = A/(2t) with Euler summation; needs F
//                    only in the right half-plane.

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace sbmkit {

/// Raised when two independent inversions of the same transform disagree.
class InversionError : public std::runtime_error {
public:
    InversionError(const std::string& what, double residual)
        : std::runtime_error(what), residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

/// Gaver-Stehfest weights V_k, k = 1..n (n even), in precision Real.
template <class Real>
std::vector<Real> stehfest_weights(int n) {
    if (n <= 0 || n % 2 != 0) throw std::invalid_argument("Stehfest order must be even and positive");
    const int half = n / 2;
    std::vector<Real> fact(static_cast<std::size_t>(2 * n + 1));
    fact[0] = 1;
    for (int i = 1; i <= 2 * n; ++i) fact[static_cast<std::size_t>(i)] = fact[static_cast<std::size_t>(i - 1)] * Real(i);
    auto F = [&](int i) { return fact[static_cast<std::size_t>(i)]; };
    std::vector<Real> w(static_cast<std::size_t>(n));
    for (int k = 1; k <= n; ++k) {
        Real sum = 0;
        for (int j = (k + 1) / 2; j <= std::min(k, half); ++j) {
            Real num = F(2 * j);
            Real pw = 1;
            for (int p = 0; p < half; ++p) pw *= Real(j);
            num *= pw;
            const Real den = F(half - j) * F(j) * F(j - 1) * F(k - j) * F(2 * j - k);
            sum += num / den;
        }
        const bool negative = ((k + half) % 2) != 0;
        w[static_cast<std::size_t>(k - 1)] = negative ? -sum : sum;
    }
    return w;
}

/// f(t) from its transform F evaluated at real points k ln2 / t.
template <class Real, class F>
Real gaver_stehfest(F&& transform, Real t, const std::vector<Real>& weights) {
    const Real ln2 = static_cast<Real>(0.693147180559945309417232121458176568L);
    const Real a = ln2 / t;
    Real sum = 0;
    for (std::size_t k = 0; k < weights.size(); ++k) sum += weights[k] * transform(a * Real(k + 1));
    return a * sum;
}

/// Fixed Talbot contour (Abate-Valko) with M nodes.
template <class Real, class F>
Real fixed_talbot(F&& transform, Real t, int m) {
    using C = std::complex<Real>;
    const Real pi = static_cast<Real>(3.14159265358979323846264338327950288L);
    const Real r = Real(2) * Real(m) / (Real(5) * t);
    Real sum = Real(0.5) * std::exp(r * t) * std::real(transform(C(r, 0)));
    for (int k = 1; k < m; ++k) {
        const Real theta = Real(k) * pi / Real(m);
        const Real cot = std::cos(theta) / std::sin(theta);
        const C s(r * theta * cot, r * theta);
        const Real sigma = theta + (theta * cot - Real(1)) * cot;
        sum += std::real(std::exp(s * t) * transform(s) * C(1, sigma));
    }
    return r / Real(m) * sum;
}

struct EulerOptions {
    double a = 25.0;  // discretization error is of order exp(-a)
    int terms = 38;   // partial sums before Euler averaging
    int averaging = 12;
};

/// Abate-Whitt Euler summation of the Bromwich integral.
template <class Real, class F>
Real euler_bromwich(F&& transform, Real t, const EulerOptions& opt = {}) {
    using C = std::complex<Real>;
    const Real pi = static_cast<Real>(3.14159265358979323846264338327950288L);
    const Real A = static_cast<Real>(opt.a);
    const Real scale = std::exp(A / 2) / t;
    const int n = opt.terms;
    const int m = opt.averaging;
    std::vector<Real> partial(static_cast<std::size_t>(n + m + 1));
    Real s = std::real(transform(C(A / (2 * t), 0))) / 2;
    for (int k = 1; k <= n + m; ++k) {
        const C z(A / (2 * t), Real(k) * pi / t);
        const Real term = std::real(transform(z));
        s += (k % 2 == 0) ? term : -term;
        partial[static_cast<std::size_t>(k)] = s;
    }
    // Binomial average of partial sums n..n+m.
    Real acc = 0;
    Real binom = 1;
    for (int k = 0; k <= m; ++k) {
        acc += binom * partial[static_cast<std::size_t>(n + k)];
        binom = binom * Real(m - k) / Real(k + 1);
    }
    acc /= std::pow(Real(2), Real(m));
    return scale * acc;
}

}  // namespace sbmkit
