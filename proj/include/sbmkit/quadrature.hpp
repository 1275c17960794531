#pragma once

// Adaptive Gauss-Kronrod (7/15) quadrature with a global error queue.
//
// The routines are templated on the abscissa type so the same code runs in
// double and long double; the integrand may return a real or a complex value.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <queue>
#include <sstream>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

namespace sbmkit {

/// Raised when an adaptive quadrature cannot meet its tolerance.
class QuadratureError : public std::runtime_error {
public:
    QuadratureError(const std::string& what, double achieved)
        : std::runtime_error(what), achieved_(achieved) {}
    double achieved_error() const noexcept { return achieved_; }

private:
    double achieved_;
};

template <class Value>
struct QuadResult {
    Value value{};
    double error = 0.0;
    int evaluations = 0;
    bool converged = false;
};

struct QuadOptions {
    double abs_tol = 1e-13;
    double rel_tol = 1e-11;
    int max_subdivisions = 2000;
};

namespace detail {

template <class Real>
struct Kronrod15 {
    static constexpr int n = 8;
    static constexpr Real xgk[8] = {
        0.991455371120812639206854697526329L, 0.949107912342758524526189684047851L,
        0.864864423359769072789712788640926L, 0.741531185599394439863864773280788L,
        0.586087235467691130294144845693013L, 0.405845151377397166906606412076961L,
        0.207784955007898467600689403773245L, 0.000000000000000000000000000000000L};
    static constexpr Real wgk[8] = {
        0.022935322010529224963732008058970L, 0.063092092629978553290700663189204L,
        0.104790010322250183839876322541518L, 0.140653259715525918745189590510238L,
        0.169004726639267902826583426598550L, 0.190350578064785409913256402421014L,
        0.204432940075298892414161999234649L, 0.209482141084727828012999174891714L};
    static constexpr Real wg[4] = {
        0.129484966168869693270611432679082L, 0.279705391489276667901467771423780L,
        0.381830050505118944950369775488975L, 0.417959183673469387755102040816327L};
};

template <class V>
double magnitude(const V& v) {
    using std::abs;
    return static_cast<double>(abs(v));
}

template <class Real, class Value>
struct Segment {
    Real a, b;
    Value value;
    double error;
    bool operator<(const Segment& o) const { return error < o.error; }
};

template <class Real, class F>
auto gk15(F& f, Real a, Real b) {
    using Value = std::decay_t<decltype(f(a))>;
    using K = Kronrod15<Real>;
    const Real center = (a + b) / 2;
    const Real half = (b - a) / 2;
    const Value fc = f(center);
    Value resk = fc * K::wgk[7];
    Value resg = fc * K::wg[3];
    for (int j = 0; j < 7; ++j) {
        const Real dx = half * K::xgk[j];
        const Value f1 = f(center - dx);
        const Value f2 = f(center + dx);
        resk += (f1 + f2) * K::wgk[j];
        if (j % 2 == 1) resg += (f1 + f2) * K::wg[j / 2];
    }
    resk *= half;
    resg *= half;
    double err = magnitude(resk - resg);
    // QUADPACK's heuristic sharpening of the raw Gauss/Kronrod difference.
    const double scale = magnitude(resk);
    if (err > 0 && scale > 0) {
        const double ratio = std::pow(200.0 * err / scale, 1.5);
        if (ratio < 1.0) err = scale * ratio;
    }
    const double eps = std::numeric_limits<Real>::epsilon();
    err = std::max(err, 50.0 * eps * scale);
    return Segment<Real, Value>{a, b, resk, err};
}

}  // namespace detail

/// Integrates f over the finite interval [a, b].
template <class Real, class F>
auto try_integrate(F&& f, Real a, Real b, const QuadOptions& opt = {}) {
    using Value = std::decay_t<decltype(f(a))>;
    using Seg = detail::Segment<Real, Value>;
    QuadResult<Value> out;
    if (a == b) {
        out.converged = true;
        return out;
    }
    std::priority_queue<Seg> heap;
    Seg first = detail::gk15<Real>(f, a, b);
    Value total = first.value;
    double total_err = first.error;
    heap.push(first);
    out.evaluations = 15;
    int splits = 0;
    while (true) {
        const double target = std::max(opt.abs_tol, opt.rel_tol * detail::magnitude(total));
        if (total_err <= target) {
            out.converged = true;
            break;
        }
        if (splits >= opt.max_subdivisions) break;
        Seg worst = heap.top();
        const Real mid = (worst.a + worst.b) / 2;
        if (!(mid > worst.a && mid < worst.b)) break;  // interval exhausted
        heap.pop();
        Seg left = detail::gk15<Real>(f, worst.a, mid);
        Seg right = detail::gk15<Real>(f, mid, worst.b);
        out.evaluations += 30;
        ++splits;
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        // Re-sum periodically to avoid drift in the running totals.
        if (splits % 64 == 0 || heap.size() < 8) {
            Value s{};
            double e = 0.0;
            auto copy = heap;
            while (!copy.empty()) {
                s += copy.top().value;
                e += copy.top().error;
                copy.pop();
            }
            total = s;
            total_err = e;
        } else {
            total += left.value + right.value - worst.value;
        }
    }
    Value s{};
    double e = 0.0;
    while (!heap.empty()) {
        s += heap.top().value;
        e += heap.top().error;
        heap.pop();
    }
    out.value = s;
    out.error = e;
    if (!out.converged) {
        const double target = std::max(opt.abs_tol, opt.rel_tol * detail::magnitude(s));
        out.converged = e <= target;
    }
    return out;
}

/// Integrates f over consecutive breakpoints; breakpoints must be sorted.
template <class Real, class F>
auto try_integrate_pieces(F&& f, const std::vector<Real>& points, const QuadOptions& opt = {}) {
    using Value = std::decay_t<decltype(f(points.front()))>;
    QuadResult<Value> out;
    out.converged = true;
    for (std::size_t i = 0; i + 1 < points.size(); ++i) {
        auto piece = try_integrate<Real>(f, points[i], points[i + 1], opt);
        out.value += piece.value;
        out.error += piece.error;
        out.evaluations += piece.evaluations;
        out.converged = out.converged && piece.converged;
    }
    return out;
}

/// Throwing variant: returns the integral or raises QuadratureError.
template <class Real, class F>
auto integrate(F&& f, Real a, Real b, const QuadOptions& opt = {}, const char* what = "integral") {
    auto r = try_integrate<Real>(std::forward<F>(f), a, b, opt);
    if (!r.converged) {
        std::ostringstream msg;
        msg << "quadrature did not converge for " << what << " on [" << static_cast<double>(a)
            << ", " << static_cast<double>(b) << "]; estimated error " << r.error;
        throw QuadratureError(msg.str(), r.error);
    }
    return r.value;
}

template <class Real, class F>
auto integrate_pieces(F&& f, const std::vector<Real>& points, const QuadOptions& opt = {},
                      const char* what = "integral") {
    auto r = try_integrate_pieces<Real>(std::forward<F>(f), points, opt);
    if (!r.converged) {
        std::ostringstream msg;
        msg << "quadrature did not converge for " << what << "; estimated error " << r.error;
        throw QuadratureError(msg.str(), r.error);
    }
    return r.value;
}

/// Integral of f over (a, inf) via the substitution x = a + exp(w), w in R.
/// Suitable for integrands with power-law behaviour at both a and infinity.
template <class Real, class F>
auto integrate_log_tail(F&& f, Real a, Real w_lo, Real w_hi, const QuadOptions& opt = {},
                        const char* what = "tail integral") {
    auto g = [&](Real w) {
        const Real e = std::exp(w);
        return f(a + e) * e;
    };
    std::vector<Real> pts;
    const int pieces = std::max(1, static_cast<int>((w_hi - w_lo) / 8));
    for (int i = 0; i <= pieces; ++i) pts.push_back(w_lo + (w_hi - w_lo) * Real(i) / Real(pieces));
    return integrate_pieces<Real>(g, pts, opt, what);
}

}  // namespace sbmkit
