#include "sbmkit/fluctuation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <sstream>
#include <stdexcept>

#include "sbmkit/interp.hpp"

namespace sbmkit {

namespace {

using LD = long double;
using CLD = std::complex<LD>;
constexpr LD kPi = 3.14159265358979323846264338327950288L;

// (1/pi) int_0^inf L(lambda^2 theta^2) / (1 + theta^2) dtheta with theta = e^w.
template <class LogEll>
LD log_poisson(LD lambda, const LogEll& log_ell, const LadderOptions& opt) {
    const LD center = -std::log(lambda);  // lambda^2 theta^2 = 1 here
    auto f = [&](LD w) {
        const LD e = std::exp(-std::fabs(w));
        const LD weight = e / (1 + e * e);  // 1 / (2 cosh w)
        return log_ell(lambda * lambda * std::exp(2 * w)) * weight;
    };
    const LD span = static_cast<LD>(opt.w_span);
    const LD lo = std::min<LD>(center, 0) - span, hi = std::max<LD>(center, 0) + span;
    std::vector<LD> pts{lo, hi, 0, center};
    for (LD p = lo + 10; p < hi; p += 10) pts.push_back(p);
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    return integrate_pieces<LD>(f, pts, opt.quad, "ladder exponent") / kPi;
}

}  // namespace

struct LadderData::Table {
    LogLogTable v, V;
    double gap = 0.0;
    double residual = 0.0;
};

struct LadderData::Cache {
    std::once_flag once;
    std::shared_ptr<const Table> table;
};

LadderData::LadderData(BernsteinFamily family, LadderOptions opt)
    : family_(std::move(family)), opt_(opt), cache_(std::make_shared<Cache>()) {}

double LadderData::chi(double lambda) const {
    if (!(lambda > 0)) throw std::domain_error("chi requires a positive argument");
    const LD a = static_cast<LD>(alpha()) / 2;
    const BernsteinFamily& f = family_;
    const LD rest = log_poisson(static_cast<LD>(lambda), [&](LD x) { return f.log_ell(x); }, opt_);
    return static_cast<double>(std::exp(a * std::log(static_cast<LD>(lambda)) + rest));
}

double LadderData::rho(double lambda) const {
    if (!(lambda > 0)) throw std::domain_error("rho requires a positive argument");
    // psi(x) = x / phi(x) has index 2 - alpha; its slowly varying part is
    // psi(x) / x^{1 - alpha/2}, evaluated from phi directly.
    const LD a = static_cast<LD>(alpha()) / 2;
    const BernsteinFamily& f = family_;
    auto log_ell_psi = [&](LD x) { return a * std::log(x) - std::log(f.phi<LD>(x)); };
    const LD rest = log_poisson(static_cast<LD>(lambda), log_ell_psi, opt_);
    return static_cast<double>(std::exp((1 - a) * std::log(static_cast<LD>(lambda)) + rest));
}

std::complex<long double> LadderData::chi_complex(std::complex<long double> s) const {
    if (!(s.real() > 0)) throw std::domain_error("chi_complex requires Re s > 0");
    const LD a = static_cast<LD>(alpha()) / 2;
    const BernsteinFamily& f = family_;
    auto g = [&](LD w) {
        const LD e = std::exp(w);
        return s * (e * f.log_ell(e * e)) / (s * s + e * e);
    };
    const LD c = std::log(std::abs(s));
    const LD span = static_cast<LD>(opt_.w_span);
    std::vector<LD> pts{std::min<LD>(c, 0) - span, std::max<LD>(c, 0) + span, 0};
    for (LD d : {-8.0L, -3.0L, -1.0L, -0.25L, 0.0L, 0.25L, 1.0L, 3.0L, 8.0L}) pts.push_back(c + d);
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    const CLD rest = integrate_pieces<LD>(g, pts, opt_.quad, "complex ladder exponent") / kPi;
    return std::exp(a * std::log(s) + rest);
}

LadderPotential LadderData::invert_potential(double x) const {
    if (!(x > 0)) throw std::domain_error("ladder potential requires x > 0");
    std::vector<CLD> chis;
    auto f_small = [&](CLD s) {
        const CLD c = chi_complex(s);
        chis.push_back(c);
        return LD(1) / c;
    };
    const LD v = euler_bromwich<LD>(f_small, static_cast<LD>(x), opt_.euler);
    std::size_t i = 0;
    auto f_big = [&](CLD s) { return LD(1) / (s * chis[i++]); };
    const LD V = euler_bromwich<LD>(f_big, static_cast<LD>(x), opt_.euler);
    return {static_cast<double>(V), static_cast<double>(v)};
}

const LadderData::Table& LadderData::table() const {
    std::call_once(cache_->once, [this] { cache_->table = build_table(); });
    return *cache_->table;
}

std::shared_ptr<const LadderData::Table> LadderData::build_table() const {
    auto tab = std::make_shared<Table>();
    const int decades = static_cast<int>(std::lround(std::log10(opt_.table_hi / opt_.table_lo)));
    const int n = decades * opt_.per_decade + 1;
    std::vector<double> xs(static_cast<std::size_t>(n)), vs(xs.size()), Vs(xs.size());
    const auto weights = stehfest_weights<LD>(opt_.stehfest_order);
    for (int i = 0; i < n; ++i) {
        const double x = opt_.table_lo * std::pow(10.0, static_cast<double>(i) / opt_.per_decade);
        const auto p = invert_potential(x);
        xs[static_cast<std::size_t>(i)] = x;
        vs[static_cast<std::size_t>(i)] = p.v;
        Vs[static_cast<std::size_t>(i)] = p.V;
        if (i % opt_.crosscheck_stride == 0) {
            const LD gs = gaver_stehfest<LD>([&](LD s) { return LD(1) / static_cast<LD>(chi(static_cast<double>(s))); },
                                             static_cast<LD>(x), weights);
            tab->gap = std::max(tab->gap, static_cast<double>(std::fabs(gs / static_cast<LD>(p.v) - 1)));
        }
    }
    tab->v = LogLogTable(xs, vs);
    tab->V = LogLogTable(xs, Vs);

    // Laplace consistency of the cached density against 1/chi.
    for (double lam : {0.1, 1.0, 10.0, 100.0}) {
        auto g = [&](double w) {
            const double x = std::exp(w);
            return std::exp(-lam * x) * tab->v(x) * x;
        };
        // below the first node the weight e^{-lam x} is 1 to within lam x0, so that piece is V(x0)
        const double x0 = opt_.table_lo;
        const double lo = std::log(x0), hi = std::log(opt_.table_hi);
        std::vector<double> pts;
        for (double w = lo; w < hi; w += 4) pts.push_back(w);
        pts.push_back(hi);
        const double transform = tab->V(x0) +
            integrate_pieces<double>(g, pts, QuadOptions{1e-16, 1e-10, 4000}, "ladder Laplace check");
        tab->residual = std::max(tab->residual, std::fabs(transform * chi(lam) - 1));
    }
    if (!(tab->residual <= opt_.laplace_tolerance)) {
        std::ostringstream msg;
        msg << "ladder potential density for " << family_.describe()
            << " fails the Laplace consistency check; residual " << tab->residual;
        throw InversionError(msg.str(), tab->residual);
    }
    return tab;
}

LadderPotential LadderData::potential(double x) const {
    if (!(x > 0)) throw std::domain_error("ladder potential requires x > 0");
    if (family_.kind() == Family::Stable) {
        const double a = alpha() / 2;
        return {std::pow(x, a) / std::tgamma(1 + a), std::pow(x, a - 1) / std::tgamma(a)};
    }
    if (x > opt_.table_hi || x < opt_.table_lo) return invert_potential(x);
    const Table& t = table();
    return {t.V(x), t.v(x)};
}

double LadderData::crosscheck_gap() const {
    return family_.kind() == Family::Stable ? 0.0 : table().gap;
}

double LadderData::laplace_residual() const {
    return family_.kind() == Family::Stable ? 0.0 : table().residual;
}

double chi(const LadderData& ladder, double lambda) { return ladder.chi(lambda); }
double rho(const LadderData& ladder, double lambda) { return ladder.rho(lambda); }
LadderPotential ladder_potential(const LadderData& ladder, double x) { return ladder.potential(x); }

namespace {

// int_0^{len} v(z) v(gap + z) dz with z = s^{2/alpha}, which absorbs the
// z^{alpha/2 - 1} singularity of v at 0.
double convolve_v(const LadderData& ladder, double gap, double len) {
    const double alpha = ladder.alpha();
    const double p = 2 / alpha;
    auto g = [&](double s) {
        if (s <= 0) s = std::numeric_limits<double>::min();
        const double z = std::pow(s, p);
        return ladder.potential(z).v * ladder.potential(gap + z).v * p * std::pow(s, p - 1);
    };
    // Below the cached table v would be re-inverted at every node. There v(gap + z) is flat when the
    // gap is wide, and v(z)^2 is a pure power otherwise, so that stretch is done in closed form.
    double z0 = 0, head = 0;
    if (ladder.family().kind() != Family::Stable && len > 2 * ladder.options().table_lo) {
        z0 = ladder.options().table_lo;
        const LadderPotential at = ladder.potential(z0);
        if (gap >= 1e3 * z0)
            head = at.V * ladder.potential(gap + z0 / 2).v;
        else if (gap == 0)
            head = at.v * at.v * z0 / (alpha - 1);
        else
            z0 = 0;
    }
    const double bottom = std::pow(z0, alpha / 2), top = std::pow(len, alpha / 2);
    std::vector<double> pts{bottom, top};
    if (gap > 0) {
        const double knee = std::pow(gap, alpha / 2);
        for (double k = knee * 1e-3; k < top; k *= 4)
            if (k > bottom) pts.push_back(k);
    }
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    return head + integrate_pieces<double>(g, pts, QuadOptions{1e-15, 1e-11, 4000}, "half-line Green function");
}

}  // namespace

double halfline_green(const LadderData& ladder, double x, double y) {
    if (!(x > 0) || !(y > 0)) throw std::domain_error("halfline_green requires x, y > 0");
    if (x == y && ladder.alpha() <= 1) return std::numeric_limits<double>::infinity();
    if (x <= y) return convolve_v(ladder, y - x, x);
    // z runs over (x - y, x); shift so the singular endpoint sits at 0.
    return convolve_v(ladder, x - y, y);
}

IntervalExitBound interval_exit_bound(const LadderData& ladder, double r, double x) {
    if (!(r > 0) || !(x > 0) || !(x < r)) throw std::domain_error("interval_exit_bound requires 0 < x < r");
    const double Vr = ladder.potential(r).V;
    const double Vx = ladder.potential(x).V;
    const double Vrx = ladder.potential(r - x).V;
    return {2 * Vr * Vx, 2 * Vr * std::min(Vx, Vrx)};
}

VerificationReport verify_special_identity(const LadderData& ladder, double lambda_lo, double lambda_hi,
                                           int points, double tolerance) {
    VerificationReport rep;
    rep.theorem_tag = "ladder_special_identity";
    rep.info["family"] = ladder.family().describe();
    std::vector<double> lam, c, r, prod;
    double worst = 0;
    for (int i = 0; i < points; ++i) {
        const double l = lambda_lo * std::pow(lambda_hi / lambda_lo, static_cast<double>(i) / (points - 1));
        const double ch = ladder.chi(l), rh = ladder.rho(l);
        lam.push_back(l);
        c.push_back(ch);
        r.push_back(rh);
        prod.push_back(ch * rh / l);
        worst = std::max(worst, std::fabs(ch * rh / l - 1));
    }
    rep.series["lambda"] = lam;
    rep.series["chi"] = c;
    rep.series["rho"] = r;
    rep.series["product_over_lambda"] = prod;
    rep.constants["max_deviation"] = worst;
    rep.constants["tolerance"] = tolerance;
    std::ostringstream grid;
    grid << "lambda in [" << lambda_lo << ", " << lambda_hi << "], " << points << " log-spaced points";
    rep.add("chi(lambda) rho(lambda) = lambda", grid.str(), worst, worst < tolerance);
    return rep;
}

VerificationReport verify_ladder_limit(const LadderData& ladder, const std::vector<double>& lambdas,
                                       double tolerance) {
    VerificationReport rep;
    rep.theorem_tag = "ladder_exponent_limit";
    rep.info["family"] = ladder.family().describe();
    const double a = ladder.alpha() / 2;
    std::vector<double> ratios;
    for (double l : lambdas) {
        const double pred = std::pow(l, a) * std::sqrt(ell(ladder.family(), l * l));
        ratios.push_back(ladder.chi(l) / pred);
    }
    rep.series["lambda"] = lambdas;
    rep.series["ratio"] = ratios;
    const double last = std::fabs(ratios.back() - 1);
    rep.constants["deviation_at_largest_lambda"] = last;
    rep.constants["tolerance"] = tolerance;
    std::ostringstream grid;
    grid << "lambda = " << lambdas.back();
    rep.add("chi(lambda) ~ lambda^(alpha/2) ell(lambda^2)^(1/2)", grid.str(), last, last < tolerance);
    return rep;
}

}  // namespace sbmkit
