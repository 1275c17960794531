#include "sbmkit/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace sbmkit {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

KernelEvaluator::KernelEvaluator(SubordinatorModel model, int d, KernelOptions opt)
    : model_(std::move(model)), d_(d), opt_(opt) {
    if (d < 2) throw std::invalid_argument("kernels require dimension d >= 2");
    const double a = model_.alpha();
    if (d == 2) {
        AssumptionOptions ao;
        ao.dimension = 2;
        const auto rep = check_A1_A4(model_, ao);
        const Check* a1 = rep.checks.empty() ? nullptr : &rep.checks.front();
        if (!a1 || !a1->pass) {
            std::ostringstream msg;
            msg << "dimension 2 requires a transient process (u(t) ~ c t^(gamma-1) with gamma < 1); "
                << model_.family().describe() << " has fitted gamma " << (a1 ? a1->constant : 1.0);
            throw std::invalid_argument(msg.str());
        }
    }
    const double dd = d;
    green_const_ = a * std::tgamma((dd - a) / 2) /
                   (std::pow(2.0, a + 1) * std::pow(kPi, dd / 2) * std::tgamma(1 + a / 2));
    jump_const_ = a * std::tgamma((dd + a) / 2) /
                  (std::pow(2.0, 1 - a) * std::pow(kPi, dd / 2) * std::tgamma(1 - a / 2));
    if (!model_.u_closed_form()) u_table_ = model_.tabulate_u(opt_.table_lo, opt_.table_hi, opt_.per_decade);
    if (!model_.mu_closed_form()) mu_table_ = model_.tabulate_mu(opt_.table_lo, opt_.table_hi, opt_.per_decade);
}

double KernelEvaluator::u(double t) const { return u_table_ ? (*u_table_)(t) : model_.potential_density(t); }
double KernelEvaluator::mu(double t) const { return mu_table_ ? (*mu_table_)(t) : model_.levy_density(t); }

double KernelEvaluator::subordinate(double r, bool levy, const QuadOptions& quad) const {
    if (!(r > 0)) throw std::domain_error("kernel evaluation requires r > 0");
    // t = r^2 / (4 s):  int (4 pi t)^{-d/2} e^{-r^2/4t} f(t) dt
    //                 = pi^{-d/2} r^{2-d} / 4 * int s^{d/2-1} e^{-s} f(r^2/(4s)) d(log s)
    const double half_d = d_ / 2.0;
    const double r2 = r * r;
    auto g = [&](double w) {
        const double s = std::exp(w);
        const double t = r2 / (4 * s);
        const double f = levy ? mu(t) : u(t);
        return std::exp((half_d - 1) * w - s) * f;
    };
    // Small s is large t, where u(t) <~ t^{gamma-1} and mu decays faster.
    const double decay = levy ? half_d : std::max(half_d - std::min(model_.gamma_a1(), 1.0), 0.05);
    const double w_lo = std::max(-600.0, -60.0 / decay);
    const double w_hi = std::log(800.0);
    std::vector<double> pts;
    for (double w = w_lo; w < w_hi; w += 5) pts.push_back(w);
    pts.push_back(w_hi);
    const double integral = integrate_pieces<double>(g, pts, quad, levy ? "jump kernel" : "Green function");
    return integral * std::pow(kPi, -half_d) * std::pow(r, 2 - d_) / 4;
}

double KernelEvaluator::green(double r) const { return subordinate(r, false, opt_.quad); }
double KernelEvaluator::jump(double r) const { return subordinate(r, true, opt_.quad); }
double KernelEvaluator::green(double r, const QuadOptions& quad) const { return subordinate(r, false, quad); }
double KernelEvaluator::jump(double r, const QuadOptions& quad) const { return subordinate(r, true, quad); }

double KernelEvaluator::green_predicted(double r) const {
    return green_const_ / (std::pow(r, d_ - alpha()) * ell(model_.family(), 1 / (r * r)));
}

double KernelEvaluator::jump_predicted(double r) const {
    return jump_const_ * ell(model_.family(), 1 / (r * r)) / std::pow(r, d_ + alpha());
}

double green_free(const KernelEvaluator& ke, const std::vector<double>& x) {
    if (static_cast<int>(x.size()) != ke.dimension())
        throw std::invalid_argument("green_free: point has the wrong dimension");
    const double r = std::sqrt(std::inner_product(x.begin(), x.end(), x.begin(), 0.0));
    if (!(r > 0)) throw std::domain_error("green_free requires x != 0");
    return ke.green(r);
}

double jump_kernel(const KernelEvaluator& ke, double r) { return ke.jump(r); }

VerificationReport check_lemma_lJ(const KernelEvaluator& ke, const std::vector<double>& r_grid) {
    VerificationReport rep;
    rep.theorem_tag = "jump_kernel_two_sided_bound";
    rep.info["family"] = ke.model().family().describe();
    rep.constants["dimension"] = ke.dimension();
    std::vector<double> rs = r_grid;
    std::sort(rs.begin(), rs.end());
    const double lo = ke.jump_const() / 2, hi = 2 * ke.jump_const();
    std::vector<double> normalized;
    double r3 = 0;
    bool holding = true;
    for (double r : rs) {
        if (!(r > 0 && r <= 1)) throw std::invalid_argument("check_lemma_lJ: radii must lie in (0, 1]");
        const double q = ke.jump(r) * std::pow(r, ke.dimension() + ke.alpha()) / ell(ke.model().family(), 1 / (r * r));
        normalized.push_back(q);
        holding = holding && q >= lo && q <= hi;
        if (holding) r3 = r;
    }
    rep.series["r"] = rs;
    rep.series["normalized_jump"] = normalized;
    rep.constants["lower_constant"] = lo;
    rep.constants["upper_constant"] = hi;
    rep.constants["r3"] = r3;
    std::ostringstream grid;
    grid << "r in [" << rs.front() << ", " << rs.back() << "], " << rs.size() << " points";
    rep.add("two-sided jump kernel bound holds for r <= r3, r3 > 0", grid.str(), r3, r3 > 0);
    return rep;
}

VerificationReport verify_kernel_asymptotics(const KernelEvaluator& ke, const std::vector<double>& radii,
                                             double tolerance) {
    VerificationReport rep;
    rep.theorem_tag = "kernel_small_distance_asymptotics";
    rep.info["family"] = ke.model().family().describe();
    rep.constants["dimension"] = ke.dimension();
    rep.constants["green_const"] = ke.green_const();
    rep.constants["jump_const"] = ke.jump_const();
    std::vector<double> rs = radii;
    std::sort(rs.rbegin(), rs.rend());  // decreasing r
    std::vector<double> g, gp, gr, j, jp, jr;
    for (double r : rs) {
        g.push_back(ke.green(r));
        gp.push_back(ke.green_predicted(r));
        gr.push_back(g.back() / gp.back());
        j.push_back(ke.jump(r));
        jp.push_back(ke.jump_predicted(r));
        jr.push_back(j.back() / jp.back());
    }
    rep.series["r"] = rs;
    rep.series["green"] = g;
    rep.series["green_predicted"] = gp;
    rep.series["green_ratio"] = gr;
    rep.series["jump"] = j;
    rep.series["jump_predicted"] = jp;
    rep.series["jump_ratio"] = jr;
    std::ostringstream grid;
    grid << "r in {";
    for (std::size_t i = 0; i < rs.size(); ++i) grid << (i ? ", " : "") << rs[i];
    grid << "}";
    auto approach = [&](const std::vector<double>& ratio, const std::string& name) {
        const double last = std::fabs(ratio.back() - 1);
        bool monotone = true;
        for (std::size_t i = 1; i < ratio.size(); ++i)
            monotone = monotone && std::fabs(ratio[i] - 1) <= std::fabs(ratio[i - 1] - 1) + 1e-9;
        rep.constants[name + "_ratio_smallest_r"] = ratio.back();
        rep.add(name + " ratio to prediction within tolerance at smallest r", grid.str(), ratio.back(),
                last <= tolerance);
        rep.add(name + " ratio approaches 1 monotonically as r decreases", grid.str(), last, monotone);
    };
    approach(gr, "green");
    approach(jr, "jump");
    return rep;
}

// ---------------------------------------------------------------------------

namespace {

using LD = long double;

enum class Regvar { IncHalf, IncComp, IncCompEll, TailHalf, HeadHalf, TailFull, HeadFull, HeadInverse };

struct RegvarSpec {
    Regvar kind;
    const char* name;
    const char* statement;
};

const RegvarSpec kRegvar[] = {
    {Regvar::IncHalf, "power_half_over_ell", "s^(a/2) / L(s)^(1/2) <= C r^(a/2) / L(r)^(1/2)"},
    {Regvar::IncComp, "power_complement_over_ell", "s^(1-a/2) / L(s)^(1/2) <= C r^(1-a/2) / L(r)^(1/2)"},
    {Regvar::IncCompEll, "power_complement_times_ell", "s^(1-a/2) L(s)^(1/2) <= C r^(1-a/2) L(r)^(1/2)"},
    {Regvar::TailHalf, "tail_integral_half", "int_r^inf L(s)^(1/2) / s^(1+a/2) ds <= C L(r)^(1/2) / r^(a/2)"},
    {Regvar::HeadHalf, "head_integral_half", "int_0^r L(s)^(1/2) / s^(a/2) ds <= C L(r)^(1/2) r^(1-a/2)"},
    {Regvar::TailFull, "tail_integral_full", "int_r^inf L(s) / s^(1+a) ds <= C L(r) / r^a"},
    {Regvar::HeadFull, "head_integral_full", "int_0^r L(s) s^(1-a) ds <= C L(r) r^(2-a)"},
    {Regvar::HeadInverse, "head_integral_inverse", "int_0^r s^(a-1) / L(s) ds <= C r^a / L(r)"},
};

// log L(s) with L(s) = ell(s^-2), from log s.
LD log_L(const BernsteinFamily& f, LD log_s) { return f.log_ell(std::exp(-2 * log_s)); }

// Log of the integrand g(s) and of the right-hand side h(r) for the integral
// inequalities; the monotone ones use the same h as the function compared.
LD log_g(const BernsteinFamily& f, Regvar k, LD ls) {
    const LD a = static_cast<LD>(f.alpha());
    const LD L = log_L(f, ls);
    switch (k) {
        case Regvar::TailHalf: return L / 2 - (1 + a / 2) * ls;
        case Regvar::HeadHalf: return L / 2 - (a / 2) * ls;
        case Regvar::TailFull: return L - (1 + a) * ls;
        case Regvar::HeadFull: return L + (1 - a) * ls;
        case Regvar::HeadInverse: return (a - 1) * ls - L;
        default: return 0;
    }
}

LD log_h(const BernsteinFamily& f, Regvar k, LD lr) {
    const LD a = static_cast<LD>(f.alpha());
    const LD L = log_L(f, lr);
    switch (k) {
        case Regvar::IncHalf: return (a / 2) * lr - L / 2;
        case Regvar::IncComp: return (1 - a / 2) * lr - L / 2;
        case Regvar::IncCompEll: return (1 - a / 2) * lr + L / 2;
        case Regvar::TailHalf: return L / 2 - (a / 2) * lr;
        case Regvar::HeadHalf: return L / 2 + (1 - a / 2) * lr;
        case Regvar::TailFull: return L - a * lr;
        case Regvar::HeadFull: return L + (2 - a) * lr;
        case Regvar::HeadInverse: return a * lr - L;
    }
    return 0;
}

bool is_tail(Regvar k) { return k == Regvar::TailHalf || k == Regvar::TailFull; }
bool is_integral(Regvar k) { return k != Regvar::IncHalf && k != Regvar::IncComp && k != Regvar::IncCompEll; }

// LHS(r) / RHS(r) for the integral inequalities, integrating in w = log(s/r).
double integral_ratio(const BernsteinFamily& f, Regvar k, double r) {
    const LD lr = std::log(static_cast<LD>(r));
    const LD lh = log_h(f, k, lr);
    auto g = [&](LD w) { return std::exp(log_g(f, k, lr + w) + lr + w - lh); };
    const LD span = 5000;
    std::vector<LD> pts;
    const bool tail = is_tail(k);
    for (LD w = 0; w <= span; w += (w < 100 ? 5 : 100)) pts.push_back(tail ? w : -w);
    if (!tail) std::reverse(pts.begin(), pts.end());
    const QuadOptions quad{1e-15, 1e-12, 4000};
    return static_cast<double>(integrate_pieces<LD>(g, pts, quad, "regular-variation integral"));
}

std::vector<double> regvar_constants(const BernsteinFamily& f, double r4, double r_min, int points) {
    const double r_max = 4 * r4;
    std::vector<double> rs(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i) rs[static_cast<std::size_t>(i)] = r_min * std::pow(r_max / r_min, static_cast<double>(i) / (points - 1));
    std::vector<double> out;
    for (const auto& spec : kRegvar) {
        double c = 0;
        if (is_integral(spec.kind)) {
            for (double r : rs) c = std::max(c, integral_ratio(f, spec.kind, r));
        } else {
            // sup over s <= r of h(s) / h(r), with s ranging over the grid.
            LD running = -std::numeric_limits<LD>::infinity();
            for (double r : rs) {
                const LD lh = log_h(f, spec.kind, std::log(static_cast<LD>(r)));
                running = std::max(running, lh);
                c = std::max(c, static_cast<double>(std::exp(running - lh)));
            }
        }
        out.push_back(c);
    }
    return out;
}

}  // namespace

const std::vector<std::string>& regvar_inequality_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> n;
        for (const auto& s : kRegvar) n.emplace_back(s.name);
        return n;
    }();
    return names;
}

VerificationReport check_regvar_inequalities(const BernsteinFamily& family, double r4, const RegvarOptions& opt) {
    if (!(r4 > 0 && r4 <= 1)) throw std::invalid_argument("r4 must lie in (0, 1]");
    VerificationReport rep;
    rep.theorem_tag = "regular_variation_inequalities";
    rep.info["family"] = family.describe();
    rep.constants["r4"] = r4;
    const auto coarse = regvar_constants(family, r4, opt.r_min, opt.points);
    const auto fine = regvar_constants(family, r4, opt.r_min, 2 * opt.points - 1);
    std::ostringstream grid;
    grid << "0 < s < r <= " << 4 * r4 << ", r log-spaced from " << opt.r_min << " (" << opt.points << " and "
         << 2 * opt.points - 1 << " points)";
    for (std::size_t i = 0; i < coarse.size(); ++i) {
        const std::string name = kRegvar[i].name;
        const double change = std::fabs(fine[i] / coarse[i] - 1);
        rep.constants[name + "_C"] = fine[i];
        rep.constants[name + "_C_coarse"] = coarse[i];
        rep.constants[name + "_refinement_change"] = change;
        const bool ok = std::isfinite(fine[i]) && fine[i] > 0 && change <= opt.stability;
        auto& c = rep.add(kRegvar[i].statement, grid.str(), fine[i], ok);
        c.note = "L(s) = ell(s^-2), a = alpha; " + name;
    }
    return rep;
}

double default_r4(const BernsteinFamily& family, const RegvarOptions& opt) {
    for (double r4 = 1.0; r4 > 1e-6; r4 /= 2) {
        const auto cs = regvar_constants(family, r4, std::min(opt.r_min, r4 / 10), opt.points);
        bool ok = true;
        for (double c : cs) ok = ok && std::isfinite(c) && c <= opt.c_max;
        if (ok) return r4;
    }
    return 0.0;
}

}  // namespace sbmkit
