#include "sbmkit/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <boost/math/special_functions/beta.hpp>

#include "sbmkit/quadrature.hpp"

namespace sbmkit {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kInf = std::numeric_limits<double>::infinity();

double unit_ball_volume(int d) { return std::pow(kPi, d / 2.0) / std::tgamma(d / 2.0 + 1); }

Point axis(int k, double scale) {
    Point p{0, 0, 0};
    p[k] = scale;
    return p;
}

std::string fmt(double v) {
    std::ostringstream s;
    s << v;
    return s.str();
}

std::string radii_text(const std::vector<double>& r) {
    std::ostringstream s;
    s << "r in {";
    for (std::size_t i = 0; i < r.size(); ++i) s << (i ? ", " : "") << r[i];
    s << "}";
    return s.str();
}

void require_stable_ball_args(double alpha, int d, double r) {
    if (!(alpha > 0 && alpha < 2)) throw std::invalid_argument("alpha must lie in (0, 2)");
    if (d < 1) throw std::invalid_argument("dimension must be positive");
    if (!(r > 0)) throw std::invalid_argument("radius must be positive");
}

// Lattice directions used to lay out sample points near a boundary point.
std::vector<Point> layout_directions(int d) {
    std::vector<Point> out;
    const int m = d == 3 ? 1 : 2;
    const int k2 = d >= 2 ? m : 0, k3 = d >= 3 ? m : 0;
    for (int a = -m; a <= m; ++a)
        for (int b = -k2; b <= k2; ++b)
            for (int c = -k3; c <= k3; ++c) {
                if (a == 0 && b == 0 && c == 0) continue;
                if (std::gcd(std::gcd(std::abs(a), std::abs(b)), std::abs(c)) != 1) continue;
                Point p{double(a), double(b), double(c)};
                const double n = norm(p);
                out.push_back({p[0] / n, p[1] / n, p[2] / n});
            }
    return out;
}

// Points Q + rho u in D with distance to the complement at least min_dist,
// thinned to at most max_points.
std::vector<Point> boundary_grid(const Domain& domain, const Point& q, const std::vector<double>& rhos,
                                 double min_dist, double max_norm, std::size_t max_points) {
    std::vector<Point> all;
    for (double rho : rhos)
        for (const auto& u : layout_directions(domain.dimension())) {
            const Point x = add(q, u, rho);
            if (domain.contains(x) && domain.distance_to_boundary(x) >= min_dist && distance(x, q) < max_norm)
                all.push_back(x);
        }
    if (all.size() <= max_points) return all;
    std::vector<Point> out;
    for (std::size_t i = 0; i < max_points; ++i) out.push_back(all[i * all.size() / max_points]);
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------

double stable_ball_exit_time(double alpha, int d, double r, double x_norm) {
    require_stable_ball_args(alpha, d, r);
    if (!(x_norm >= 0 && x_norm < r)) throw std::domain_error("x must lie in the ball");
    return std::pow(r * r - x_norm * x_norm, alpha / 2) * std::tgamma(d / 2.0) /
           (std::pow(2.0, alpha) * std::tgamma(1 + alpha / 2) * std::tgamma((d + alpha) / 2));
}

double stable_ball_green(double alpha, int d, double r, const Point& x, const Point& y) {
    require_stable_ball_args(alpha, d, r);
    if (!(d > alpha)) throw std::domain_error("ball Green function formula needs d > alpha");
    const double xx = norm(x), yy = norm(y), q = distance(x, y);
    if (!(xx < r && yy < r)) return 0.0;
    if (!(q > 0)) return kInf;
    const double a = alpha / 2, b = d / 2.0 - a;
    const double w = (r * r - xx * xx) * (r * r - yy * yy) / (r * r * q * q);
    const double kappa = std::tgamma(d / 2.0) / (std::pow(2.0, alpha) * std::pow(kPi, d / 2.0) *
                                                 std::tgamma(a) * std::tgamma(a));
    // int_0^w s^{a-1} (1+s)^{-d/2} ds = B(w / (1 + w); a, d/2 - a)
    return kappa * std::pow(q, alpha - d) * boost::math::beta(a, b, w / (1 + w));
}

double stable_ball_poisson_kernel(double alpha, int d, double r, const Point& x, const Point& y) {
    require_stable_ball_args(alpha, d, r);
    const double xx = norm(x), yy = norm(y);
    if (!(xx < r) || !(yy > r)) return 0.0;
    const double c = std::tgamma(d / 2.0) * std::pow(kPi, -d / 2.0 - 1) * std::sin(kPi * alpha / 2);
    return c * std::pow((r * r - xx * xx) / (yy * yy - r * r), alpha / 2) * std::pow(distance(x, y), -d);
}

double stable_ball_martin_kernel(double alpha, int d, double r, const Point& x, const Point& z) {
    require_stable_ball_args(alpha, d, r);
    const double xx = norm(x);
    if (!(xx < r)) return 0.0;
    return std::pow(r * r - xx * xx, alpha / 2) / std::pow(distance(x, z), d);
}

double time_scale(const SubordinatorModel& model, double r) { return 1 / model.phi(1 / (r * r)); }

PathConfig path_config_for(const SubordinatorModel& model, double r, const McOptions& mc) {
    const double ts = time_scale(model, r);
    PathConfig cfg;
    cfg.dt = mc.dt_scale * ts;
    cfg.t_max = 1e4 * ts;
    cfg.seed = mc.seed;
    cfg.refine_levels = mc.refine_levels;
    cfg.adaptive = mc.adaptive;
    cfg.dt_max = mc.adaptive > 0 ? std::max(cfg.dt, mc.dt_max_scale * ts) : 0.0;
    cfg.eps_jump = std::min(1e-10, 1e-4 * cfg.dt * cfg.dt);
    return cfg;
}

Trend fit_trend(const std::vector<double>& r, const std::vector<double>& c) {
    if (r.size() != c.size() || r.size() < 2) throw std::invalid_argument("fit_trend needs two or more points");
    Trend t;
    double mx = 0, my = 0;
    const double n = double(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (!(c[i] > 0) || !std::isfinite(c[i])) return {kInf, kInf};
        mx += std::log(r[i]) / n;
        my += std::log(c[i]) / n;
    }
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < r.size(); ++i) {
        const double dx = std::log(r[i]) - mx;
        sxy += dx * (std::log(c[i]) - my);
        sxx += dx * dx;
    }
    t.slope = sxy / sxx;
    t.spread = *std::max_element(c.begin(), c.end()) / *std::min_element(c.begin(), c.end());
    return t;
}

// ---------------------------------------------------------------------------

std::vector<ExitTimeRow> estimate_exit_time(const PathSimulator& sim, const Domain& domain,
                                            const std::vector<Point>& x_grid, std::size_t n,
                                            std::uint64_t seed, int workers) {
    std::vector<ExitTimeRow> rows;
    for (std::size_t k = 0; k < x_grid.size(); ++k) {
        const auto exits = simulate_exits(sim, domain, x_grid[k], n, derive_seed(seed, "exit-time/" + std::to_string(k)),
                                          workers);
        std::vector<double> t(n);
        double steps = 0;
        for (std::size_t i = 0; i < n; ++i) {
            t[i] = exits[i].exit_time;
            steps += double(exits[i].steps);
        }
        const MeanSE m = mean_se(t);
        rows.push_back({x_grid[k], m.mean, m.se, n, steps / double(n)});
    }
    return rows;
}

VerificationReport verify_exit_time_oracle(const SubordinatorModel& model, const ExitOracleOptions& opt) {
    const Domain ball = Domain::ball(opt.d, opt.radius);
    if (!ball.contains(opt.x)) throw std::invalid_argument("start point must lie in the ball");
    PathConfig cfg;
    cfg.dt = opt.dt;
    cfg.t_max = 1e4 * time_scale(model, opt.radius);
    cfg.seed = opt.seed;
    cfg.refine_levels = opt.refine_levels;
    cfg.eps_jump = std::min(cfg.eps_jump, 1e-4 * opt.dt * opt.dt);
    PathSimulator sim(model, cfg);
    const std::size_t n = opt.paths;
    const std::uint64_t seed = derive_seed(opt.seed, "exit-time-oracle");
    std::vector<double> coarse(n), fine(n), diff(n), steps(n);
    parallel_for(n, opt.workers, [&](std::size_t i) {
        RandomStream rng(seed, i);
        if (opt.coupled) {
            const ExitPair p = sim.run_coupled(ball, opt.x, rng);
            coarse[i] = p.coarse.exit_time;
            fine[i] = p.fine.exit_time;
            steps[i] = double(p.fine.steps);
        } else {
            const ExitRecord r = sim.run(ball, opt.x, rng);
            coarse[i] = r.exit_time;
            steps[i] = double(r.steps);
        }
        diff[i] = fine[i] - coarse[i];
    });
    VerificationReport rep;
    rep.theorem_tag = "exit_time_oracle";
    rep.info["family"] = model.family().describe();
    rep.info["domain"] = "ball";
    rep.constants["dimension"] = opt.d;
    rep.constants["radius"] = opt.radius;
    rep.constants["dt"] = opt.dt;
    rep.constants["paths"] = double(n);
    const MeanSE mc = mean_se(coarse), ms = mean_se(steps);
    rep.constants["mean"] = mc.mean;
    rep.constants["se"] = mc.se;
    rep.constants["mean_steps"] = ms.mean;
    rep.mc_se = mc.se / mc.mean;
    std::ostringstream grid;
    grid << "x = (" << opt.x[0] << ", " << opt.x[1] << ", " << opt.x[2] << "), r = " << opt.radius << ", dt = " << opt.dt
         << ", N = " << n;
    const bool stable = model.family().kind() == Family::Stable;
    if (stable) {
        const double exact = stable_ball_exit_time(model.alpha(), opt.d, opt.radius, norm(opt.x));
        const double band = std::max(3 * mc.se, opt.rel_tol * exact);
        rep.constants["exact"] = exact;
        rep.constants["band"] = band;
        rep.add("mean exit time matches the closed form within max(3 SE, " + fmt(opt.rel_tol) + " relative)",
                grid.str(), mc.mean - exact, std::fabs(mc.mean - exact) <= band);
    }
    if (opt.coupled) {
        const MeanSE mf = mean_se(fine), md = mean_se(diff);
        rep.constants["mean_half_dt"] = mf.mean;
        rep.constants["se_half_dt"] = mf.se;
        rep.constants["halving_change"] = md.mean;
        rep.constants["halving_change_se"] = md.se;
        rep.add("halving dt changes the estimate by less than 1 SE", grid.str(), md.mean / mc.se,
                std::fabs(md.mean) < mc.se);
    }
    if (!stable && !opt.coupled) rep.add("mean exit time is finite and positive", grid.str(), mc.mean, mc.mean > 0);
    return rep;
}

VerificationReport verify_exit_time_envelopes(const SubordinatorModel& model, const EnvelopeOptions& opt) {
    if (opt.radii.size() < 2) throw std::invalid_argument("envelope check needs at least two radii");
    const double a = model.alpha();
    VerificationReport rep;
    rep.theorem_tag = "exit_time_envelopes";
    rep.info["family"] = model.family().describe();
    rep.constants["dimension"] = opt.d;
    std::vector<double> upper, lower, se_rel;
    for (double r : opt.radii) {
        const Domain ball = Domain::ball(opt.d, r);
        PathSimulator sim(model, path_config_for(model, r, opt.mc));
        std::vector<Point> xs;
        for (double f : opt.fractions) xs.push_back(axis(0, f * r));
        const auto rows = estimate_exit_time(sim, ball, xs, opt.mc.paths, derive_seed(opt.mc.seed, "r=" + fmt(r)),
                                             opt.mc.workers);
        double cu = 0;
        std::vector<double> means;
        for (const auto& row : rows) {
            const double gap = r - norm(row.x);
            const double env = std::pow(r, a / 2) * std::pow(gap, a / 2) /
                               std::sqrt(model.ell(1 / (r * r)) * model.ell(1 / (gap * gap)));
            cu = std::max(cu, row.mean / env);
            means.push_back(row.mean);
            rep.series["mean_r=" + fmt(r)].push_back(row.mean);
            rep.series["se_r=" + fmt(r)].push_back(row.se);
            se_rel.push_back(row.se / row.mean);
        }
        // x = 0 is the first grid point when fractions starts at 0; use the smallest |x|.
        const auto centre = std::min_element(rows.begin(), rows.end(),
                                             [](const auto& p, const auto& q) { return norm(p.x) < norm(q.x); });
        lower.push_back(centre->mean / (std::pow(r, a) / model.ell(1 / (r * r))));
        upper.push_back(cu);
        bool monotone = true;
        for (std::size_t k = 1; k < rows.size(); ++k)
            monotone = monotone && rows[k].mean <= rows[k - 1].mean + 3 * std::hypot(rows[k].se, rows[k - 1].se);
        rep.add("mean exit time decreases toward the boundary (within 3 SE)", "r = " + fmt(r), 0.0, monotone);
    }
    rep.series["r"] = opt.radii;
    rep.series["upper_constant"] = upper;
    rep.series["lower_constant"] = lower;
    const Trend tu = fit_trend(opt.radii, upper), tl = fit_trend(opt.radii, lower);
    const double c_up = *std::max_element(upper.begin(), upper.end());
    const double c_lo = *std::min_element(lower.begin(), lower.end());
    rep.constants["upper_C"] = c_up;
    rep.constants["lower_C"] = c_lo;
    rep.constants["upper_slope"] = tu.slope;
    rep.constants["lower_slope"] = tl.slope;
    rep.constants["upper_spread"] = tu.spread;
    rep.constants["lower_spread"] = tl.spread;
    rep.mc_se = *std::max_element(se_rel.begin(), se_rel.end());
    const std::string grid = radii_text(opt.radii) + ", |x|/r on the x grid";
    rep.add("E_x tau_B(0,r) <= C r^(a/2) (r-|x|)^(a/2) / (ell(r^-2) ell((r-|x|)^-2))^(1/2)", grid, c_up,
            std::isfinite(c_up) && c_up > 0);
    rep.add("upper constant has no trend in r", grid, tu.slope,
            std::fabs(tu.slope) <= opt.max_slope && tu.spread <= opt.max_spread);
    rep.add("E_0 tau_B(0,r) >= C r^a / ell(r^-2) with C > 0", grid, c_lo, c_lo > 0 && std::isfinite(c_lo));
    rep.add("lower constant has no trend in r", grid, tl.slope,
            std::fabs(tl.slope) <= opt.max_slope && tl.spread <= opt.max_spread);
    return rep;
}

// ---------------------------------------------------------------------------

namespace {

// int over {a < |y| < b} of j(|y - z|) dy with |z| = s.
double shell_jump_mass(const std::function<double(double)>& j, int d, double a, double b, double s) {
    QuadOptions q{1e-300, 1e-10, 2000};
    if (d == 3) {
        auto inner = [&](double rho) {
            if (s < 1e-9 * rho) return 4 * kPi * rho * rho * j(rho);
            const double m = integrate<double>([&](double t) { return t * j(t); }, rho - s, rho + s, q, "shell mass");
            return 2 * kPi * rho / s * m;
        };
        return integrate<double>(inner, a, b, q, "shell mass");
    }
    if (d == 2) {
        auto inner = [&](double rho) {
            const double m = integrate<double>(
                [&](double th) { return j(std::sqrt(rho * rho + s * s - 2 * rho * s * std::cos(th))); }, 0, kPi, q,
                "shell mass");
            return 2 * rho * m;
        };
        return integrate<double>(inner, a, b, q, "shell mass");
    }
    throw std::invalid_argument("shell_jump_mass supports d = 2, 3");
}

// Radial average of f over the shell {a < |y| < b}.
double shell_average(const std::function<double(double)>& f, int d, double a, double b) {
    QuadOptions q{1e-300, 1e-10, 2000};
    const double num = integrate<double>([&](double rho) { return f(rho) * std::pow(rho, d - 1); }, a, b, q, "shell");
    return num / ((std::pow(b, d) - std::pow(a, d)) / d);
}

struct LinearTable {
    double step;
    std::vector<double> v;
    double operator()(double s) const {
        const double u = s / step;
        const std::size_t i = std::min(v.size() - 2, std::size_t(u));
        const double w = u - double(i);
        return v[i] * (1 - w) + v[i + 1] * w;
    }
};

}  // namespace

VerificationReport estimate_poisson_kernel(const KernelEvaluator& ke, const PoissonKernelOptions& opt) {
    const auto& model = ke.model();
    const int d = ke.dimension();
    const double r = opt.radius, a = model.alpha();
    if (d > 3) throw std::invalid_argument("simulation supports d <= 3");
    if (opt.shells.size() < 2 || opt.shells.front() <= 1.0)
        throw std::invalid_argument("shell edges must exceed 1 (in units of the radius) and define a cell");
    const Domain ball = Domain::ball(d, r);
    if (!ball.contains(opt.x)) throw std::invalid_argument("start point must lie in the ball");
    const int cells = int(opt.shells.size()) - 1;

    std::function<double(double)> j;
    std::shared_ptr<LogLogTable> jt;
    if (model.family().kind() == Family::Stable) {
        const double c = ke.jump_const();
        j = [c, d, a](double q) { return c * std::pow(q, -d - a); };
    } else {
        jt = std::make_shared<LogLogTable>([&](double q) { return ke.jump(q); }, 1e-3 * r, 1e2 * r * opt.shells.back(),
                                           16);
        j = [jt](double q) { return (*jt)(q); };
    }

    std::vector<LinearTable> comp_tables;
    const double step = r / (opt.table_points - 1);
    for (int k = 0; k < cells; ++k) {
        LinearTable t{step, {}};
        for (int i = 0; i < opt.table_points; ++i)
            t.v.push_back(shell_jump_mass(j, d, opt.shells[k] * r, opt.shells[k + 1] * r, std::min(i * step, r * (1 - 1e-12))));
        comp_tables.push_back(std::move(t));
    }

    PathSimulator sim(model, path_config_for(model, r, opt.mc));
    const std::size_t n = opt.mc.paths;
    const std::uint64_t seed = derive_seed(opt.mc.seed, "poisson-kernel");
    std::vector<double> comp(n * cells, 0.0), occupation(n, 0.0), tau(n);
    std::vector<int> cell_of(n, -1);
    std::vector<char> jumped(n, 0);
    parallel_for(n, opt.mc.workers, [&](std::size_t i) {
        RandomStream rng(seed, i);
        double* acc = &comp[i * cells];
        double occ = 0;
        const StepObserver obs = [&](const Point& x, double h) {
            const double s = norm(x);
            for (int k = 0; k < cells; ++k) acc[k] += h * comp_tables[k](s);
            occ += h;
        };
        const ExitRecord rec = sim.run(ball, opt.x, rng, &obs);
        occupation[i] = occ;
        tau[i] = rec.exit_time;
        jumped[i] = rec.jumped;
        const double y = norm(rec.exit_point) / r;
        for (int k = 0; k < cells; ++k)
            if (y > opt.shells[k] && y < opt.shells[k + 1]) cell_of[i] = k;
    });

    VerificationReport rep;
    rep.theorem_tag = "poisson_kernel_levy_system";
    rep.info["family"] = model.family().describe();
    rep.info["domain"] = "ball";
    rep.constants["dimension"] = d;
    rep.constants["radius"] = r;
    rep.constants["paths"] = double(n);
    rep.constants["dt"] = sim.config().dt;

    std::size_t n_jumped = 0;
    for (char c : jumped) n_jumped += c;
    const double jumped_fraction = double(n_jumped) / double(n);
    rep.constants["jumped_fraction"] = jumped_fraction;
    if (jumped_fraction < opt.jumped_fraction_warning) {
        std::ostringstream w;
        w << "insufficient jump exits: jumped fraction " << jumped_fraction;
        rep.warnings.push_back(w.str());
    }

    const double lr = model.ell(1 / (r * r));
    const double gap = r - norm(opt.x);
    const double p1_scale = std::pow(r, a / 2) * std::pow(gap, a / 2) / std::sqrt(lr * model.ell(1 / (gap * gap)));
    const double p2_scale = std::pow(r, a) / lr;
    const bool stable = model.family().kind() == Family::Stable;
    double worst_z = 0, c1 = 0, c2 = kInf, max_rel_se = 0;
    bool consistent = true, closed_ok = true;
    std::vector<double> hist(n), diff(n);
    for (int k = 0; k < cells; ++k) {
        const double lo = opt.shells[k] * r, hi = opt.shells[k + 1] * r;
        for (std::size_t i = 0; i < n; ++i) {
            hist[i] = (jumped[i] && cell_of[i] == k) ? 1.0 : 0.0;
            diff[i] = hist[i] - comp[i * cells + k];
        }
        std::vector<double> ck(n);
        for (std::size_t i = 0; i < n; ++i) ck[i] = comp[i * cells + k];
        const MeanSE mh = mean_se(hist), mc = mean_se(ck), md = mean_se(diff);
        const double z = md.se > 0 ? std::fabs(md.mean) / md.se : (md.mean == 0 ? 0.0 : kInf);
        worst_z = std::max(worst_z, z);
        consistent = consistent && z <= 3;
        const double vol = unit_ball_volume(d) * (std::pow(hi, d) - std::pow(lo, d));
        const double density = mh.mean / vol;
        const double j2 = shell_average([&](double rho) { return j(2 * rho); }, d, lo, hi);
        const double j1 = shell_average([&](double rho) { return j(rho - r); }, d, lo, hi);
        c2 = std::min(c2, density / (j2 * p2_scale));
        c1 = std::max(c1, density / (j1 * p1_scale));
        if (mh.mean > 0) max_rel_se = std::max(max_rel_se, mh.se / mh.mean);
        rep.series["inner"].push_back(lo);
        rep.series["outer"].push_back(hi);
        rep.series["histogram"].push_back(mh.mean);
        rep.series["histogram_se"].push_back(mh.se);
        rep.series["compensator"].push_back(mc.mean);
        rep.series["compensator_se"].push_back(mc.se);
        rep.series["difference_se"].push_back(md.se);
        rep.series["density"].push_back(density);
        if (stable && d >= 2) {
            // Cell mass of the closed-form Poisson kernel.
            const Point x = opt.x;
            const double xn = norm(x);
            QuadOptions q{1e-300, 1e-9, 2000};
            auto radial = [&](double rho) {
                if (d == 3) {
                    return integrate<double>(
                        [&](double c) {
                            const Point y{rho * c, rho * std::sqrt(std::max(0.0, 1 - c * c)), 0};
                            return 2 * kPi * rho * rho * stable_ball_poisson_kernel(a, d, r, {xn, 0, 0}, y);
                        },
                        -1, 1, q, "closed-form cell mass");
                }
                return integrate<double>(
                    [&](double th) {
                        const Point y{rho * std::cos(th), rho * std::sin(th), 0};
                        return 2 * rho * stable_ball_poisson_kernel(a, d, r, {xn, 0, 0}, y);
                    },
                    0, kPi, q, "closed-form cell mass");
            };
            const double exact = integrate<double>(radial, lo, hi, q, "closed-form cell mass");
            rep.series["closed_form"].push_back(exact);
            closed_ok = closed_ok && std::fabs(mh.mean - exact) <= 3 * mh.se;
        }
    }
    rep.mc_se = max_rel_se;
    rep.constants["max_abs_z"] = worst_z;
    rep.constants["P1_constant"] = c1;
    rep.constants["P2_constant"] = c2;
    std::ostringstream grid;
    grid << cells << " radial shells in [" << opt.shells.front() << ", " << opt.shells.back() << "] r, N = " << n;
    rep.add("jump-exit histogram equals the compensator sum of int_cell J(y - X_t) dy dt (3 SE per cell)", grid.str(),
            worst_z, consistent);
    rep.add("K_B(x0, y) >= C2 J(2y) r^a / ell(r^-2) with C2 > 0", grid.str(), c2, c2 > 0 && std::isfinite(c2));
    rep.add("K_B(x, y) <= C1 j(|y| - r) r^(a/2) (r-|x|)^(a/2) / (ell ell)^(1/2)", grid.str(), c1,
            std::isfinite(c1) && c1 > 0);
    const MeanSE mt = mean_se(tau), mo = mean_se(occupation);
    rep.constants["mean_exit_time"] = mt.mean;
    rep.constants["occupation_total"] = mo.mean;
    rep.add("occupation density integrates to the mean exit time", grid.str(), mo.mean - mt.mean,
            std::fabs(mo.mean - mt.mean) <= 3 * mt.se + 1e-12 * mt.mean);
    if (stable && d >= 2)
        rep.add("histogram matches the closed-form ball Poisson kernel (3 SE per cell)", grid.str(), 0.0, closed_ok,
                false);
    return rep;
}

// ---------------------------------------------------------------------------

PatchMeasures measure_patches(const PathSimulator& sim, const Domain& domain, const std::vector<Point>& points,
                              const std::function<int(const Point&)>& cell, int cells, std::size_t n,
                              std::uint64_t seed, int workers) {
    PatchMeasures pm;
    pm.points = points;
    for (std::size_t k = 0; k < points.size(); ++k)
        pm.measures.push_back(harmonic_measure(sim, domain, points[k], cell, cells, n,
                                               derive_seed(seed, "point/" + std::to_string(k)), workers));
    return pm;
}

VerificationReport verify_harnack(const SubordinatorModel& model, const HarnackOptions& opt) {
    if (opt.radii.size() < 2) throw std::invalid_argument("Harnack check needs at least two radii");
    const int d = opt.d;
    VerificationReport rep;
    rep.theorem_tag = "harnack_inequality";
    rep.info["family"] = model.family().describe();
    rep.constants["dimension"] = d;
    const int cells = 2 * d;
    std::vector<double> ratios;
    double worst_rel = 0;
    bool symmetric_ok = true;
    for (double r : opt.radii) {
        if (!(r > 0 && r < 1)) throw std::invalid_argument("Harnack radii must lie in (0, 1)");
        const Domain ball = Domain::ball(d, r);
        PathSimulator sim(model, path_config_for(model, r, opt.mc));
        // The shell 1.5 r < |y| < 3 r split into 2d sectors by the dominant coordinate of y.
        auto cell = [&](const Point& y) {
            const double ny = norm(y);
            if (!(ny > 1.5 * r && ny < 3 * r)) return -1;
            int k = 0;
            for (int i = 1; i < d; ++i)
                if (std::fabs(y[i]) > std::fabs(y[k])) k = i;
            return y[k] > 0 ? 2 * k : 2 * k + 1;
        };
        std::vector<Point> pts{{0, 0, 0}};
        for (int k = 0; k < d; ++k) {
            pts.push_back(axis(k, opt.sample_fraction * r));
            pts.push_back(axis(k, -opt.sample_fraction * r));
        }
        const auto pm = measure_patches(sim, ball, pts, cell, cells, opt.mc.paths,
                                        derive_seed(opt.mc.seed, "harnack/r=" + fmt(r)), opt.mc.workers);
        double worst = 1;
        for (int i = 0; i < cells; ++i) {
            double hi = 0, lo = kInf;
            for (const auto& hm : pm.measures) {
                const double p = hm.probability[i];
                hi = std::max(hi, p);
                lo = std::min(lo, p);
                if (p < 10 * hm.se[i] || p == 0) {
                    std::ostringstream w;
                    w << "MC degeneracy at r = " << r << ": cell " << i << " has probability " << p << " < 10 SE";
                    rep.warnings.push_back(w.str());
                }
                if (p > 0) worst_rel = std::max(worst_rel, hm.se[i] / p);
            }
            worst = std::max(worst, lo > 0 ? hi / lo : kInf);
        }
        ratios.push_back(worst);
        const auto& c0 = pm.measures.front();
        symmetric_ok = symmetric_ok &&
                       std::fabs(c0.probability[0] - c0.probability[1]) <= 3 * std::hypot(c0.se[0], c0.se[1]);
    }
    rep.series["r"] = opt.radii;
    rep.series["sup_over_inf"] = ratios;
    const Trend t = fit_trend(opt.radii, ratios);
    const double worst = *std::max_element(ratios.begin(), ratios.end());
    rep.constants["harnack_constant"] = worst;
    rep.constants["slope"] = t.slope;
    rep.constants["spread"] = t.spread;
    rep.mc_se = worst_rel;
    const std::string grid = radii_text(opt.radii) + ", centre and +-" + fmt(opt.sample_fraction) + " r e_k";
    rep.add("sup u / inf u over B(x0, r/2) is finite", grid, worst, std::isfinite(worst));
    rep.add("sup/inf ratio is flat in r (|log-log slope| <= " + fmt(opt.max_abs_slope) + ")", grid, t.slope,
            std::fabs(t.slope) <= opt.max_abs_slope);
    rep.add("symmetric cells have equal harmonic measure at the centre (3 SE)", grid, 0.0, symmetric_ok, false);
    return rep;
}

// ---------------------------------------------------------------------------

double slowly_varying_radius(const BernsteinFamily& family) {
    for (double r = 1.0; r >= 1e-6; r /= 2) {
        bool ok = true;
        for (int i = 0; i <= 40 && ok; ++i) {
            const double rho = r * std::pow(1e-8 / r, i / 40.0);
            const double base = ell(family, 1 / (rho * rho));
            for (int k = -6; k <= 6 && ok; ++k) {
                const double s = rho * std::pow(2.0, k / 2.0);
                const double q = ell(family, 1 / (s * s)) / base;
                ok = q >= 0.5 && q <= 2.0;
            }
        }
        if (ok) return r;
    }
    return 0.0;
}

Point patch_tangent(const Domain& domain, const Point& q) {
    const Point n = domain.outward_normal(q);
    int k = 0;
    for (int i = 1; i < domain.dimension(); ++i)
        if (std::fabs(n[i]) < std::fabs(n[k])) k = i;
    Point t = axis(k, 1.0);
    const double dot = n[k];
    t = add(t, n, -dot);
    const double nt = norm(t);
    if (!(nt > 1e-12)) throw std::invalid_argument("no tangent direction at this boundary point");
    return {t[0] / nt, t[1] / nt, t[2] / nt};
}

int boundary_patch(const Domain& domain, const Point& q, const Point& t, double r, const Point& y) {
    const double dist = distance(y, q);
    if (!(dist > 2 * r && dist < 4 * r) || domain.contains(y)) return -1;
    const double side = (y[0] - q[0]) * t[0] + (y[1] - q[1]) * t[1] + (y[2] - q[2]) * t[2];
    return side > 0 ? 0 : 1;
}

namespace {

std::vector<double> default_radii(const SubordinatorModel& model, const Domain& domain, const BoundaryOptions& opt,
                                  VerificationReport& rep) {
    const double r5 = slowly_varying_radius(model.family());
    rep.constants["r5"] = r5;
    if (!opt.radii.empty()) return opt.radii;
    const double top = std::min(domain.r_char(), r5) / 2;
    if (!(top > 0)) throw std::invalid_argument("no admissible radius: ell is not slowly varying enough on (0, 1]");
    return {top, top / 2, top / 4, top / 8};
}

std::vector<Point> q_list_for(const Domain& domain, const BoundaryOptions& opt) {
    return opt.q_list.empty() ? domain.catalog_boundary_points() : opt.q_list;
}

void check_radii(const Domain& domain, const std::vector<double>& radii, double m) {
    for (double r : radii) {
        if (!(r > 0 && 2 * r <= domain.r_char() + 1e-12))
            throw std::invalid_argument("boundary radii must satisfy 0 < 2r <= R_char");
        if (!(4 * r <= m)) throw std::invalid_argument("patches must fit inside B(Q, M)");
    }
}

}  // namespace

VerificationReport verify_bhp(const SubordinatorModel& model, const Domain& domain, const BoundaryOptions& opt) {
    VerificationReport rep;
    rep.theorem_tag = "boundary_harnack_principle";
    rep.info["family"] = model.family().describe();
    rep.info["domain"] = domain.name();
    rep.constants["dimension"] = domain.dimension();
    const double m = opt.m_factor * domain.diameter();
    rep.constants["M"] = m;
    rep.constants["kappa"] = domain.kappa();
    const auto radii = default_radii(model, domain, opt, rep);
    check_radii(domain, radii, m);
    rep.series["r_grid"] = radii;
    const auto qs = q_list_for(domain, opt);
    double worst_rel = 0;
    for (std::size_t qi = 0; qi < qs.size(); ++qi) {
        const Point q = qs[qi];
        if (domain.contains(q)) throw std::invalid_argument("boundary point lies inside the domain");
        const Point t = patch_tangent(domain, q);
        std::vector<double> c_emp;
        bool trivial_ok = true;
        for (double r : radii) {
            PathSimulator sim(model, path_config_for(model, r, opt.mc));
            auto cell = [&](const Point& y) { return boundary_patch(domain, q, t, r, y); };
            auto pts = boundary_grid(domain, q, {0.25 * r, 0.45 * r}, r / 8, r / 2, 6);
            if (pts.empty()) throw std::invalid_argument("no sample points in D near the boundary point");
            const Point a = domain.witness(q, r);
            pts.push_back(a);
            const auto pm = measure_patches(sim, domain, pts, cell, 2, opt.mc.paths,
                                            derive_seed(opt.mc.seed, "bhp/" + std::to_string(qi) + "/r=" + fmt(r)),
                                            opt.mc.workers);
            const auto& ha = pm.measures.back();
            const double ua = ha.probability[0], va = ha.probability[1];
            double c = 1, c_same = 1;
            for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
                const auto& hm = pm.measures[k];
                const double u = hm.probability[0], v = hm.probability[1];
                for (int i = 0; i < 2; ++i) {
                    if (hm.probability[i] < 10 * hm.se[i]) {
                        std::ostringstream w;
                        w << "patch starvation at Q" << qi << ", r = " << r << ": patch " << i << " has measure "
                          << hm.probability[i];
                        rep.warnings.push_back(w.str());
                    }
                    if (hm.probability[i] > 0) worst_rel = std::max(worst_rel, hm.se[i] / hm.probability[i]);
                }
                if (!(u > 0 && v > 0 && ua > 0 && va > 0)) {
                    c = kInf;
                    continue;
                }
                const double ratio = (u / v) * (va / ua);
                c = std::max({c, ratio, 1 / ratio});
                const double same = (u / u) * (ua / ua);
                c_same = std::max({c_same, same, 1 / same});
            }
            trivial_ok = trivial_ok && c_same == 1.0;
            c_emp.push_back(c);
        }
        const std::string key = qi == 0 ? "C_emp" : "C_emp_q" + std::to_string(qi);
        rep.series[key] = c_emp;
        rep.series["Q" + std::to_string(qi)] = {q[0], q[1], q[2]};
        const Trend tr = fit_trend(radii, c_emp);
        rep.constants["slope" + (qi == 0 ? std::string() : "_q" + std::to_string(qi))] = tr.slope;
        rep.constants["spread" + (qi == 0 ? std::string() : "_q" + std::to_string(qi))] = tr.spread;
        std::ostringstream grid;
        grid << "Q = (" << q[0] << ", " << q[1] << ", " << q[2] << "), " << radii_text(radii);
        const double worst = *std::max_element(c_emp.begin(), c_emp.end());
        rep.add("BHP constant C_emp is finite", grid.str(), worst, std::isfinite(worst));
        rep.add("C_emp has no upward trend as r decreases (slope >= " + fmt(opt.min_slope) + ", max/min <= " +
                    fmt(opt.max_spread) + ")",
                grid.str(), tr.slope, tr.slope >= opt.min_slope && tr.spread <= opt.max_spread);
        rep.add("u = v gives C_emp = 1 exactly", grid.str(), 1.0, trivial_ok);
    }
    rep.mc_se = worst_rel;
    return rep;
}

VerificationReport verify_carleson(const SubordinatorModel& model, const Domain& domain, const BoundaryOptions& opt) {
    VerificationReport rep;
    rep.theorem_tag = "carleson_estimate";
    rep.info["family"] = model.family().describe();
    rep.info["domain"] = domain.name();
    rep.info["statement"] = "u(x) <= C u(A_r(Q)) for x in D cap B(Q, 3r/2)";
    rep.constants["dimension"] = domain.dimension();
    const double m = opt.m_factor * domain.diameter();
    rep.constants["M"] = m;
    const auto radii = default_radii(model, domain, opt, rep);
    check_radii(domain, radii, m);
    rep.series["r_grid"] = radii;
    const auto qs = q_list_for(domain, opt);
    double worst_rel = 0;
    for (std::size_t qi = 0; qi < qs.size(); ++qi) {
        const Point q = qs[qi];
        const Point t = patch_tangent(domain, q);
        std::vector<double> ratios;
        bool witness_one = true;
        for (double r : radii) {
            PathSimulator sim(model, path_config_for(model, r, opt.mc));
            auto cell = [&](const Point& y) { return boundary_patch(domain, q, t, r, y) >= 0 ? 0 : -1; };
            auto pts = boundary_grid(domain, q, {0.25 * r, 0.5 * r, r, 1.4 * r}, r / 16, 1.5 * r, 10);
            const Point a = domain.witness(q, r);
            pts.push_back(a);
            const auto pm = measure_patches(sim, domain, pts, cell, 1, opt.mc.paths,
                                            derive_seed(opt.mc.seed, "carleson/" + std::to_string(qi) + "/r=" + fmt(r)),
                                            opt.mc.workers);
            const double ua = pm.measures.back().probability[0];
            double worst = 0;
            for (const auto& hm : pm.measures) {
                worst = std::max(worst, ua > 0 ? hm.probability[0] / ua : kInf);
                if (hm.probability[0] > 0) worst_rel = std::max(worst_rel, hm.se[0] / hm.probability[0]);
                if (hm.probability[0] < 10 * hm.se[0]) {
                    std::ostringstream w;
                    w << "patch starvation at Q" << qi << ", r = " << r << ": measure " << hm.probability[0];
                    rep.warnings.push_back(w.str());
                }
            }
            witness_one = witness_one && ua > 0 && pm.measures.back().probability[0] / ua == 1.0;
            ratios.push_back(worst);
        }
        const std::string key = qi == 0 ? "C_emp" : "C_emp_q" + std::to_string(qi);
        rep.series[key] = ratios;
        const Trend tr = fit_trend(radii, ratios);
        rep.constants["slope" + (qi == 0 ? std::string() : "_q" + std::to_string(qi))] = tr.slope;
        std::ostringstream grid;
        grid << "Q = (" << q[0] << ", " << q[1] << ", " << q[2] << "), " << radii_text(radii);
        const double worst = *std::max_element(ratios.begin(), ratios.end());
        rep.add("max u(x) / u(A_r(Q)) over D cap B(Q, 3r/2) is finite", grid.str(), worst, std::isfinite(worst));
        rep.add("Carleson ratio has no upward trend as r decreases", grid.str(), tr.slope,
                tr.slope >= opt.min_slope && tr.spread <= opt.max_spread);
        rep.add("ratio at x = A_r(Q) equals 1", grid.str(), 1.0, witness_one);
    }
    rep.mc_se = worst_rel;
    return rep;
}

}  // namespace sbmkit
