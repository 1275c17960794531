#include "sbmkit/martin.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <boost/math/quadrature/gauss.hpp>

namespace sbmkit {

namespace {

constexpr double kPi = 3.14159265358979323846;

double unit_ball_volume(int d) { return std::pow(kPi, d / 2.0) / std::tgamma(d / 2.0 + 1); }

std::string point_text(const Point& p) {
    std::ostringstream s;
    s << "(" << p[0] << ", " << p[1] << ", " << p[2] << ")";
    return s.str();
}

struct Ratio {
    double value = 0, se = 0;
};

// sum a / sum b over paths [0, n) with the delta-method standard error.
Ratio ratio_estimate(const std::vector<double>& acc, std::size_t stride, std::size_t ia, std::size_t ib,
                     std::size_t n) {
    long double sa = 0, sb = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sa += acc[i * stride + ia];
        sb += acc[i * stride + ib];
    }
    if (sb <= 0) return {std::nan(""), std::nan("")};
    const long double r = sa / sb;
    long double ss = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const long double e = acc[i * stride + ia] - r * acc[i * stride + ib];
        ss += e * e;
    }
    const long double mb = sb / n;
    return {double(r), double(std::sqrt(ss / (n * (n - 1.0L))) / mb)};
}

MeanSE column_mean(const std::vector<double>& acc, std::size_t stride, std::size_t col, std::size_t n) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = acc[i * stride + col];
    return mean_se(v);
}

// Per-path occupation sums int K_b(X_t - e) dt for each evaluation point e.
// When thresholds are given, a path splits into two half-weight copies the
// first time its distance to the complement passes each threshold; path i
// then stands for the weighted sum over its branches.
std::vector<double> occupation_sums(const PathSimulator& sim, const Domain& domain, const Point& start,
                                    const std::vector<Point>& eval, double b, std::size_t n, std::uint64_t seed,
                                    int workers, const std::vector<double>& thresholds = {}) {
    const std::size_t ne = eval.size();
    const int d = domain.dimension();
    if (thresholds.size() > 20) throw std::invalid_argument("too many splitting thresholds");
    std::vector<double> acc(n * ne, 0.0);
    parallel_for(n, workers, [&](std::size_t i) {
        double* a = &acc[i * ne];
        std::function<void(const Point&, std::size_t, double, std::uint64_t)> branch =
            [&](const Point& x0, std::size_t level, double weight, std::uint64_t code) {
                RandomStream rng(seed, (std::uint64_t(i) << 22) | code);
                while (level < thresholds.size() && domain.distance_to_boundary(x0) >= thresholds[level]) ++level;
                const StepObserver obs = [&](const Point& x, double h) {
                    for (std::size_t e = 0; e < ne; ++e) {
                        const double k =
                            epanechnikov({x[0] - eval[e][0], x[1] - eval[e][1], x[2] - eval[e][2]}, d, b);
                        if (k > 0) a[e] += weight * h * k;
                    }
                };
                const StopPredicate stop = [&](const Point& x) {
                    return level < thresholds.size() && domain.distance_to_boundary(x) >= thresholds[level];
                };
                const ExitRecord rec = sim.run(domain, x0, rng, &obs, &stop);
                if (rec.stopped) {
                    branch(rec.exit_point, level + 1, weight / 2, 2 * code);
                    branch(rec.exit_point, level + 1, weight / 2, 2 * code + 1);
                }
            };
        branch(start, 0, 1.0, 1);
    });
    return acc;
}

bool has_ball_oracle(const MartinProbe& probe, const SubordinatorModel& model) {
    const int d = probe.domain.dimension();
    return model.family().kind() == Family::Stable && probe.domain.kind() == DomainKind::Ball && d >= 2 &&
           d > model.alpha();
}

}  // namespace

double default_bandwidth(int d, std::size_t n, double c) { return c * std::pow(double(n), -1.0 / (d + 4)); }

double epanechnikov(const Point& u, int d, double b) {
    const double q = (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]) / (b * b);
    if (q >= 1) return 0.0;
    return (d + 2) / (2 * unit_ball_volume(d) * std::pow(b, d)) * (1 - q);
}

void MartinProbe::validate() const {
    if (!(bandwidth > 0)) throw std::invalid_argument("bandwidth must be positive");
    if (approach.empty()) throw std::invalid_argument("approach sequence is empty");
    if (domain.contains(z)) throw std::invalid_argument("z must lie on the boundary, not inside the domain");
    std::vector<Point> eval{x0};
    eval.insert(eval.end(), x_grid.begin(), x_grid.end());
    for (const auto& e : eval) {
        if (!domain.contains(e)) throw std::invalid_argument("evaluation point " + point_text(e) + " is outside D");
        if (domain.distance_to_boundary(e) <= bandwidth)
            throw std::invalid_argument("kernel support around " + point_text(e) + " leaves D");
        for (const auto& y : approach)
            if (distance(e, y) < 2 * bandwidth)
                throw std::invalid_argument("evaluation point " + point_text(e) +
                                            " is within two bandwidths of an approach point");
    }
    double last = std::numeric_limits<double>::infinity();
    for (const auto& y : approach) {
        if (!domain.contains(y)) throw std::invalid_argument("approach point " + point_text(y) + " is outside D");
        const double dz = distance(y, z);
        if (!(dz < last)) throw std::invalid_argument("approach sequence must move strictly closer to z");
        last = dz;
    }
}

MartinProbe MartinProbe::along_normal(const Domain& domain, const Point& z, const Point& x0,
                                      std::vector<Point> x_grid, double r0, int levels, double bandwidth) {
    if (levels < 1) throw std::invalid_argument("levels must be positive");
    MartinProbe p{domain, x0, std::move(x_grid), z, {}, bandwidth};
    const Point n = domain.outward_normal(z);
    for (int m = 1; m <= levels; ++m) p.approach.push_back(add(z, n, -std::ldexp(r0, -m)));
    p.validate();
    return p;
}

MartinTable estimate_martin(const MartinProbe& probe, const SubordinatorModel& model, const PathConfig& cfg,
                            std::size_t n, int workers, std::size_t min_effective) {
    probe.validate();
    if (n < 4) throw std::invalid_argument("need at least 4 paths per approach point");
    PathSimulator sim(model, cfg);
    std::vector<Point> eval{probe.x0};
    eval.insert(eval.end(), probe.x_grid.begin(), probe.x_grid.end());
    const std::size_t ne = eval.size();
    MartinTable t;
    t.y = probe.approach;
    t.x = probe.x_grid;
    t.paths = n;
    for (std::size_t m = 0; m < probe.approach.size(); ++m) {
        // Splitting thresholds at 2^j times the starting depth, up to the depth of y_1.
        std::vector<double> thresholds;
        const double top = probe.domain.distance_to_boundary(probe.approach.front());
        for (double th = 2 * probe.domain.distance_to_boundary(probe.approach[m]); th <= top * (1 + 1e-9); th *= 2)
            thresholds.push_back(th);
        const auto acc = occupation_sums(sim, probe.domain, probe.approach[m], eval, probe.bandwidth, n,
                                         derive_seed(cfg.seed, "martin/level/" + std::to_string(m + 1)), workers,
                                         thresholds);
        std::size_t eff = n;
        for (std::size_t e = 0; e < ne; ++e) {
            std::size_t c = 0;
            for (std::size_t i = 0; i < n; ++i) c += acc[i * ne + e] > 0;
            if (c < min_effective) {
                std::ostringstream msg;
                msg << "bandwidth starvation: " << c << " of " << n << " paths from y = "
                    << point_text(probe.approach[m]) << " reached the kernel around " << point_text(eval[e])
                    << " (need " << min_effective << ")";
                throw BandwidthStarvation(msg.str());
            }
            eff = std::min(eff, c);
        }
        t.effective.push_back(eff);
        const MeanSE g0 = column_mean(acc, ne, 0, n);
        t.g_x0.push_back(g0.mean);
        t.g_x0_se.push_back(g0.se);
        std::vector<double> row, row_se, half, half_se;
        for (std::size_t e = 1; e < ne; ++e) {
            const Ratio full = ratio_estimate(acc, ne, e, 0, n), h = ratio_estimate(acc, ne, e, 0, n / 2);
            row.push_back(full.value);
            row_se.push_back(full.se);
            half.push_back(h.value);
            half_se.push_back(h.se);
        }
        t.m.push_back(row);
        t.se.push_back(row_se);
        t.m_half.push_back(half);
        t.se_half.push_back(half_se);
    }
    return t;
}

double smoothed_stable_ball_green(double alpha, int d, double r, const Point& y, const Point& x, double b) {
    using boost::math::quadrature::gauss;
    auto g = [&](const Point& w) { return stable_ball_green(alpha, d, r, y, w); };
    const double c = (d + 2) / (2 * unit_ball_volume(d) * std::pow(b, d));
    if (d == 3) {
        return c * gauss<double, 20>::integrate(
                       [&](double rho) {
                           const double inner = gauss<double, 20>::integrate(
                               [&](double ct) {
                                   const double st = std::sqrt(std::max(0.0, 1 - ct * ct));
                                   return gauss<double, 30>::integrate(
                                       [&](double ph) {
                                           return g({x[0] + rho * ct, x[1] + rho * st * std::cos(ph),
                                                     x[2] + rho * st * std::sin(ph)});
                                       },
                                       0.0, 2 * kPi);
                               },
                               -1.0, 1.0);
                           return rho * rho * (1 - rho * rho / (b * b)) * inner;
                       },
                       0.0, b);
    }
    if (d == 2) {
        return c * gauss<double, 20>::integrate(
                       [&](double rho) {
                           const double inner = gauss<double, 30>::integrate(
                               [&](double ph) { return g({x[0] + rho * std::cos(ph), x[1] + rho * std::sin(ph), 0}); },
                               0.0, 2 * kPi);
                           return rho * (1 - rho * rho / (b * b)) * inner;
                       },
                       0.0, b);
    }
    throw std::invalid_argument("smoothed ball Green function needs d = 2 or 3");
}

VerificationReport martin_report(const MartinProbe& probe, const SubordinatorModel& model, const PathConfig& cfg,
                                 std::size_t n, int workers) {
    return martin_report(probe, model, cfg, estimate_martin(probe, model, cfg, n, workers), workers);
}

VerificationReport martin_report(const MartinProbe& probe, const SubordinatorModel& model, const PathConfig& cfg,
                                 const MartinTable& t, int workers) {
    VerificationReport rep;
    rep.theorem_tag = "martin_kernel_boundary_limit";
    rep.info["family"] = model.family().describe();
    rep.info["domain"] = probe.domain.name();
    rep.info["z"] = point_text(probe.z);
    rep.info["x0"] = point_text(probe.x0);
    const int d = probe.domain.dimension();
    const std::size_t levels = t.y.size(), nx = t.x.size();
    rep.constants["dimension"] = d;
    rep.constants["bandwidth"] = probe.bandwidth;
    rep.constants["paths"] = double(t.paths);
    rep.constants["dt"] = cfg.dt;
    for (std::size_t m = 0; m < levels; ++m) {
        rep.series["distance_to_z"].push_back(distance(t.y[m], probe.z));
        rep.series["G_y_x0"].push_back(t.g_x0[m]);
        rep.series["effective_paths"].push_back(double(t.effective[m]));
    }
    double worst_rel = 0;
    for (std::size_t k = 0; k < nx; ++k)
        for (std::size_t m = 0; m < levels; ++m) {
            rep.series["M_x" + std::to_string(k)].push_back(t.m[m][k]);
            rep.series["se_x" + std::to_string(k)].push_back(t.se[m][k]);
            worst_rel = std::max(worst_rel, t.se[m][k] / std::fabs(t.m[m][k]));
        }
    rep.mc_se = worst_rel;
    std::ostringstream grid;
    grid << nx << " points x, " << levels << " approach points with |y_m - z| = " << distance(t.y.front(), probe.z)
         << " .. " << distance(t.y.back(), probe.z) << ", N = " << t.paths;

    // M(x0, y) is the ratio of a column with itself; it needs G(y_m, x0) > 0.
    double norm_dev = 0;
    for (std::size_t m = 0; m < levels; ++m) {
        const double self = t.g_x0[m] / t.g_x0[m];
        norm_dev = std::max(norm_dev, std::isfinite(self) ? std::fabs(self - 1) : std::numeric_limits<double>::infinity());
    }
    rep.add("M(x0, y_m) = 1 for every m", grid.str(), norm_dev, norm_dev == 0.0);

    if (has_ball_oracle(probe, model)) {
        const double a = model.alpha(), r = probe.domain.size();
        double worst_z = 0;
        for (std::size_t k = 0; k < nx; ++k) {
            for (std::size_t m = 0; m < levels; ++m) {
                const double o = smoothed_stable_ball_green(a, d, r, t.y[m], t.x[k], probe.bandwidth) /
                                 smoothed_stable_ball_green(a, d, r, t.y[m], probe.x0, probe.bandwidth);
                rep.series["oracle_x" + std::to_string(k)].push_back(o);
                worst_z = std::max(worst_z, std::fabs(t.m[m][k] - o) / t.se[m][k]);
            }
            rep.series["limit_exact"].push_back(stable_ball_martin_kernel(a, d, r, t.x[k], probe.z) /
                                                stable_ball_martin_kernel(a, d, r, probe.x0, probe.z));
        }
        rep.constants["oracle_max_abs_z"] = worst_z;
        rep.add("estimate matches the kernel-smoothed closed-form ball Green ratio (3 SE)", grid.str(), worst_z,
                worst_z <= 3);
    }

    double cauchy_z = 0;
    if (levels >= 2) {
        for (std::size_t k = 0; k < nx; ++k) {
            const double diff = t.m[levels - 1][k] - t.m[levels - 2][k];
            const double se = std::hypot(t.se[levels - 1][k], t.se[levels - 2][k]);
            cauchy_z = std::max(cauchy_z, std::fabs(diff) / se);
        }
        rep.constants["cauchy_max_abs_z"] = cauchy_z;
        rep.add("successive estimates M(x, y_m) agree at the deepest levels (3 combined SE)", grid.str(), cauchy_z,
                cauchy_z <= 3);
    }
    if (levels >= 4) {
        double early = 0, late = 0;
        const std::size_t half = (levels - 1) / 2;
        for (std::size_t k = 0; k < nx; ++k)
            for (std::size_t m = 0; m + 1 < levels; ++m) {
                const double dm = std::fabs(t.m[m + 1][k] - t.m[m][k]);
                (m < half ? early : late) += dm / double(m < half ? half : levels - 1 - half);
            }
        rep.constants["mean_step_early"] = early / double(nx);
        rep.constants["mean_step_late"] = late / double(nx);
        rep.add("successive differences shrink along the approach sequence", grid.str(), late / early, late < early,
                false);
    }

    // Green symmetry: paths from x0 evaluated near y_1 against paths from y_1 evaluated near x0.
    if (probe.domain.distance_to_boundary(t.y.front()) > probe.bandwidth) {
        PathSimulator sim(model, cfg);
        const std::size_t sym_n = std::max<std::size_t>(t.paths / 4, 1000);
        const auto acc = occupation_sums(sim, probe.domain, probe.x0, {t.y.front()}, probe.bandwidth, sym_n,
                                         derive_seed(cfg.seed, "martin/symmetry"), workers);
        const MeanSE g = column_mean(acc, 1, 0, sym_n);
        const double z = std::fabs(g.mean - t.g_x0.front()) / std::hypot(g.se, t.g_x0_se.front());
        rep.constants["symmetry_G_x0_y1"] = g.mean;
        rep.constants["symmetry_G_y1_x0"] = t.g_x0.front();
        rep.constants["symmetry_abs_z"] = z;
        rep.add("G(x0, y_1) from paths at x0 agrees with G(y_1, x0) from paths at y_1 (3 SE)",
                "x0 = " + point_text(probe.x0) + ", y_1 = " + point_text(t.y.front()), z, z <= 3);
    }
    return rep;
}

namespace {

struct DecayFit {
    double beta = std::nan("");
    double chi2_min = std::nan("");
    double chi2_constant = std::nan("");  // every x fitted by its own constant
    double beta_lower = std::nan("");     // smallest beta with chi2 <= chi2_min + 4
};

// Weighted fit of M(x, y_m) = L_x + A_x (|y_m - z| / r0)^beta with one beta for
// every x, profiled over a beta grid. L_x is the boundary limit, so the
// amplitude A_x (s)^beta is the oscillation between y_m and the limit point.
DecayFit fit_decay(const MartinTable& t, const std::vector<std::vector<double>>& m,
                   const std::vector<std::vector<double>>& se, const Point& z, double r0) {
    const std::size_t levels = t.y.size();
    std::vector<double> s(levels);
    for (std::size_t j = 0; j < levels; ++j) s[j] = distance(t.y[j], z) / r0;
    auto chi2_at = [&](double beta) {
        double total = 0;
        for (std::size_t k = 0; k < t.x.size(); ++k) {
            // Normal equations for (L, A) with weights 1/se^2.
            double w0 = 0, w1 = 0, w2 = 0, b0 = 0, b1 = 0, yy = 0;
            for (std::size_t j = 0; j < levels; ++j) {
                const double w = 1 / (se[j][k] * se[j][k]);
                const double f = std::pow(s[j], beta);
                w0 += w;
                w1 += w * f;
                w2 += w * f * f;
                b0 += w * m[j][k];
                b1 += w * f * m[j][k];
                yy += w * m[j][k] * m[j][k];
            }
            const double det = w0 * w2 - w1 * w1;
            if (beta == 0 || std::fabs(det) <= 1e-12 * w0 * w2) {
                total += yy - b0 * b0 / w0;
                continue;
            }
            const double l = (w2 * b0 - w1 * b1) / det, a = (w0 * b1 - w1 * b0) / det;
            total += yy - l * b0 - a * b1;
        }
        return total;
    };
    DecayFit f;
    f.chi2_constant = chi2_at(0.0);
    std::vector<std::pair<double, double>> grid;
    for (int i = -100; i <= 400; ++i) {
        if (i == 0) continue;
        const double beta = i / 100.0;
        grid.push_back({beta, chi2_at(beta)});
    }
    for (const auto& [beta, c] : grid)
        if (!(c >= f.chi2_min)) {
            f.chi2_min = c;
            f.beta = beta;
        }
    for (const auto& [beta, c] : grid)
        if (c <= f.chi2_min + 4) {
            f.beta_lower = beta;
            break;
        }
    return f;
}

}  // namespace

VerificationReport oscillation_decay(const MartinProbe& probe, const MartinTable& t) {
    VerificationReport rep;
    rep.theorem_tag = "martin_kernel_oscillation";
    rep.info["domain"] = probe.domain.name();
    rep.info["z"] = point_text(probe.z);
    const double r0 = 2 * distance(t.y.front(), probe.z);
    const std::size_t levels = t.y.size();
    rep.constants["r"] = r0;
    if (levels < 3) throw std::invalid_argument("oscillation fit needs at least 3 approach points");
    const DecayFit full = fit_decay(t, t.m, t.se, probe.z, r0);
    const DecayFit half = fit_decay(t, t.m_half, t.se_half, probe.z, r0);
    for (std::size_t j = 0; j < levels; ++j) rep.series["distance_over_r"].push_back(distance(t.y[j], probe.z) / r0);
    for (std::size_t k = 0; k < t.x.size(); ++k)
        for (std::size_t j = 0; j + 1 < levels; ++j)
            rep.series["oscillation_to_deepest_x" + std::to_string(k)].push_back(
                std::fabs(t.m[j][k] - t.m[levels - 1][k]));
    rep.constants["beta_hat"] = full.beta;
    rep.constants["beta_lower"] = full.beta_lower;
    rep.constants["chi2_min"] = full.chi2_min;
    rep.constants["chi2_constant"] = full.chi2_constant;
    rep.constants["beta_hat_half_paths"] = half.beta;
    std::ostringstream grid;
    grid << "M(x, y_m) = L_x + A_x (|y_m - z|/r)^beta over " << levels << " approach points and " << t.x.size()
         << " far points, beta in [-1, 4], N = " << t.paths;
    const double gain = full.chi2_constant - full.chi2_min;
    rep.add("fitted oscillation exponent beta_hat > 0", grid.str(), full.beta,
            std::isfinite(full.beta) && full.beta > 0);
    rep.add("power-law decay beats a constant by chi2 >= 4", grid.str(), gain, gain >= 4);
    // |M(z, x) - M(z, x)| on the diagonal.
    double diag = 0;
    for (std::size_t m = 0; m < levels; ++m)
        for (std::size_t k = 0; k < t.x.size(); ++k) diag = std::max(diag, std::fabs(t.m[m][k] - t.m[m][k]));
    rep.add("x = y gives oscillation 0", grid.str(), diag, diag == 0.0);
    const double change = std::fabs(half.beta - full.beta) / std::fabs(full.beta);
    rep.constants["beta_hat_relative_change"] = change;
    rep.add("beta_hat changes by less than 30% between N/2 and N paths", grid.str(), change,
            std::isfinite(change) && change < 0.3, false);
    return rep;
}

VerificationReport oscillation_decay(const MartinProbe& probe, const SubordinatorModel& model, const PathConfig& cfg,
                                     std::size_t n, int workers) {
    auto rep = oscillation_decay(probe, estimate_martin(probe, model, cfg, n, workers));
    rep.info["family"] = model.family().describe();
    return rep;
}

VerificationReport growth_lemma_check(const SubordinatorModel& model, const Domain& domain, const Point& q,
                                      double r, int k_max, std::size_t n, const GrowthOptions& opt) {
    if (k_max < 1) throw std::invalid_argument("k_max must be at least 1");
    if (domain.contains(q)) throw std::invalid_argument("Q must be a boundary point");
    if (!(r > 0)) throw std::invalid_argument("r must be positive");
    const double kappa = domain.kappa(), a = model.alpha();
    VerificationReport rep;
    rep.theorem_tag = "boundary_growth_estimate";
    rep.info["family"] = model.family().describe();
    rep.info["domain"] = domain.name();
    rep.info["Q"] = point_text(q);
    rep.constants["r"] = r;
    rep.constants["kappa"] = kappa;
    const double pf = opt.patch_factor;
    auto cell = [&](const Point& y) { return !domain.contains(y) && distance(y, q) > pf * r ? 0 : -1; };
    std::vector<double> u, u_se, eta;
    double worst_rel = 0;
    for (int k = 0; k <= k_max; ++k) {
        const double h = std::pow(kappa / 2, k) * r;
        PathConfig cfg = path_config_for(model, r, opt.mc);
        cfg.dt = opt.mc.dt_scale * time_scale(model, h);
        cfg.eps_jump = std::min(cfg.eps_jump, 1e-4 * cfg.dt * cfg.dt);
        PathSimulator sim(model, cfg);
        const Point ak = domain.witness(q, h);
        const auto hm = harmonic_measure(sim, domain, ak, cell, 1, n,
                                         derive_seed(opt.mc.seed, "growth/k=" + std::to_string(k)), opt.mc.workers);
        const double p = hm.probability[0], s = hm.se[0];
        if (p < 10 * s) {
            std::ostringstream w;
            w << "starvation at k = " << k << ": u(A) = " << p << " with SE " << s;
            rep.warnings.push_back(w.str());
        }
        if (!(p > 0)) throw SimulationError("growth check: no path from A_k reached the far patch at k = " +
                                            std::to_string(k));
        worst_rel = std::max(worst_rel, s / p);
        u.push_back(p);
        u_se.push_back(s);
        eta.push_back(h);
    }
    const double step = std::log(2 / kappa);
    std::vector<double> ratio, lratio, xs, ys;
    for (int k = 0; k <= k_max; ++k) {
        ratio.push_back(u[0] / u[k]);
        lratio.push_back(model.ell(1 / (eta[k] * eta[k])) / model.ell(1 / (r * r)));
        xs.push_back(k * step);
        ys.push_back(std::log(ratio.back() / lratio.back()));
    }
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i] / double(xs.size());
        my += ys[i] / double(xs.size());
    }
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    const double gamma = sxy / sxx;
    double c = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) c = std::max(c, std::exp(ys[i] - gamma * xs[i]));
    rep.series["eta"] = eta;
    rep.series["u_A"] = u;
    rep.series["u_A_se"] = u_se;
    rep.series["ratio"] = ratio;
    rep.series["ell_ratio"] = lratio;
    rep.constants["gamma_hat"] = gamma;
    rep.constants["c_hat"] = c;
    rep.mc_se = worst_rel;
    std::ostringstream grid;
    grid << "k = 0.." << k_max << ", eta_k = (kappa/2)^k r, r = " << r << ", N = " << n;
    rep.add("k = 0 gives ratio 1 <= c with c >= 1", grid.str(), c, ratio[0] == 1.0 && c >= 1.0);
    rep.add("fitted growth exponent gamma_hat < alpha", grid.str(), gamma, std::isfinite(gamma) && gamma < a);
    return rep;
}

}  // namespace sbmkit
