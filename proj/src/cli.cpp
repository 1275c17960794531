#include "sbmkit/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "sbmkit/bernstein.hpp"
#include "sbmkit/domain.hpp"
#include "sbmkit/estimators.hpp"
#include "sbmkit/fluctuation.hpp"
#include "sbmkit/kernels.hpp"
#include "sbmkit/laplace.hpp"
#include "sbmkit/martin.hpp"
#include "sbmkit/quadrature.hpp"
#include "sbmkit/simulate.hpp"

namespace sbmkit {

using nlohmann::json;

const char* version() { return "0.1.0"; }

namespace {

// Artifact paths do not change results and are left out of the embedded config,
// so that the same experiment written to two files gives identical reports.
const std::vector<std::string> kArtifactKeys{"out", "plot", "report"};

std::vector<Param> shared_params() {
    return {
        {"seed", ParamType::Int, 0, "run seed; every experiment derives its streams from it"},
        {"workers", ParamType::Int, 0, "worker threads (0: SBMKIT_WORKERS, else all cores)"},
        {"out", ParamType::Str, "", "CSV output path"},
        {"plot", ParamType::Str, "", "SVG plot path"},
        {"report", ParamType::Str, "", "JSON report path (default: stdout)"},
        {"tol_quad", ParamType::Num, 0.0, "relative quadrature tolerance override (0: default)"},
        {"tol_mc_se", ParamType::Num, 0.0, "fail when the relative Monte Carlo SE exceeds this (0: off)"},
    };
}

std::vector<Param> model_params() {
    return {
        {"family", ParamType::Str, "stable", "stable, relativistic, mixture, logpos, logneg"},
        {"alpha", ParamType::Num, 1.0, "index alpha in (0, 2)"},
        {"beta", ParamType::OptNum, nullptr, "second parameter of mixture, logpos, logneg"},
    };
}

json decades(int lo, int hi) {
    json a = json::array();
    for (int k = lo; k <= hi; ++k) a.push_back(std::pow(10.0, k));
    return a;
}

std::map<std::string, std::vector<Param>> build_schemas() {
    std::map<std::string, std::vector<Param>> s;
    auto with = [](std::vector<Param> own) {
        auto all = model_params();
        all.insert(all.end(), own.begin(), own.end());
        const auto shared = shared_params();
        all.insert(all.end(), shared.begin(), shared.end());
        return all;
    };
    s["phi"] = with({{"lambda", ParamType::NumList, decades(-3, 6), "evaluation points"}});
    s["chi"] = with({{"lambda", ParamType::NumList, decades(-3, 6), "evaluation points"}});
    s["kernel"] = with({
        {"which", ParamType::Str, "green", "green or jump"},
        {"d", ParamType::Int, 3, "dimension"},
        {"r", ParamType::NumList, decades(-4, -1), "distances"},
    });
    s["simulate"] = with({
        {"domain", ParamType::Str, "ball", "ball, box, lshape, slitball, twoballs"},
        {"radius", ParamType::Num, 1.0, "radius (ball) or half width (box)"},
        {"d", ParamType::Int, 3, "dimension"},
        {"paths", ParamType::Int, 10000, "number of paths"},
        {"dt", ParamType::Num, 1e-4, "time step"},
        {"x", ParamType::Point, json::array({0.0, 0.0, 0.0}), "starting point"},
        {"refine_levels", ParamType::Int, 6, "exact substep levels near the boundary"},
        {"coupled", ParamType::Bool, false, "also rerun on the dt/2 grid (ball only)"},
    });
    s["verify special-identity"] = with({
        {"lambda_lo", ParamType::Num, 1e-3, "grid start"},
        {"lambda_hi", ParamType::Num, 1e6, "grid end"},
        {"points", ParamType::Int, 46, "log-grid points"},
        {"tolerance", ParamType::Num, 1e-4, "allowed max |chi rho / lambda - 1|"},
        {"ladder_limit", ParamType::Bool, false, "also check chi against its large-lambda limit"},
    });
    s["verify asymptotics"] = with({
        {"d", ParamType::Int, 3, "dimension"},
        {"r", ParamType::NumList, json::array({1e-1, 1e-2, 1e-3, 1e-4}), "distances"},
        {"tolerance", ParamType::Num, 0.02, "allowed |ratio - 1| at the smallest r"},
        {"which", ParamType::Str, "green", "kernel written to the CSV: green or jump"},
    });
    s["verify regvar"] = with({
        {"r4", ParamType::Num, 0.0, "upper radius scale (0: largest admissible dyadic)"},
        {"r_min", ParamType::Num, 1e-8, "smallest grid radius"},
        {"points", ParamType::Int, 161, "grid points"},
        {"stability", ParamType::Num, 0.05, "allowed relative change under grid doubling"},
    });
    s["verify conditions"] = with({{"d", ParamType::Int, 3, "dimension"}});
    s["verify harnack"] = with({
        {"d", ParamType::Int, 3, "dimension"},
        {"radii", ParamType::NumList, json(HarnackOptions{}.radii), "ball radii"},
        {"paths", ParamType::Int, 20000, "paths per sample point"},
        {"dt_scale", ParamType::Num, 1e-4, "time step in units of 1/phi(r^-2)"},
        {"adaptive", ParamType::Num, 32.0, "adaptive step factor (0: fixed steps)"},
    });
    for (const char* name : {"verify bhp", "verify carleson"})
        s[name] = with({
            {"domain", ParamType::Str, "ball", "catalog domain, or a comma list of them"},
            {"d", ParamType::Int, 2, "dimension"},
            {"radii", ParamType::NumList, json::array(), "radii (empty: dyadic defaults)"},
            {"q", ParamType::PointList, json::array(), "boundary points (empty: catalog points)"},
            {"paths_per_point", ParamType::Int, 20000, "paths per starting point"},
            {"dt_scale", ParamType::Num, 1e-4, "time step in units of 1/phi(r^-2)"},
            {"adaptive", ParamType::Num, 32.0, "adaptive step factor (0: fixed steps)"},
        });
    s["verify exit-bounds"] = with({
        {"d", ParamType::Int, 3, "dimension"},
        {"radii", ParamType::NumList, json::array({0.5, 0.25, 0.125}), "ball radii"},
        {"paths", ParamType::Int, 20000, "paths per starting point"},
        {"dt_scale", ParamType::Num, 1e-3, "time step in units of 1/phi(r^-2)"},
        {"poisson", ParamType::Bool, true, "also compare the jump-exit histogram with the compensator"},
        {"poisson_paths", ParamType::Int, 200000, "paths for the jump-exit histogram"},
        {"poisson_dt_scale", ParamType::Num, 2e-4, "time step for the jump-exit histogram"},
    });
    s["martin"] = with({
        {"domain", ParamType::Str, "ball", "catalog domain"},
        {"d", ParamType::Int, 3, "dimension"},
        {"z", ParamType::Point, json::array({1.0, 0.0, 0.0}), "boundary point"},
        {"x0", ParamType::Point, json::array({0.0, 0.0, 0.0}), "normalising point"},
        {"x_grid", ParamType::PointList,
         json::array({json::array({0.35, 0.0, 0.0}), json::array({0.25, 0.3, 0.0}), json::array({-0.4, 0.0, 0.0})}),
         "evaluation points"},
        {"r0", ParamType::Num, 0.5, "approach points sit at z - 2^-m r0 n"},
        {"levels", ParamType::Int, 6, "number of approach points"},
        {"paths", ParamType::Int, 100000, "paths per approach point"},
        {"bandwidth", ParamType::Num, 0.0, "kernel bandwidth (0: 1.2 N^{-1/(d+4)}, capped by the geometry)"},
        {"dt", ParamType::Num, 1e-3, "time step"},
        {"refine_levels", ParamType::Int, 4, "exact substep levels near the boundary"},
        {"growth_levels", ParamType::Int, 3, "levels of the boundary growth check (0: skip)"},
        {"growth_paths", ParamType::Int, 20000, "paths per point of the growth check"},
        {"growth_r", ParamType::Num, 0.5, "outer radius of the growth check"},
    });
    return s;
}

const std::map<std::string, std::vector<Param>>& schemas() {
    static const auto s = build_schemas();
    return s;
}

std::string type_name(ParamType t) {
    switch (t) {
        case ParamType::Num: return "a number";
        case ParamType::Int: return "an integer";
        case ParamType::Str: return "a string";
        case ParamType::Bool: return "a boolean";
        case ParamType::NumList: return "a list of numbers";
        case ParamType::Point: return "a point (up to three numbers)";
        case ParamType::PointList: return "a list of points";
        case ParamType::OptNum: return "a number or null";
    }
    return "?";
}

bool is_point(const json& v) {
    if (!v.is_array() || v.empty() || v.size() > 3) return false;
    return std::all_of(v.begin(), v.end(), [](const json& e) { return e.is_number(); });
}

// Canonical form of a value, or ConfigError naming the key.
json coerce(const Param& p, const json& v, const std::string& command) {
    auto fail = [&] {
        throw ConfigError("key '" + p.name + "' of command '" + command + "' must be " + type_name(p.type) +
                          ", got " + v.dump());
    };
    switch (p.type) {
        case ParamType::Num:
            if (!v.is_number()) fail();
            return v.get<double>();
        case ParamType::OptNum:
            if (v.is_null()) return nullptr;
            if (!v.is_number()) fail();
            return v.get<double>();
        case ParamType::Int:
            if (v.is_number_integer()) return v.get<std::int64_t>();
            if (v.is_number_float() && std::floor(v.get<double>()) == v.get<double>() &&
                std::fabs(v.get<double>()) < 9e15)
                return std::int64_t(v.get<double>());
            fail();
            break;
        case ParamType::Str:
            if (!v.is_string()) fail();
            return v;
        case ParamType::Bool:
            if (!v.is_boolean()) fail();
            return v;
        case ParamType::NumList: {
            if (!v.is_array()) fail();
            json out = json::array();
            for (const auto& e : v) {
                if (!e.is_number()) fail();
                out.push_back(e.get<double>());
            }
            return out;
        }
        case ParamType::Point: {
            if (!is_point(v)) fail();
            json out = json::array({0.0, 0.0, 0.0});
            for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i].get<double>();
            return out;
        }
        case ParamType::PointList: {
            if (!v.is_array()) fail();
            json out = json::array();
            for (const auto& e : v) {
                if (!is_point(e)) fail();
                json pt = json::array({0.0, 0.0, 0.0});
                for (std::size_t i = 0; i < e.size(); ++i) pt[i] = e[i].get<double>();
                out.push_back(pt);
            }
            return out;
        }
    }
    return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) parts.push_back(cur);
    if (!s.empty() && s.back() == sep) parts.emplace_back();
    return parts;
}

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t");
    return s.substr(a, b - a + 1);
}

double parse_number(const std::string& name, const std::string& text) {
    const std::string t = trim(text);
    std::size_t used = 0;
    double v = 0;
    try {
        v = std::stod(t, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (t.empty() || used != t.size()) throw ConfigError("key '" + name + "': '" + text + "' is not a number");
    return v;
}

json parse_numbers(const std::string& name, const std::string& text, char sep) {
    json out = json::array();
    if (trim(text).empty()) return out;
    for (const auto& part : split(text, sep)) out.push_back(parse_number(name, part));
    return out;
}

// ---------------------------------------------------------------------------
// Execution helpers

struct Params {
    const json& j;

    double num(const char* k) const { return j.at(k).get<double>(); }
    std::int64_t integer(const char* k) const { return j.at(k).get<std::int64_t>(); }
    std::size_t count(const char* k) const {
        const auto v = integer(k);
        if (v <= 0) throw ConfigError(std::string("key '") + k + "' must be positive");
        return std::size_t(v);
    }
    std::string str(const char* k) const { return j.at(k).get<std::string>(); }
    bool flag(const char* k) const { return j.at(k).get<bool>(); }
    std::vector<double> list(const char* k) const { return j.at(k).get<std::vector<double>>(); }
    Point point(const char* k) const { return to_point(j.at(k)); }
    std::vector<Point> points(const char* k) const {
        std::vector<Point> out;
        for (const auto& e : j.at(k)) out.push_back(to_point(e));
        return out;
    }
    static Point to_point(const json& v) { return {v[0].get<double>(), v[1].get<double>(), v[2].get<double>()}; }

    std::uint64_t seed() const {
        const auto s = integer("seed");
        if (s < 0) throw ConfigError("key 'seed' must be non-negative");
        return std::uint64_t(s);
    }
    int workers() const {
        const auto w = integer("workers");
        if (w < 0) throw ConfigError("key 'workers' must be non-negative");
        return int(w);
    }
    int dim() const {
        const auto d = integer("d");
        if (d < 1 || d > 3) throw ConfigError("key 'd' must be 1, 2 or 3");
        return int(d);
    }
    BernsteinFamily family() const {
        std::optional<double> beta;
        if (!j.at("beta").is_null()) beta = num("beta");
        return BernsteinFamily(parse_family(str("family")), num("alpha"), beta);
    }
};

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

Domain make_domain(const std::string& key, int d, double size) {
    const DomainKind kind = parse_domain(trim(key));
    if (kind == DomainKind::Ball) return Domain::ball(d, size);
    if (kind == DomainKind::Box) return Domain::box(d, size);
    if (size != 1.0) throw ConfigError("key 'radius' applies to the ball and box domains only");
    return Domain::make(kind, d);
}

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::vector<double>> values;  // numeric rows, full precision

    void add(std::vector<double> row) {
        std::vector<std::string> cells;
        for (double v : row) cells.push_back(fmt(v));
        rows.push_back(std::move(cells));
        values.push_back(std::move(row));
    }
};

std::vector<double> series_or_empty(const VerificationReport& r, const std::string& key) {
    const auto it = r.series.find(key);
    return it == r.series.end() ? std::vector<double>{} : it->second;
}

KernelOptions kernel_options(const Params& p) {
    KernelOptions k;
    if (p.num("tol_quad") > 0) k.quad.rel_tol = p.num("tol_quad");
    return k;
}

LadderOptions ladder_options(const Params& p) {
    LadderOptions l;
    if (p.num("tol_quad") > 0) l.quad.rel_tol = p.num("tol_quad");
    return l;
}

McOptions boundary_mc(const Params& p, std::size_t paths) {
    McOptions mc;
    mc.paths = paths;
    mc.workers = p.workers();
    mc.seed = p.seed();
    mc.dt_scale = p.num("dt_scale");
    mc.adaptive = p.num("adaptive");
    return mc;
}

// ---------------------------------------------------------------------------
// Commands. Each fills reports, the CSV table, and the plot.

struct Output {
    std::vector<VerificationReport> reports;
    Table table;
    std::optional<PlotSpec> plot;
    json extra = json::object();  // merged into the top level of the document
};

void cmd_phi(const Params& p, Output& o) {
    const BernsteinFamily f = p.family();
    o.table.header = {"lambda", "phi", "ell"};
    PlotSeries s{"phi", {}, {}};
    for (double l : p.list("lambda")) {
        const double v = phi(f, l);
        o.table.add({l, v, ell(f, l)});
        s.x.push_back(l);
        s.y.push_back(v);
    }
    o.plot = PlotSpec{"phi for " + f.describe(), "lambda", "phi(lambda)", true, true, {s}, std::nullopt};
}

void cmd_chi(const Params& p, Output& o) {
    const LadderData ladder(p.family(), ladder_options(p));
    o.table.header = {"lambda", "chi", "rho", "product_over_lambda"};
    PlotSeries sc{"chi", {}, {}}, sr{"rho", {}, {}};
    for (double l : p.list("lambda")) {
        const double c = chi(ladder, l), r = rho(ladder, l);
        o.table.add({l, c, r, c * r / l});
        sc.x.push_back(l);
        sc.y.push_back(c);
        sr.x.push_back(l);
        sr.y.push_back(r);
    }
    o.plot = PlotSpec{"ladder exponents for " + ladder.family().describe(), "lambda", "exponent", true, true,
                      {sc, sr}, std::nullopt};
}

void cmd_kernel(const Params& p, Output& o) {
    const std::string which = p.str("which");
    if (which != "green" && which != "jump") throw ConfigError("key 'which' must be 'green' or 'jump'");
    const KernelEvaluator ke(SubordinatorModel(p.family()), p.dim(), kernel_options(p));
    const bool g = which == "green";
    o.table.header = {"r", "value", "predicted", "ratio"};
    PlotSeries sv{which, {}, {}}, sp{"predicted", {}, {}};
    for (double r : p.list("r")) {
        const double v = g ? ke.green(r) : ke.jump(r);
        const double pr = g ? ke.green_predicted(r) : ke.jump_predicted(r);
        o.table.add({r, v, pr, v / pr});
        sv.x.push_back(r);
        sv.y.push_back(v);
        sp.x.push_back(r);
        sp.y.push_back(pr);
    }
    o.plot = PlotSpec{which + " kernel, " + ke.model().family().describe() + ", d = " + std::to_string(p.dim()), "r",
                      which, true, true, {sv, sp}, std::nullopt};
}

void cmd_simulate(const Params& p, Output& o) {
    const SubordinatorModel model(p.family());
    const int d = p.dim();
    const double radius = p.num("radius");
    const Domain domain = make_domain(p.str("domain"), d, radius);
    const Point x = p.point("x");
    if (!domain.contains(x)) throw ConfigError("key 'x': starting point lies outside the domain");
    const std::size_t n = p.count("paths");
    const double dt = p.num("dt");
    if (!(dt > 0)) throw ConfigError("key 'dt' must be positive");
    const double scale = domain.kind() == DomainKind::Ball || domain.kind() == DomainKind::Box ? radius : 1.0;
    McOptions mc;
    mc.seed = p.seed();
    mc.refine_levels = int(p.integer("refine_levels"));
    mc.dt_scale = dt / time_scale(model, scale);
    PathConfig cfg = path_config_for(model, scale, mc);
    cfg.dt = dt;
    const PathSimulator sim(model, cfg);
    const auto exits = simulate_exits(sim, domain, x, n, derive_seed(p.seed(), "simulate"), p.workers());

    o.table.header = {"path_id", "exit_time"};
    for (int k = 0; k < d; ++k) o.table.header.push_back("exit_x" + std::to_string(k));
    o.table.header.push_back("jumped");
    std::vector<double> times;
    std::size_t jumped = 0;
    for (std::size_t i = 0; i < exits.size(); ++i) {
        const auto& e = exits[i];
        std::vector<double> row{double(i), e.exit_time};
        for (int k = 0; k < d; ++k) row.push_back(e.exit_point[k]);
        row.push_back(e.jumped ? 1.0 : 0.0);
        o.table.add(row);
        times.push_back(e.exit_time);
        jumped += e.jumped;
    }

    VerificationReport rep;
    rep.theorem_tag = "exit_time_sample";
    rep.info["family"] = model.family().describe();
    rep.info["domain"] = domain.name();
    const MeanSE m = mean_se(times);
    rep.constants["mean"] = m.mean;
    rep.constants["se"] = m.se;
    rep.constants["paths"] = double(n);
    rep.constants["dt"] = dt;
    rep.constants["jumped_fraction"] = double(jumped) / double(n);
    rep.mc_se = m.mean > 0 ? m.se / m.mean : 0.0;
    rep.add("exit times are finite and positive", "N = " + std::to_string(n), m.mean,
            std::isfinite(m.mean) && m.mean > 0);
    if (domain.kind() == DomainKind::Ball && model.family().kind() == Family::Stable) {
        const double exact = stable_ball_exit_time(model.alpha(), d, radius, norm(x));
        const double band = std::max(3 * m.se, 0.01 * exact);
        rep.constants["exact"] = exact;
        rep.add("mean exit time matches the closed form within max(3 SE, 1%)",
                "x = (" + fmt(x[0]) + ", " + fmt(x[1]) + ", " + fmt(x[2]) + ")", std::fabs(m.mean - exact),
                std::fabs(m.mean - exact) <= band);
    }
    o.reports.push_back(rep);

    if (p.flag("coupled")) {
        if (domain.kind() != DomainKind::Ball) throw ConfigError("key 'coupled' needs the ball domain");
        ExitOracleOptions eo;
        eo.d = d;
        eo.radius = radius;
        eo.x = x;
        eo.paths = n;
        eo.dt = dt;
        eo.seed = p.seed();
        eo.workers = p.workers();
        eo.refine_levels = mc.refine_levels;
        o.reports.push_back(verify_exit_time_oracle(model, eo));
    }
}

void cmd_special_identity(const Params& p, Output& o) {
    const BernsteinFamily f = p.family();
    const LadderData ladder(f, ladder_options(p));
    auto rep = verify_special_identity(ladder, p.num("lambda_lo"), p.num("lambda_hi"), int(p.count("points")),
                                       p.num("tolerance"));
    const auto lam = series_or_empty(rep, "lambda"), c = series_or_empty(rep, "chi"),
               r = series_or_empty(rep, "rho"), prod = series_or_empty(rep, "product_over_lambda");
    o.table.header = {"lambda", "chi", "rho", "product_over_lambda"};
    for (std::size_t i = 0; i < lam.size(); ++i) o.table.add({lam[i], c[i], r[i], prod[i]});
    PlotSpec plot{"chi rho / lambda for " + f.describe(), "lambda", "chi rho / lambda", true, false,
                  {{"chi rho / lambda", lam, prod}}, 1.0};
    o.plot = plot;
    o.reports.push_back(std::move(rep));
    if (p.flag("ladder_limit")) o.reports.push_back(verify_ladder_limit(ladder));
}

void cmd_asymptotics(const Params& p, Output& o) {
    const std::string which = p.str("which");
    if (which != "green" && which != "jump") throw ConfigError("key 'which' must be 'green' or 'jump'");
    const KernelEvaluator ke(SubordinatorModel(p.family()), p.dim(), kernel_options(p));
    auto rep = verify_kernel_asymptotics(ke, p.list("r"), p.num("tolerance"));
    const auto r = series_or_empty(rep, "r");
    const auto v = series_or_empty(rep, which), pr = series_or_empty(rep, which + "_predicted"),
               ratio = series_or_empty(rep, which + "_ratio");
    o.table.header = {"r", "value", "predicted", "ratio"};
    for (std::size_t i = 0; i < r.size(); ++i) o.table.add({r[i], v[i], pr[i], ratio[i]});
    o.plot = PlotSpec{"kernel / prediction, " + ke.model().family().describe() + ", d = " + std::to_string(p.dim()),
                      "r",
                      "ratio to prediction",
                      true,
                      false,
                      {{"Green function", r, series_or_empty(rep, "green_ratio")},
                       {"jump kernel", r, series_or_empty(rep, "jump_ratio")}},
                      1.0};
    o.reports.push_back(std::move(rep));
}

void cmd_regvar(const Params& p, Output& o) {
    const BernsteinFamily f = p.family();
    RegvarOptions ro;
    ro.r_min = p.num("r_min");
    ro.points = int(p.count("points"));
    ro.stability = p.num("stability");
    const double r4 = p.num("r4") > 0 ? p.num("r4") : default_r4(f, ro);
    auto rep = check_regvar_inequalities(f, r4, ro);
    o.table.header = {"inequality", "C", "C_coarse", "refinement_change"};
    for (const auto& name : regvar_inequality_names())
        o.table.rows.push_back({name, fmt(rep.constants.at(name + "_C")), fmt(rep.constants.at(name + "_C_coarse")),
                                fmt(rep.constants.at(name + "_refinement_change"))});
    o.reports.push_back(std::move(rep));
}

void cmd_conditions(const Params& p, Output& o) {
    const BernsteinFamily f = p.family();
    o.reports.push_back(check_condition_2_5(f));
    AssumptionOptions ao;
    ao.dimension = p.dim();
    o.reports.push_back(check_A1_A4(SubordinatorModel(f), ao));
    o.table.header = {"theorem_tag", "assumption", "constant", "pass"};
    for (const auto& r : o.reports)
        for (const auto& c : r.checks)
            o.table.rows.push_back({r.theorem_tag, c.assumption, fmt(c.constant), c.pass ? "1" : "0"});
}

void cmd_harnack(const Params& p, Output& o) {
    HarnackOptions ho;
    ho.d = p.dim();
    ho.radii = p.list("radii");
    ho.mc = boundary_mc(p, p.count("paths"));
    const SubordinatorModel model(p.family());
    auto rep = verify_harnack(model, ho);
    const auto r = series_or_empty(rep, "r"), c = series_or_empty(rep, "sup_over_inf");
    o.table.header = {"r", "sup_over_inf"};
    for (std::size_t i = 0; i < r.size(); ++i) o.table.add({r[i], c[i]});
    o.plot = PlotSpec{"Harnack ratio, " + model.family().describe() + ", d = " + std::to_string(ho.d), "r",
                      "sup / inf", true, true, {{"sup / inf", r, c}}, std::nullopt};
    o.reports.push_back(std::move(rep));
}

void cmd_boundary(const Params& p, Output& o, bool bhp) {
    const SubordinatorModel model(p.family());
    const int d = p.dim();
    BoundaryOptions bo;
    bo.radii = p.list("radii");
    bo.q_list = p.points("q");
    bo.mc = boundary_mc(p, p.count("paths_per_point"));
    const auto keys = split(p.str("domain"), ',');
    if (keys.empty()) throw ConfigError("key 'domain' is empty");
    if (keys.size() > 1 && !bo.q_list.empty()) throw ConfigError("key 'q' needs a single domain");
    PlotSpec plot{std::string(bhp ? "BHP" : "Carleson") + " constant, " + model.family().describe() + ", d = " +
                      std::to_string(d),
                  "r", "C_emp", true, true, {}, std::nullopt};
    o.table.header = {"domain", "q_index", "r", "C_emp"};
    json summary = json::array();
    for (const auto& key : keys) {
        const Domain domain = make_domain(key, d, 1.0);
        auto rep = bhp ? verify_bhp(model, domain, bo) : verify_carleson(model, domain, bo);
        const auto r = series_or_empty(rep, "r_grid");
        for (int qi = 0;; ++qi) {
            const auto c = series_or_empty(rep, qi == 0 ? "C_emp" : "C_emp_q" + std::to_string(qi));
            if (c.empty()) break;
            for (std::size_t i = 0; i < r.size(); ++i)
                o.table.rows.push_back({domain.name(), std::to_string(qi), fmt(r[i]), fmt(c[i])});
        }
        const auto c0 = series_or_empty(rep, "C_emp");
        plot.series.push_back({domain.name(), r, c0});
        summary.push_back({{"domain", domain.name()},
                           {"r_grid", r},
                           {"C_emp", c0},
                           {"slope", rep.constants.count("slope") ? rep.constants.at("slope") : NAN},
                           {"pass", rep.pass()}});
        o.reports.push_back(std::move(rep));
    }
    o.plot = plot;
    o.extra["theorem_tag"] = o.reports.front().theorem_tag;
    o.extra["family"] = family_key(model.family().kind());
    o.extra["summary"] = summary;
    if (summary.size() == 1) {
        o.extra["domain"] = summary[0]["domain"];
        o.extra["r_grid"] = summary[0]["r_grid"];
        o.extra["C_emp"] = summary[0]["C_emp"];
        o.extra["slope"] = summary[0]["slope"];
    } else {
        o.extra["domain"] = p.str("domain");
    }
}

void cmd_exit_bounds(const Params& p, Output& o) {
    const SubordinatorModel model(p.family());
    EnvelopeOptions eo;
    eo.d = p.dim();
    eo.radii = p.list("radii");
    eo.mc.paths = p.count("paths");
    eo.mc.workers = p.workers();
    eo.mc.seed = p.seed();
    eo.mc.dt_scale = p.num("dt_scale");
    auto env = verify_exit_time_envelopes(model, eo);
    const auto r = series_or_empty(env, "r"), up = series_or_empty(env, "upper_constant"),
               lo = series_or_empty(env, "lower_constant");
    o.table.header = {"r", "upper_constant", "lower_constant"};
    for (std::size_t i = 0; i < r.size(); ++i) o.table.add({r[i], up[i], lo[i]});
    o.plot = PlotSpec{"exit-time envelope constants, " + model.family().describe(), "r", "constant", true, true,
                      {{"upper", r, up}, {"lower", r, lo}}, std::nullopt};
    o.reports.push_back(std::move(env));
    if (p.flag("poisson")) {
        const KernelEvaluator ke(model, eo.d, kernel_options(p));
        PoissonKernelOptions po;
        po.mc.paths = p.count("poisson_paths");
        po.mc.workers = p.workers();
        po.mc.seed = p.seed();
        po.mc.dt_scale = p.num("poisson_dt_scale");
        o.reports.push_back(estimate_poisson_kernel(ke, po));
    }
}

double auto_bandwidth(const Domain& domain, const Point& x0, const std::vector<Point>& xs, const Point& z,
                      double r0, int levels, std::size_t n) {
    double cap = std::numeric_limits<double>::infinity();
    const Point nz = domain.outward_normal(z);
    std::vector<Point> eval{x0};
    eval.insert(eval.end(), xs.begin(), xs.end());
    for (const auto& e : eval) {
        cap = std::min(cap, domain.distance_to_boundary(e));
        for (int m = 1; m <= levels; ++m) cap = std::min(cap, distance(e, add(z, nz, -std::ldexp(r0, -m))) / 2);
    }
    return std::min(default_bandwidth(domain.dimension(), n, 1.2), 0.99 * cap);
}

void cmd_martin(const Params& p, Output& o) {
    const SubordinatorModel model(p.family());
    const int d = p.dim();
    const Domain domain = make_domain(p.str("domain"), d, 1.0);
    const Point z = p.point("z"), x0 = p.point("x0");
    const auto xs = p.points("x_grid");
    const double r0 = p.num("r0");
    const int levels = int(p.count("levels"));
    const std::size_t n = p.count("paths");
    if (domain.contains(z)) throw ConfigError("key 'z' must be a boundary point, not an interior one");
    const double b = p.num("bandwidth") > 0 ? p.num("bandwidth") : auto_bandwidth(domain, x0, xs, z, r0, levels, n);
    const auto probe = MartinProbe::along_normal(domain, z, x0, xs, r0, levels, b);

    const double dt = p.num("dt");
    if (!(dt > 0)) throw ConfigError("key 'dt' must be positive");
    McOptions mc;
    mc.seed = p.seed();
    mc.refine_levels = int(p.integer("refine_levels"));
    mc.dt_scale = dt / time_scale(model, 1.0);
    PathConfig cfg = path_config_for(model, 1.0, mc);
    cfg.dt = dt;

    const auto table = estimate_martin(probe, model, cfg, n, p.workers());
    auto rep = martin_report(probe, model, cfg, table, p.workers());
    o.table.header = {"level", "distance_to_z"};
    for (std::size_t k = 0; k < xs.size(); ++k) {
        o.table.header.push_back("M_x" + std::to_string(k));
        o.table.header.push_back("se_x" + std::to_string(k));
    }
    const auto dist = series_or_empty(rep, "distance_to_z");
    PlotSpec plot{"Martin kernel along the approach to z", "|y - z|", "M(x, y)", true, false, {}, std::nullopt};
    for (std::size_t m = 0; m < table.m.size(); ++m) {
        std::vector<double> row{double(m + 1), dist[m]};
        for (std::size_t k = 0; k < xs.size(); ++k) {
            row.push_back(table.m[m][k]);
            row.push_back(table.se[m][k]);
        }
        o.table.add(row);
    }
    for (std::size_t k = 0; k < xs.size(); ++k)
        plot.series.push_back({"x" + std::to_string(k), dist, series_or_empty(rep, "M_x" + std::to_string(k))});
    const auto limits = series_or_empty(rep, "limit_exact");
    if (limits.size() == 1) {
        plot.reference = limits[0];
        plot.reference_label = "limit";
    }
    o.plot = plot;
    o.reports.push_back(std::move(rep));
    o.reports.push_back(oscillation_decay(probe, table));
    if (p.integer("growth_levels") > 0) {
        GrowthOptions go;
        go.mc.seed = p.seed();
        go.mc.workers = p.workers();
        o.reports.push_back(growth_lemma_check(model, domain, z, p.num("growth_r"), int(p.integer("growth_levels")),
                                               p.count("growth_paths"), go));
    }
}

}  // namespace

// ---------------------------------------------------------------------------

const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> n;
        for (const auto& [k, v] : schemas()) n.push_back(k);
        return n;
    }();
    return names;
}

const std::vector<Param>& command_schema(const std::string& command) {
    const auto it = schemas().find(command);
    if (it == schemas().end()) throw ConfigError("unknown command '" + command + "'");
    return it->second;
}

json RunConfig::to_json() const { return {{"command", command}, {"params", params}}; }

RunConfig RunConfig::from_json(const json& doc, const std::string& command) {
    if (!doc.is_object()) throw ConfigError("config must be a JSON object");
    std::string cmd = command;
    if (doc.contains("command")) {
        if (!doc["command"].is_string()) throw ConfigError("key 'command' must be a string");
        const std::string named = doc["command"].get<std::string>();
        if (!cmd.empty() && named != cmd)
            throw ConfigError("key 'command': config is for '" + named + "', not '" + cmd + "'");
        cmd = named;
    }
    if (cmd.empty()) throw ConfigError("key 'command' is missing");
    json flat = json::object();
    for (const auto& [k, v] : doc.items()) {
        if (k == "command") continue;
        if (k == "params") {
            if (!v.is_object()) throw ConfigError("key 'params' must be an object");
            for (const auto& [pk, pv] : v.items()) flat[pk] = pv;
        } else {
            flat[k] = v;
        }
    }
    return resolve_config(cmd, flat, json::object());
}

RunConfig resolve_config(const std::string& command, const json& file, const json& flags) {
    const auto& schema = command_schema(command);
    RunConfig cfg;
    cfg.command = command;
    for (const auto& p : schema) cfg.params[p.name] = p.default_value;
    for (const json* layer : {&file, &flags}) {
        if (layer->is_null()) continue;
        if (!layer->is_object()) throw ConfigError("config must be a JSON object");
        for (const auto& [k, v] : layer->items()) {
            const auto it = std::find_if(schema.begin(), schema.end(), [&](const Param& p) { return p.name == k; });
            if (it == schema.end()) throw ConfigError("unknown key '" + k + "' for command '" + command + "'");
            cfg.params[k] = coerce(*it, v, command);
        }
    }
    return cfg;
}

json parse_flag_value(const Param& p, const std::string& text) {
    switch (p.type) {
        case ParamType::Num:
            return parse_number(p.name, text);
        case ParamType::OptNum:
            if (trim(text) == "none" || trim(text) == "null") return nullptr;
            return parse_number(p.name, text);
        case ParamType::Int: {
            const double v = parse_number(p.name, text);
            if (std::floor(v) != v || std::fabs(v) > 9e15)
                throw ConfigError("key '" + p.name + "': '" + text + "' is not an integer");
            return std::int64_t(v);
        }
        case ParamType::Str:
            return text;
        case ParamType::Bool: {
            const std::string t = trim(text);
            if (t == "true" || t == "1" || t == "yes") return true;
            if (t == "false" || t == "0" || t == "no") return false;
            throw ConfigError("key '" + p.name + "': '" + text + "' is not a boolean");
        }
        case ParamType::NumList:
            return parse_numbers(p.name, text, ',');
        case ParamType::Point: {
            json v = parse_numbers(p.name, text, ',');
            if (v.empty() || v.size() > 3) throw ConfigError("key '" + p.name + "': a point has one to three coordinates");
            return v;
        }
        case ParamType::PointList: {
            json out = json::array();
            if (trim(text).empty()) return out;
            for (const auto& part : split(text, ';')) {
                json v = parse_numbers(p.name, part, ',');
                if (v.empty() || v.size() > 3)
                    throw ConfigError("key '" + p.name + "': a point has one to three coordinates");
                out.push_back(v);
            }
            return out;
        }
    }
    return text;
}

RunResult execute(const RunConfig& config) {
    const auto checked = resolve_config(config.command, config.params, json::object());
    const Params p{checked.params};
    Output o;
    const std::string& c = checked.command;
    if (c == "phi") cmd_phi(p, o);
    else if (c == "chi") cmd_chi(p, o);
    else if (c == "kernel") cmd_kernel(p, o);
    else if (c == "simulate") cmd_simulate(p, o);
    else if (c == "martin") cmd_martin(p, o);
    else if (c == "verify special-identity") cmd_special_identity(p, o);
    else if (c == "verify asymptotics") cmd_asymptotics(p, o);
    else if (c == "verify regvar") cmd_regvar(p, o);
    else if (c == "verify conditions") cmd_conditions(p, o);
    else if (c == "verify harnack") cmd_harnack(p, o);
    else if (c == "verify bhp") cmd_boundary(p, o, true);
    else if (c == "verify carleson") cmd_boundary(p, o, false);
    else if (c == "verify exit-bounds") cmd_exit_bounds(p, o);
    else throw ConfigError("unknown command '" + c + "'");

    const double tol_se = p.num("tol_mc_se");
    if (tol_se > 0)
        for (auto& r : o.reports)
            if (r.mc_se > 0)
                r.add("relative Monte Carlo standard error <= " + fmt(tol_se), "largest over the report", r.mc_se,
                      r.mc_se <= tol_se);

    RunResult res;
    res.pass = std::all_of(o.reports.begin(), o.reports.end(), [](const VerificationReport& r) { return r.pass(); });
    json embedded = checked.to_json();
    for (const auto& k : kArtifactKeys) embedded["params"].erase(k);
    json doc = {{"tool", "sbmkit"}, {"version", version()}, {"config", embedded}, {"pass", res.pass}};
    json reports = json::array();
    for (const auto& r : o.reports) reports.push_back(r.to_json());
    doc["reports"] = reports;
    if (o.reports.empty()) {
        // Tables of plain evaluations travel inside the document too.
        doc["table"] = {{"columns", o.table.header}, {"rows", o.table.values}};
    }
    for (const auto& [k, v] : o.extra.items()) doc[k] = v;
    doc["pass"] = res.pass;
    res.document = std::move(doc);
    res.csv_header = std::move(o.table.header);
    res.csv_rows = std::move(o.table.rows);
    if (o.plot) res.plots.push_back(std::move(*o.plot));
    return res;
}

std::string to_csv(const RunResult& result) {
    std::ostringstream s;
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) s << (i ? "," : "") << cells[i];
        s << "\n";
    };
    line(result.csv_header);
    for (const auto& r : result.csv_rows) line(r);
    return s.str();
}

namespace {

void write_file(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot open " + path + " for writing");
    f << text;
    if (!f) throw ConfigError("failed writing " + path);
}

}  // namespace

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
    try {
        const RunResult res = execute(config);
        const json& params = config.params;
        auto path = [&](const char* k) {
            return params.contains(k) && params[k].is_string() ? params[k].get<std::string>() : std::string();
        };
        const std::string report_path = path("report"), csv_path = path("out"), plot_path = path("plot");
        if (!plot_path.empty()) {
            if (res.plots.empty()) throw ConfigError("key 'plot': command '" + config.command + "' draws no plot");
            try {
                emit_plot(res.plots.front(), plot_path);
            } catch (const std::runtime_error& e) {
                throw ConfigError(e.what());
            }
        }
        if (!csv_path.empty()) write_file(csv_path, to_csv(res));
        const std::string doc = res.document.dump(2) + "\n";
        if (report_path.empty()) out << doc;
        else write_file(report_path, doc);
        if (!res.pass) err << "sbmkit: verification failed\n";
        return res.pass ? 0 : 1;
    } catch (const QuadratureError& e) {
        err << "sbmkit: numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const InversionError& e) {
        err << "sbmkit: numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const SimulationError& e) {
        err << "sbmkit: numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        err << "sbmkit: error: " << e.what() << "\n";
        return 2;
    } catch (const std::domain_error& e) {
        err << "sbmkit: error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "sbmkit: numerical failure: " << e.what() << "\n";
        return 3;
    }
}

static std::string command_summary(const std::string& name) {
    static const std::map<std::string, std::string> text{
        {"phi", "Laplace exponent phi and slowly varying factor ell on a lambda grid"},
        {"chi", "ladder exponents chi and rho on a lambda grid"},
        {"kernel", "free Green function or jump kernel against its small-r prediction"},
        {"simulate", "exit times and positions from a catalog domain"},
        {"martin", "Monte Carlo Martin kernel along a normal approach to a boundary point"},
        {"verify special-identity", "chi(lambda) rho(lambda) = lambda on a grid"},
        {"verify asymptotics", "kernel ratios to their predictions as r decreases"},
        {"verify regvar", "regular-variation inequalities with grid-doubling stability"},
        {"verify conditions", "integrability condition and assumptions A1-A4"},
        {"verify harnack", "Harnack ratio over half balls across radii"},
        {"verify bhp", "boundary Harnack constant across dyadic radii"},
        {"verify carleson", "Carleson ratio across dyadic radii"},
        {"verify exit-bounds", "exit-time envelopes and the Poisson kernel on balls"},
    };
    const auto it = text.find(name);
    return it == text.end() ? std::string() : it->second;
}

int cli_main(int argc, char** argv) {
    CLI::App app{"sbmkit: numerical potential theory for subordinate Brownian motion"};
    app.set_version_flag("--version", version());
    app.require_subcommand(1);
    std::string config_path;
    std::map<std::string, std::map<std::string, std::string>> raw;
    std::map<std::string, std::map<std::string, CLI::Option*>> opts;
    std::map<std::string, CLI::App*> leaves;
    CLI::App* verify = app.add_subcommand("verify", "check a statement numerically");
    verify->require_subcommand(1);

    for (const auto& name : command_names()) {
        const bool is_verify = name.rfind("verify ", 0) == 0;
        const std::string leaf = is_verify ? name.substr(7) : name;
        CLI::App* sub = (is_verify ? verify : &app)->add_subcommand(leaf, command_summary(name));
        sub->add_option("--config", config_path, "JSON config file; flags override its values");
        for (const auto& p : command_schema(name)) {
            std::string flag = "--" + p.name;
            std::replace(flag.begin(), flag.end(), '_', '-');
            std::string help = p.help;
            if (!p.default_value.is_null() && !(p.default_value.is_string() && p.default_value.get<std::string>().empty()))
                help += " [" + p.default_value.dump() + "]";
            auto* o = sub->add_option(flag, raw[name][p.name], help);
            if (p.type == ParamType::Bool) o->expected(0, 1)->default_str("true");
            if (p.type == ParamType::Num || p.type == ParamType::OptNum || p.type == ParamType::Point ||
                p.type == ParamType::NumList || p.type == ParamType::PointList)
                o->allow_extra_args(false);
            opts[name][p.name] = o;
        }
        leaves[name] = sub;
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    std::string command;
    for (const auto& [name, sub] : leaves)
        if (sub->parsed()) command = name;
    try {
        json flags = json::object();
        for (const auto& p : command_schema(command)) {
            const auto* o = opts[command][p.name];
            if (o->count() == 0) continue;
            const std::string& text = raw[command][p.name];
            flags[p.name] = p.type == ParamType::Bool && text.empty() ? json(true) : parse_flag_value(p, text);
        }
        json file = json::object();
        if (!config_path.empty()) {
            std::ifstream f(config_path);
            if (!f) throw ConfigError("cannot read config file " + config_path);
            try {
                file = json::parse(f);
            } catch (const json::parse_error& e) {
                throw ConfigError("config file " + config_path + " is not valid JSON: " + e.what());
            }
            RunConfig from_file = RunConfig::from_json(file, command);
            file = from_file.params;
        }
        const RunConfig cfg = resolve_config(command, file, flags);
        return run(cfg, std::cout, std::cerr);
    } catch (const ConfigError& e) {
        std::cerr << "sbmkit: error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace sbmkit
