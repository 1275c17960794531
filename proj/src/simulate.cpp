#include "sbmkit/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

namespace sbmkit {

namespace {
constexpr double kPi = 3.14159265358979323846;

double pairwise_sum(const double* v, std::size_t n) {
    if (n <= 16) {
        double s = 0;
        for (std::size_t i = 0; i < n; ++i) s += v[i];
        return s;
    }
    const std::size_t h = n / 2;
    return pairwise_sum(v, h) + pairwise_sum(v + h, n - h);
}
}  // namespace

void PathConfig::validate() const {
    if (!(dt > 0)) throw std::invalid_argument("dt must be positive");
    if (!(t_max > dt)) throw std::invalid_argument("t_max must exceed dt");
    if (!(eps_jump > 0)) throw std::invalid_argument("eps_jump must be positive");
    if (refine_levels < 0 || refine_levels > 20) throw std::invalid_argument("refine_levels must lie in [0, 20]");
    if (!(near_factor >= 0)) throw std::invalid_argument("near_factor must be nonnegative");
    if (!(adaptive >= 0)) throw std::invalid_argument("adaptive must be nonnegative");
    if (adaptive > 0 && !(dt_max >= dt)) throw std::invalid_argument("adaptive steps need dt_max >= dt");
}

// ---------------------------------------------------------------------------
// Compound-Poisson table for the log-weight families: jumps above eps from mu
// on a log grid with power-law pieces, plus the mean of the jumps below eps.

struct IncrementSampler::JumpTable {
    std::vector<double> s, mu, tail;  // tail[k] = int_{s[k]}^inf mu
    double tail_slope = 0;            // mu ~ s^{tail_slope} beyond the grid
    double rate = 0, drift = 0;

    double sample(RandomStream& rng) const {
        const double v = rng.uniform() * rate;
        const std::size_t n = s.size();
        if (v <= tail[n - 1]) return s[n - 1] * std::pow(v / tail[n - 1], 1 / (tail_slope + 1));
        // tail is decreasing: first k with tail[k+1] < v <= tail[k]
        std::size_t lo = 0, hi = n - 1;
        while (hi - lo > 1) {
            const std::size_t mid = (lo + hi) / 2;
            if (tail[mid] >= v) lo = mid; else hi = mid;
        }
        const double m = tail[lo] - v;
        const double p = std::log(mu[lo + 1] / mu[lo]) / std::log(s[lo + 1] / s[lo]);
        const double base = mu[lo] * s[lo];
        if (std::fabs(p + 1) < 1e-12) return s[lo] * std::exp(m / base);
        return s[lo] * std::pow(1 + m * (p + 1) / base, 1 / (p + 1));
    }
};

namespace {

// int_a^b of c (x/a)^p dx with c = f(a), p from the two endpoint values.
double power_piece(double a, double fa, double b, double fb) {
    const double p = std::log(fb / fa) / std::log(b / a);
    if (std::fabs(p + 1) < 1e-12) return fa * a * std::log(b / a);
    return fa * a * (std::pow(b / a, p + 1) - 1) / (p + 1);
}

}  // namespace

IncrementSampler::IncrementSampler(const SubordinatorModel& model, double eps_jump)
    : kind_(model.family().kind()), alpha_(model.alpha()), beta_(model.family().beta().value_or(0)) {
    if (kind_ != Family::LogWeightPos && kind_ != Family::LogWeightNeg) return;
    if (!(eps_jump > 0)) throw std::invalid_argument("eps_jump must be positive");
    auto t = std::make_shared<JumpTable>();
    const int per_decade = 32;
    const double hi = 1e12, lo = eps_jump * 1e-4;
    const auto table = model.tabulate_mu(lo, hi, per_decade);
    const int n_up = int(std::ceil(std::log10(hi / eps_jump) * per_decade));
    for (int k = 0; k <= n_up; ++k) {
        const double s = eps_jump * std::pow(hi / eps_jump, double(k) / n_up);
        t->s.push_back(s);
        t->mu.push_back((*table)(s));
    }
    const std::size_t n = t->s.size();
    t->tail_slope = std::log(t->mu[n - 1] / t->mu[n - 2]) / std::log(t->s[n - 1] / t->s[n - 2]);
    if (!(t->tail_slope < -1)) throw SimulationError("Levy density tail is not integrable on the tabulated range");
    t->tail.assign(n, 0.0);
    t->tail[n - 1] = t->mu[n - 1] * t->s[n - 1] / (-t->tail_slope - 1);
    for (std::size_t k = n - 1; k-- > 0;)
        t->tail[k] = t->tail[k + 1] + power_piece(t->s[k], t->mu[k], t->s[k + 1], t->mu[k + 1]);
    t->rate = t->tail[0];
    // Mean of the jumps below eps: int_0^eps s mu(s) ds, power-law below lo.
    const int n_dn = 4 * per_decade;
    double drift = 0, prev_s = lo, prev_f = lo * (*table)(lo);
    for (int k = 1; k <= n_dn; ++k) {
        const double s = lo * std::pow(eps_jump / lo, double(k) / n_dn);
        const double f = s * (*table)(s);
        if (k == 1) {
            const double p = std::log(f / prev_f) / std::log(s / prev_s);
            if (!(p > -1)) throw SimulationError("small-jump mean diverges");
            drift += prev_f * prev_s / (p + 1);
        }
        drift += power_piece(prev_s, prev_f, s, f);
        prev_s = s;
        prev_f = f;
    }
    t->drift = drift;
    jumps_ = t;
}

double IncrementSampler::positive_stable(double a, double h, RandomStream& rng) {
    if (a == 0.5) {
        const double z = rng.normal();
        return h * h / (2 * z * z);
    }
    // Kanter's representation of the one-sided stable law.
    const double u = kPi * rng.uniform();
    const double e = rng.exponential();
    const double s = std::sin(a * u) / std::pow(std::sin(u), 1 / a) * std::pow(std::sin((1 - a) * u) / e, (1 - a) / a);
    return std::pow(h, 1 / a) * s;
}

double IncrementSampler::operator()(double h, RandomStream& rng) const {
    switch (kind_) {
        case Family::Stable: return positive_stable(alpha_ / 2, h, rng);
        case Family::StableMixture: return positive_stable(alpha_ / 2, h, rng) + positive_stable(beta_ / 2, h, rng);
        case Family::Relativistic:
            for (int i = 0; i < max_proposals; ++i) {
                const double s = positive_stable(alpha_ / 2, h, rng);
                if (rng.uniform() < std::exp(-s)) return s;
            }
            throw SimulationError("relativistic rejection sampler exceeded its proposal budget; reduce dt");
        case Family::LogWeightPos:
        case Family::LogWeightNeg: {
            std::poisson_distribution<long> count(h * jumps_->rate);
            const long k = count(rng);
            double s = h * jumps_->drift;
            for (long i = 0; i < k; ++i) s += jumps_->sample(rng);
            return s;
        }
    }
    return 0.0;
}

double IncrementSampler::jump_rate() const { return jumps_ ? jumps_->rate : 0.0; }
double IncrementSampler::drift() const { return jumps_ ? jumps_->drift : 0.0; }

double sample_subordinator_increment(const IncrementSampler& sampler, double dt, RandomStream& rng) {
    if (!(dt > 0)) throw std::invalid_argument("dt must be positive");
    return sampler(dt, rng);
}

// ---------------------------------------------------------------------------

PathSimulator::PathSimulator(SubordinatorModel model, PathConfig cfg)
    : model_(std::move(model)), cfg_(cfg), sampler_(model_, cfg.eps_jump) {
    cfg_.validate();
    cauchy_ = model_.family().kind() == Family::Stable && model_.alpha() == 1.0;
    near_ = cfg_.near_factor * sigma(cfg_.dt);
    near_fine_ = cfg_.near_factor * sigma(cfg_.dt / 2);
}

double PathSimulator::sigma(double h) const {
    if (cauchy_) return std::sqrt(2.0) * h;
    return std::sqrt(2 / phi_inverse(model_.family(), 1 / h));
}

Point PathSimulator::displacement(double h, int d, RandomStream& rng) const {
    Point v{0, 0, 0};
    double scale;
    if (cauchy_) {
        scale = h / std::fabs(rng.normal());
    } else {
        scale = std::sqrt(2 * sampler_(h, rng));
    }
    for (int i = 0; i < d; ++i) v[i] = scale * rng.normal();
    return v;
}

double PathSimulator::step_length(double dist) const {
    if (cfg_.adaptive <= 0 || dist <= near_) return cfg_.dt;
    const double r = dist / cfg_.adaptive;
    const double h = 1 / model_.phi(1 / (r * r));
    return std::clamp(h, cfg_.dt, cfg_.dt_max);
}

ExitRecord PathSimulator::run(const Domain& domain, const Point& start, RandomStream& rng,
                              const StepObserver* observer, const StopPredicate* stop) const {
    if (!domain.contains(start)) throw std::invalid_argument("start point is not in the domain");
    const int d = domain.dimension();
    const int sub = 1 << cfg_.refine_levels;
    const double hs = cfg_.dt / sub;
    ExitRecord rec;
    rec.start = start;
    Point x = start;
    double t = 0;
    auto finish = [&](const Point& y, double h) {
        rec.exit_time = t;
        rec.exit_point = y;
        rec.pre_jump_point = x;
        rec.jumped = distance(x, y) > 3 * sigma(h);
        return rec;
    };
    for (;;) {
        const double dist = domain.distance_to_boundary(x);
        if (dist < near_) {
            for (int k = 0; k < sub; ++k) {
                if (observer) (*observer)(x, hs);
                const Point y = add(x, displacement(hs, d, rng));
                t += hs;
                ++rec.steps;
                if (!domain.contains(y)) return finish(y, hs);
                x = y;
            }
        } else {
            const double h = step_length(dist);
            if (observer) (*observer)(x, h);
            const Point y = add(x, displacement(h, d, rng));
            t += h;
            ++rec.steps;
            if (!domain.contains(y)) return finish(y, h);
            x = y;
        }
        if (stop && (*stop)(x)) {
            rec.exit_time = t;
            rec.exit_point = x;
            rec.pre_jump_point = x;
            rec.stopped = true;
            return rec;
        }
        if (t > cfg_.t_max) {
            std::ostringstream msg;
            msg << "path still inside the domain at t_max = " << cfg_.t_max;
            throw HorizonError(msg.str());
        }
    }
}

ExitPair PathSimulator::run_coupled(const Domain& domain, const Point& start, RandomStream& rng) const {
    if (!domain.contains(start)) throw std::invalid_argument("start point is not in the domain");
    if (cfg_.adaptive > 0) throw std::invalid_argument("coupled runs use fixed steps (adaptive = 0)");
    const int d = domain.dimension();
    const int half = 1 << cfg_.refine_levels;  // substeps per half step
    const double u = cfg_.dt / (2 * half);     // finest substep
    struct Level {
        bool alive = true;
        Point last{};
        std::uint64_t last_n = 0;
        ExitRecord rec;
    };
    Level coarse, fine;
    for (Level* l : {&coarse, &fine}) {
        l->last = start;
        l->rec.start = start;
    }
    std::uint64_t n = 0;  // elapsed time in units of u
    Point x = start;
    auto monitor = [&](Level& l) {
        ++l.rec.steps;
        if (domain.contains(x)) {
            l.last = x;
            l.last_n = n;
            return;
        }
        l.alive = false;
        l.rec.exit_time = n * u;
        l.rec.exit_point = x;
        l.rec.pre_jump_point = l.last;
        l.rec.jumped = distance(x, l.last) > 3 * sigma((n - l.last_n) * u);
    };
    auto half_step = [&](bool substep, bool fine_all, bool coarse_all, bool coarse_end) {
        if (!substep) {
            x = add(x, displacement(half * u, d, rng));
            n += half;
            if (fine.alive) monitor(fine);
            if (coarse_end && coarse.alive) monitor(coarse);
            return;
        }
        for (int j = 1; j <= half; ++j) {
            x = add(x, displacement(u, d, rng));
            ++n;
            if (fine.alive && (fine_all || j == half)) monitor(fine);
            if (coarse.alive && ((coarse_all && j % 2 == 0) || (coarse_end && j == half))) monitor(coarse);
        }
    };
    while (coarse.alive || fine.alive) {
        const double dist0 = domain.distance_to_boundary(x);
        const bool cnear = coarse.alive && dist0 < near_;
        const bool fnear0 = fine.alive && dist0 < near_fine_;
        half_step(cnear || fnear0, fnear0, cnear, false);
        const bool fnear1 = fine.alive && domain.distance_to_boundary(x) < near_fine_;
        half_step(cnear || fnear1, fnear1, cnear, true);
        if (n * u > cfg_.t_max) {
            std::ostringstream msg;
            msg << "path still inside the domain at t_max = " << cfg_.t_max;
            throw HorizonError(msg.str());
        }
    }
    return {coarse.rec, fine.rec};
}

ExitRecord simulate_until_exit(const PathSimulator& sim, const Domain& domain, const Point& start,
                               RandomStream& rng) {
    return sim.run(domain, start, rng);
}

// ---------------------------------------------------------------------------

int resolve_workers(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("SBMKIT_WORKERS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0 && v <= 4096) return int(v);
        throw std::invalid_argument(std::string("SBMKIT_WORKERS must be a positive integer, got '") + env + "'");
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

std::uint64_t derive_seed(std::uint64_t seed, const std::string& label) {
    std::uint64_t h = 1469598103934665603ull;  // FNV-1a
    for (unsigned char c : label) {
        h ^= c;
        h *= 1099511628211ull;
    }
    std::uint64_t z = seed ^ h;  // splitmix64 finalizer
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& body) {
    const std::size_t threads = std::min<std::size_t>(n, std::size_t(resolve_workers(workers)));
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto work = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n || failed.load()) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                failed = true;
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t k = 0; k < threads; ++k) pool.emplace_back(work);
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

std::vector<ExitRecord> simulate_exits(const PathSimulator& sim, const Domain& domain, const Point& start,
                                       std::size_t n, std::uint64_t seed, int workers) {
    if (!domain.contains(start)) throw std::invalid_argument("start point is not in the domain");
    std::vector<ExitRecord> out(n);
    parallel_for(n, workers, [&](std::size_t i) {
        RandomStream rng(seed, i);
        out[i] = sim.run(domain, start, rng);
    });
    return out;
}

HarmonicMeasure harmonic_measure(const PathSimulator& sim, const Domain& domain, const Point& start,
                                 const std::function<int(const Point&)>& cell, int cells, std::size_t n,
                                 std::uint64_t seed, int workers) {
    if (cells < 1) throw std::invalid_argument("harmonic_measure needs at least one cell");
    if (n == 0) throw std::invalid_argument("harmonic_measure needs at least one path");
    const auto exits = simulate_exits(sim, domain, start, n, seed, workers);
    HarmonicMeasure hm;
    hm.paths = n;
    hm.counts.assign(std::size_t(cells) + 1, 0);
    for (const auto& e : exits) {
        const int c = cell(e.exit_point);
        hm.counts[c >= 0 && c < cells ? std::size_t(c) : std::size_t(cells)]++;
    }
    for (std::size_t c : hm.counts) {
        const double p = double(c) / double(n);
        hm.probability.push_back(p);
        hm.se.push_back(std::sqrt(p * (1 - p) / double(n)));
    }
    return hm;
}

MeanSE mean_se(const std::vector<double>& values) {
    MeanSE r;
    r.n = values.size();
    if (r.n == 0) return r;
    r.mean = pairwise_sum(values.data(), r.n) / double(r.n);
    if (r.n < 2) return r;
    std::vector<double> sq(r.n);
    for (std::size_t i = 0; i < r.n; ++i) sq[i] = (values[i] - r.mean) * (values[i] - r.mean);
    r.se = std::sqrt(pairwise_sum(sq.data(), r.n) / double(r.n - 1) / double(r.n));
    return r;
}

}  // namespace sbmkit
