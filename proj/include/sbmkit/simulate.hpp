#pragma once

// Monte Carlo engine: subordinator increments, paths of X_t = W_{S_t}
// (E exp(i xi W_t) = exp(-t xi^2)), and first exits from catalog domains.

#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "sbmkit/bernstein.hpp"
#include "sbmkit/domain.hpp"
#include "sbmkit/rng.hpp"

namespace sbmkit {

class SimulationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class HorizonError : public SimulationError {
public:
    using SimulationError::SimulationError;
};

struct PathConfig {
    double dt = 1e-4;           // base time step
    double t_max = 1e3;         // horizon
    double eps_jump = 1e-10;    // small-jump truncation for the compound-Poisson scheme
    std::uint64_t seed = 0;
    int refine_levels = 8;      // near the boundary a step is split into 2^refine_levels exact substeps
    double near_factor = 3.0;   // "near" = within near_factor * sigma(dt) of the complement
    // When positive, steps away from the boundary grow to the time at which the
    // typical displacement is distance / adaptive, capped by dt_max.
    double adaptive = 0.0;
    double dt_max = 0.0;

    void validate() const;
};

struct ExitRecord {
    Point start{};
    double exit_time = 0.0;
    Point exit_point{};
    Point pre_jump_point{};
    bool jumped = false;
    bool stopped = false;  // halted by the stop predicate; exit_point is the position then
    std::uint64_t steps = 0;
};

/// Exit records of one path observed on the dt grid and on the dt/2 grid.
struct ExitPair {
    ExitRecord coarse;
    ExitRecord fine;
};

/// Called once per monitored step with the position at the start of the
/// step and the step length (left-point occupation sums).
using StepObserver = std::function<void(const Point&, double)>;
/// Checked after every monitored step; returning true halts the path.
using StopPredicate = std::function<bool(const Point&)>;

/// Draws S_h exactly (or, for log-weight families, up to the eps_jump truncation).
class IncrementSampler {
public:
    IncrementSampler(const SubordinatorModel& model, double eps_jump);

    double operator()(double h, RandomStream& rng) const;
    /// Bound on rejection proposals per relativistic draw.
    static constexpr int max_proposals = 10'000'000;

    /// Positive alpha/2-stable draw with E exp(-lambda S) = exp(-h lambda^{a}).
    static double positive_stable(double a, double h, RandomStream& rng);

    /// Compound-Poisson rate above eps_jump and compensating drift (log-weight families).
    double jump_rate() const;
    double drift() const;

private:
    struct JumpTable;
    Family kind_;
    double alpha_;
    double beta_;
    std::shared_ptr<const JumpTable> jumps_;
};

double sample_subordinator_increment(const IncrementSampler& sampler, double dt, RandomStream& rng);

class PathSimulator {
public:
    PathSimulator(SubordinatorModel model, PathConfig cfg);

    const SubordinatorModel& model() const { return model_; }
    const PathConfig& config() const { return cfg_; }
    const IncrementSampler& sampler() const { return sampler_; }

    /// Typical displacement scale sqrt(2 / phi^{-1}(1/h)) of X over time h.
    double sigma(double h) const;
    /// X_h - X_0 in dimension d.
    Point displacement(double h, int d, RandomStream& rng) const;

    ExitRecord run(const Domain& domain, const Point& start, RandomStream& rng,
                   const StepObserver* observer = nullptr, const StopPredicate* stop = nullptr) const;
    /// One path monitored at both dt and dt/2, each with its own refinement rule.
    ExitPair run_coupled(const Domain& domain, const Point& start, RandomStream& rng) const;

private:
    double step_length(double dist) const;

    SubordinatorModel model_;
    PathConfig cfg_;
    IncrementSampler sampler_;
    bool cauchy_;       // stable alpha = 1: X_h = h Z / |Z0|
    double near_;       // near_factor * sigma(dt)
    double near_fine_;  // near_factor * sigma(dt / 2)
};

ExitRecord simulate_until_exit(const PathSimulator& sim, const Domain& domain, const Point& start,
                               RandomStream& rng);

/// Workers requested, else SBMKIT_WORKERS, else the hardware thread count.
int resolve_workers(int requested);

/// Seed for an experiment derived from the run seed and a label, so that
/// experiments in one run use disjoint streams.
std::uint64_t derive_seed(std::uint64_t seed, const std::string& label);

/// Runs body(i) for i in [0, n) on the given number of threads. Each index is
/// processed exactly once; the first exception is rethrown after joining.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& body);

/// n independent exits from start; path i uses stream (seed, i).
std::vector<ExitRecord> simulate_exits(const PathSimulator& sim, const Domain& domain, const Point& start,
                                       std::size_t n, std::uint64_t seed, int workers = 0);

struct HarmonicMeasure {
    std::vector<double> probability;  // per cell, last entry = no cell
    std::vector<double> se;
    std::vector<std::size_t> counts;
    std::size_t paths = 0;
};

/// Exit-position frequencies per cell of the exterior. cell(y) returns an
/// index in [0, cells) or -1.
HarmonicMeasure harmonic_measure(const PathSimulator& sim, const Domain& domain, const Point& start,
                                 const std::function<int(const Point&)>& cell, int cells, std::size_t n,
                                 std::uint64_t seed, int workers = 0);

struct MeanSE {
    double mean = 0.0;
    double se = 0.0;
    std::size_t n = 0;
};

/// Mean and standard error with pairwise summation.
MeanSE mean_se(const std::vector<double>& values);

}  // namespace sbmkit
