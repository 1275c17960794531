#pragma once

// Small generators for property tests. Each case draws from its own seeded
// engine, so failures reproduce from the printed case index.

#include <cmath>
#include <cstdint>
#include <random>

#include "sbmkit/bernstein.hpp"
#include "sbmkit/domain.hpp"

namespace gen {

class Gen {
public:
    explicit Gen(std::uint64_t seed) : eng_(seed) {}

    double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(eng_); }
    double log_uniform(double a, double b) { return std::exp(uniform(std::log(a), std::log(b))); }
    int integer(int a, int b) { return std::uniform_int_distribution<int>(a, b)(eng_); }

    /// Family with parameters inside the supported ranges.
    sbmkit::BernsteinFamily family() {
        using sbmkit::Family;
        const double alpha = uniform(0.2, 1.9);
        switch (integer(0, 4)) {
            case 0: return {Family::Stable, alpha};
            case 1: return {Family::Relativistic, alpha};
            case 2: return {Family::StableMixture, alpha, uniform(0.1, 0.95) * alpha};
            case 3: return {Family::LogWeightPos, alpha, uniform(0.1, 0.9) * (2 - alpha)};
            default: return {Family::LogWeightNeg, alpha, uniform(0.1, 0.9) * alpha};
        }
    }

    sbmkit::Point point_in_box(int d, double h) {
        sbmkit::Point p{};
        for (int k = 0; k < d; ++k) p[k] = uniform(-h, h);
        return p;
    }

private:
    std::mt19937_64 eng_;
};

/// Runs body(gen, case) for n cases seeded from base.
template <class F>
void for_all(int n, std::uint64_t base, F&& body) {
    for (int i = 0; i < n; ++i) {
        Gen g(base * 1000003u + std::uint64_t(i));
        body(g, i);
    }
}

}  // namespace gen
