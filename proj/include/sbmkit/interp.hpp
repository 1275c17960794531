#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace sbmkit {

/// Monotone piecewise-cubic Hermite interpolant (Fritsch-Carlson slopes).
class Pchip {
public:
    Pchip() = default;
    Pchip(std::vector<double> x, std::vector<double> y);

    double operator()(double x) const;
    double front_x() const { return x_.front(); }
    double back_x() const { return x_.back(); }
    bool empty() const { return x_.empty(); }

private:
    std::vector<double> x_, y_, m_;
};

/// A positive function tabulated on a logarithmic grid and interpolated in
/// (log t, log f). Outside the table the end log-slopes are continued.
class LogLogTable {
public:
    LogLogTable() = default;
    LogLogTable(const std::function<double(double)>& f, double t_lo, double t_hi,
                int points_per_decade);
    LogLogTable(const std::vector<double>& t, const std::vector<double>& values);

    double operator()(double t) const;
    double t_lo() const { return std::exp(lo_); }
    double t_hi() const { return std::exp(hi_); }
    bool empty() const { return interp_.empty(); }

private:
    void finish(std::vector<double> logt, std::vector<double> logf);
    Pchip interp_;
    double lo_ = 0, hi_ = 0;
    double slope_lo_ = 0, slope_hi_ = 0;
    double f_lo_ = 0, f_hi_ = 0;
};

}  // namespace sbmkit
