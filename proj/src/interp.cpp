#include "sbmkit/interp.hpp"

namespace sbmkit {

Pchip::Pchip(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
    const std::size_t n = x_.size();
    if (n < 2 || y_.size() != n) throw std::invalid_argument("Pchip needs at least two matching points");
    for (std::size_t i = 1; i < n; ++i)
        if (!(x_[i] > x_[i - 1])) throw std::invalid_argument("Pchip abscissae must increase");
    std::vector<double> h(n - 1), delta(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        h[i] = x_[i + 1] - x_[i];
        delta[i] = (y_[i + 1] - y_[i]) / h[i];
    }
    m_.assign(n, 0.0);
    if (n == 2) {
        m_[0] = m_[1] = delta[0];
        return;
    }
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (delta[i - 1] * delta[i] <= 0) {
            m_[i] = 0;
        } else {
            const double w1 = 2 * h[i] + h[i - 1];
            const double w2 = h[i] + 2 * h[i - 1];
            m_[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
        }
    }
    auto end_slope = [](double h0, double h1, double d0, double d1) {
        double m = ((2 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
        if (m * d0 <= 0) return 0.0;
        if (d0 * d1 <= 0 && std::abs(m) > std::abs(3 * d0)) return 3 * d0;
        return m;
    };
    m_[0] = end_slope(h[0], h[1], delta[0], delta[1]);
    m_[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
}

double Pchip::operator()(double x) const {
    const std::size_t n = x_.size();
    std::size_t i;
    if (x <= x_.front()) {
        i = 0;
    } else if (x >= x_.back()) {
        i = n - 2;
    } else {
        i = static_cast<std::size_t>(std::upper_bound(x_.begin(), x_.end(), x) - x_.begin()) - 1;
    }
    const double h = x_[i + 1] - x_[i];
    const double s = (x - x_[i]) / h;
    const double s2 = s * s, s3 = s2 * s;
    const double h00 = 2 * s3 - 3 * s2 + 1;
    const double h10 = s3 - 2 * s2 + s;
    const double h01 = -2 * s3 + 3 * s2;
    const double h11 = s3 - s2;
    return h00 * y_[i] + h10 * h * m_[i] + h01 * y_[i + 1] + h11 * h * m_[i + 1];
}

LogLogTable::LogLogTable(const std::function<double(double)>& f, double t_lo, double t_hi,
                         int points_per_decade) {
    if (!(t_lo > 0 && t_hi > t_lo) || points_per_decade < 2)
        throw std::invalid_argument("LogLogTable: bad range");
    const double decades = std::log10(t_hi / t_lo);
    const int n = std::max(4, static_cast<int>(std::ceil(decades * points_per_decade)) + 1);
    std::vector<double> lt(static_cast<std::size_t>(n)), lf(static_cast<std::size_t>(n));
    const double a = std::log(t_lo), b = std::log(t_hi);
    for (int i = 0; i < n; ++i) {
        const double l = a + (b - a) * i / (n - 1);
        const double v = f(std::exp(l));
        if (!(v > 0) || !std::isfinite(v)) throw std::domain_error("LogLogTable: non-positive sample");
        lt[static_cast<std::size_t>(i)] = l;
        lf[static_cast<std::size_t>(i)] = std::log(v);
    }
    finish(std::move(lt), std::move(lf));
}

LogLogTable::LogLogTable(const std::vector<double>& t, const std::vector<double>& values) {
    std::vector<double> lt, lf;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (!(t[i] > 0 && values[i] > 0)) throw std::domain_error("LogLogTable: non-positive sample");
        lt.push_back(std::log(t[i]));
        lf.push_back(std::log(values[i]));
    }
    finish(std::move(lt), std::move(lf));
}

void LogLogTable::finish(std::vector<double> logt, std::vector<double> logf) {
    const std::size_t n = logt.size();
    lo_ = logt.front();
    hi_ = logt.back();
    f_lo_ = logf.front();
    f_hi_ = logf.back();
    slope_lo_ = (logf[1] - logf[0]) / (logt[1] - logt[0]);
    slope_hi_ = (logf[n - 1] - logf[n - 2]) / (logt[n - 1] - logt[n - 2]);
    interp_ = Pchip(std::move(logt), std::move(logf));
}

double LogLogTable::operator()(double t) const {
    const double l = std::log(t);
    if (l < lo_) return std::exp(f_lo_ + slope_lo_ * (l - lo_));
    if (l > hi_) return std::exp(f_hi_ + slope_hi_ * (l - hi_));
    return std::exp(interp_(l));
}

}  // namespace sbmkit
