#include "sbmkit/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace sbmkit {

namespace {

constexpr double kWidth = 640, kHeight = 420;
constexpr double kLeft = 80, kRight = 170, kTop = 40, kBottom = 60;

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

std::string esc(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string tick_text(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

struct Axis {
    bool log;
    double lo, hi;  // in transformed units

    double transform(double v) const { return log ? std::log10(v) : v; }
    bool usable(double v) const { return std::isfinite(v) && (!log || v > 0); }

    std::vector<double> ticks() const {
        std::vector<double> t;
        if (log) {
            const int a = int(std::ceil(lo - 1e-9)), b = int(std::floor(hi + 1e-9));
            const int step = std::max(1, (b - a + 1) / 8);
            for (int k = a; k <= b; k += step) t.push_back(std::pow(10.0, k));
            return t;
        }
        const double span = hi - lo;
        const double raw = span / 6;
        const double mag = std::pow(10.0, std::floor(std::log10(raw)));
        double step = mag;
        for (double m : {1.0, 2.0, 5.0, 10.0})
            if (m * mag >= raw) {
                step = m * mag;
                break;
            }
        for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * span; v += step)
            t.push_back(std::fabs(v) < 1e-12 * span ? 0.0 : v);
        return t;
    }
};

Axis make_axis(bool log, const std::vector<double>& values) {
    double lo = INFINITY, hi = -INFINITY;
    for (double v : values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (hi - lo < 1e-12 * std::max(1.0, std::fabs(hi))) {
        const double pad = log ? 0.5 : std::max(0.5, 0.1 * std::fabs(hi));
        lo -= pad;
        hi += pad;
    } else {
        const double pad = 0.05 * (hi - lo);
        lo -= pad;
        hi += pad;
    }
    return {log, lo, hi};
}

}  // namespace

std::string render_svg(const PlotSpec& spec) {
    if (spec.series.empty()) throw std::invalid_argument("plot has no series");
    Axis probe_x{spec.log_x, 0, 1}, probe_y{spec.log_y, 0, 1};
    std::vector<double> xs, ys;
    for (const auto& s : spec.series) {
        if (s.x.size() != s.y.size()) throw std::invalid_argument("series '" + s.label + "' has mismatched lengths");
        for (std::size_t i = 0; i < s.x.size(); ++i)
            if (probe_x.usable(s.x[i]) && probe_y.usable(s.y[i])) {
                xs.push_back(probe_x.transform(s.x[i]));
                ys.push_back(probe_y.transform(s.y[i]));
            }
    }
    if (xs.empty()) throw std::invalid_argument("plot has no drawable points");
    if (spec.reference && probe_y.usable(*spec.reference)) ys.push_back(probe_y.transform(*spec.reference));
    const Axis ax = make_axis(spec.log_x, xs), ay = make_axis(spec.log_y, ys);
    const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
    auto px = [&](double v) { return kLeft + (ax.transform(v) - ax.lo) / (ax.hi - ax.lo) * pw; };
    auto py = [&](double v) { return kTop + ph - (ay.transform(v) - ay.lo) / (ay.hi - ay.lo) * ph; };

    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    o << "<rect x=\"0\" y=\"0\" width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n";
    o << "<text x=\"" << num(kLeft + pw / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
      << esc(spec.title) << "</text>\n";
    o << "<rect x=\"" << num(kLeft) << "\" y=\"" << num(kTop) << "\" width=\"" << num(pw) << "\" height=\""
      << num(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (double t : ax.ticks()) {
        const double x = px(t);
        o << "<line x1=\"" << num(x) << "\" y1=\"" << num(kTop + ph) << "\" x2=\"" << num(x) << "\" y2=\""
          << num(kTop + ph + 5) << "\" stroke=\"black\"/>\n";
        o << "<text x=\"" << num(x) << "\" y=\"" << num(kTop + ph + 18) << "\" text-anchor=\"middle\">"
          << tick_text(t) << "</text>\n";
    }
    for (double t : ay.ticks()) {
        const double y = py(t);
        o << "<line x1=\"" << num(kLeft - 5) << "\" y1=\"" << num(y) << "\" x2=\"" << num(kLeft) << "\" y2=\""
          << num(y) << "\" stroke=\"black\"/>\n";
        o << "<text x=\"" << num(kLeft - 8) << "\" y=\"" << num(y + 4) << "\" text-anchor=\"end\">" << tick_text(t)
          << "</text>\n";
    }
    o << "<text x=\"" << num(kLeft + pw / 2) << "\" y=\"" << num(kHeight - 15) << "\" text-anchor=\"middle\">"
      << esc(spec.x_label) << "</text>\n";
    o << "<text x=\"18\" y=\"" << num(kTop + ph / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
      << num(kTop + ph / 2) << ")\">" << esc(spec.y_label) << "</text>\n";

    double legend_y = kTop + 10;
    const double legend_x = kLeft + pw + 15;
    if (spec.reference && probe_y.usable(*spec.reference)) {
        const double y = py(*spec.reference);
        o << "<line class=\"reference\" x1=\"" << num(kLeft) << "\" y1=\"" << num(y) << "\" x2=\"" << num(kLeft + pw)
          << "\" y2=\"" << num(y) << "\" stroke=\"gray\" stroke-dasharray=\"6 4\"/>\n";
        o << "<line x1=\"" << num(legend_x) << "\" y1=\"" << num(legend_y) << "\" x2=\"" << num(legend_x + 20)
          << "\" y2=\"" << num(legend_y) << "\" stroke=\"gray\" stroke-dasharray=\"6 4\"/>\n";
        o << "<text x=\"" << num(legend_x + 26) << "\" y=\"" << num(legend_y + 4) << "\">"
          << esc(spec.reference_label) << " = " << tick_text(*spec.reference) << "</text>\n";
        legend_y += 18;
    }
    for (std::size_t k = 0; k < spec.series.size(); ++k) {
        const auto& s = spec.series[k];
        const char* color = kColors[k % (sizeof kColors / sizeof kColors[0])];
        std::ostringstream pts;
        for (std::size_t i = 0; i < s.x.size(); ++i)
            if (ax.usable(s.x[i]) && ay.usable(s.y[i])) pts << (pts.tellp() > 0 ? " " : "") << num(px(s.x[i])) << "," << num(py(s.y[i]));
        o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"" << pts.str()
          << "\"/>\n";
        for (std::size_t i = 0; i < s.x.size(); ++i)
            if (ax.usable(s.x[i]) && ay.usable(s.y[i]))
                o << "<circle cx=\"" << num(px(s.x[i])) << "\" cy=\"" << num(py(s.y[i])) << "\" r=\"3\" fill=\""
                  << color << "\"/>\n";
        o << "<line x1=\"" << num(legend_x) << "\" y1=\"" << num(legend_y) << "\" x2=\"" << num(legend_x + 20)
          << "\" y2=\"" << num(legend_y) << "\" stroke=\"" << color << "\" stroke-width=\"1.5\"/>\n";
        o << "<text class=\"legend\" x=\"" << num(legend_x + 26) << "\" y=\"" << num(legend_y + 4) << "\">"
          << esc(s.label) << "</text>\n";
        legend_y += 18;
    }
    o << "</svg>\n";
    return o.str();
}

void emit_plot(const PlotSpec& spec, const std::string& path) {
    const std::string svg = render_svg(spec);
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path + " for writing");
    f << svg;
    if (!f) throw std::runtime_error("failed writing " + path);
}

}  // namespace sbmkit
