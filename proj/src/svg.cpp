#include "speclab/svg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "speclab/format.hpp"

namespace speclab {

namespace {

constexpr double kWidth = 960.0;
constexpr double kHeight = 540.0;
constexpr double kLeft = 72.0;
constexpr double kRight = 24.0;
constexpr double kTop = 48.0;
constexpr double kBottom = 56.0;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                          "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string escape(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    for (char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            default: out += c;
        }
    }
    return out;
}

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();

    void include(double v) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    void finalize() {
        if (!(lo <= hi)) {
            lo = 0.0;
            hi = 1.0;
        }
        if (lo == hi) {
            const double pad = lo == 0.0 ? 0.5 : std::abs(lo) * 0.1;
            lo -= pad;
            hi += pad;
        }
    }
};

std::vector<double> nice_ticks(const Range& r, int target = 6) {
    const double raw = (r.hi - r.lo) / target;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    const double norm = raw / mag;
    const double step = mag * (norm < 1.5 ? 1.0 : norm < 3.0 ? 2.0 : norm < 7.0 ? 5.0 : 10.0);
    std::vector<double> ticks;
    double t = std::ceil(r.lo / step) * step;
    const double eps = step * 1e-9;
    while (t <= r.hi + eps) {
        ticks.push_back(std::abs(t) < eps ? 0.0 : t);
        t += step;
    }
    return ticks;
}

std::string tick_label(double v) {
    if (v == 0.0) return "0";
    const double a = std::abs(v);
    if (a >= 1e5 || a < 1e-3) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.2g", v);
        return buf;
    }
    std::string s = fmt_fixed(v, a >= 100.0 ? 0 : a >= 1.0 ? 2 : 4);
    while (s.find('.') != std::string::npos && (s.back() == '0' || s.back() == '.')) {
        const char c = s.back();
        s.pop_back();
        if (c == '.') break;
    }
    return s;
}

}  // namespace

SvgLineChart::SvgLineChart(std::string title, std::string x_label, std::string y_label)
    : title_(std::move(title)), x_label_(std::move(x_label)), y_label_(std::move(y_label)) {}

void SvgLineChart::add_series(std::string name, std::vector<double> xs, std::vector<double> ys) {
    series_.push_back({std::move(name), std::move(xs), std::move(ys)});
}

void SvgLineChart::set_note(std::string note) { note_ = std::move(note); }

std::string SvgLineChart::render() const {
    Range xr, yr;
    for (const Series& s : series_) {
        for (double v : s.xs) xr.include(v);
        for (double v : s.ys) yr.include(v);
    }
    xr.finalize();
    yr.finalize();

    const double plot_w = kWidth - kLeft - kRight;
    const double plot_h = kHeight - kTop - kBottom;
    const auto px = [&](double x) { return kLeft + (x - xr.lo) / (xr.hi - xr.lo) * plot_w; };
    const auto py = [&](double y) { return kTop + plot_h - (y - yr.lo) / (yr.hi - yr.lo) * plot_h; };

    std::string out;
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " + tick_label(kWidth) +
           " " + tick_label(kHeight) + "\" font-family=\"sans-serif\" font-size=\"13\">\n";
    out += "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
    out += "<text x=\"" + fmt_fixed(kWidth / 2, 1) +
           "\" y=\"22\" text-anchor=\"middle\" font-size=\"16\">" + escape(title_) + "</text>\n";
    if (!note_.empty()) {
        out += "<text x=\"" + fmt_fixed(kWidth / 2, 1) +
               "\" y=\"38\" text-anchor=\"middle\" fill=\"#666666\" font-size=\"12\">" +
               escape(note_) + "</text>\n";
    }

    for (double t : nice_ticks(xr)) {
        const double x = px(t);
        out += "<line x1=\"" + fmt_fixed(x, 2) + "\" y1=\"" + fmt_fixed(kTop, 2) + "\" x2=\"" +
               fmt_fixed(x, 2) + "\" y2=\"" + fmt_fixed(kTop + plot_h, 2) +
               "\" stroke=\"#dddddd\"/>\n";
        out += "<text x=\"" + fmt_fixed(x, 2) + "\" y=\"" + fmt_fixed(kTop + plot_h + 18, 2) +
               "\" text-anchor=\"middle\">" + tick_label(t) + "</text>\n";
    }
    for (double t : nice_ticks(yr)) {
        const double y = py(t);
        out += "<line x1=\"" + fmt_fixed(kLeft, 2) + "\" y1=\"" + fmt_fixed(y, 2) + "\" x2=\"" +
               fmt_fixed(kLeft + plot_w, 2) + "\" y2=\"" + fmt_fixed(y, 2) +
               "\" stroke=\"#dddddd\"/>\n";
        out += "<text x=\"" + fmt_fixed(kLeft - 8, 2) + "\" y=\"" + fmt_fixed(y + 4, 2) +
               "\" text-anchor=\"end\">" + tick_label(t) + "</text>\n";
    }
    out += "<rect x=\"" + fmt_fixed(kLeft, 2) + "\" y=\"" + fmt_fixed(kTop, 2) + "\" width=\"" +
           fmt_fixed(plot_w, 2) + "\" height=\"" + fmt_fixed(plot_h, 2) +
           "\" fill=\"none\" stroke=\"#333333\"/>\n";

    for (std::size_t i = 0; i < series_.size(); ++i) {
        const Series& s = series_[i];
        const char* color = kPalette[i % std::size(kPalette)];
        out += "<polyline fill=\"none\" stroke=\"";
        out += color;
        out += "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t k = 0; k < s.xs.size(); ++k) {
            if (k > 0) out += ' ';
            out += fmt_fixed(px(s.xs[k]), 2) + "," + fmt_fixed(py(s.ys[k]), 2);
        }
        out += "\"/>\n";
    }

    // Legend, top-right corner of the plot area.
    for (std::size_t i = 0; i < series_.size(); ++i) {
        const double y = kTop + 16 + 18 * static_cast<double>(i);
        const double x = kLeft + plot_w - 150;
        out += "<line x1=\"" + fmt_fixed(x, 2) + "\" y1=\"" + fmt_fixed(y - 4, 2) + "\" x2=\"" +
               fmt_fixed(x + 22, 2) + "\" y2=\"" + fmt_fixed(y - 4, 2) + "\" stroke=\"";
        out += kPalette[i % std::size(kPalette)];
        out += "\" stroke-width=\"2\"/>\n";
        out += "<text x=\"" + fmt_fixed(x + 28, 2) + "\" y=\"" + fmt_fixed(y, 2) + "\">" +
               escape(series_[i].name) + "</text>\n";
    }

    out += "<text x=\"" + fmt_fixed(kLeft + plot_w / 2, 1) + "\" y=\"" +
           fmt_fixed(kHeight - 14, 1) + "\" text-anchor=\"middle\">" + escape(x_label_) +
           "</text>\n";
    out += "<text x=\"18\" y=\"" + fmt_fixed(kTop + plot_h / 2, 1) +
           "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " +
           fmt_fixed(kTop + plot_h / 2, 1) + ")\">" + escape(y_label_) + "</text>\n";
    out += "</svg>\n";
    return out;
}

}  // namespace speclab
