#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "util.hpp"

namespace plotdyn::svg {

inline std::string escape(std::string_view s) {
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

inline const std::string& palette(std::size_t i) {
    static const std::array<std::string, 12> colors = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                                       "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
                                                       "#bcbd22", "#17becf", "#393b79", "#637939"};
    return colors[i % colors.size()];
}

/// Fixed-precision number for coordinates; keeps files small and stable.
inline std::string num(double v) {
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(2);
    os << (std::abs(v) < 0.005 ? 0.0 : v);
    return os.str();
}

struct Series {
    std::string name;
    std::vector<double> values;
    bool dashed = false;
};

struct Frame {
    double width = 720, height = 420;
    double left = 60, right = 150, top = 40, bottom = 50;
    double plot_w() const { return width - left - right; }
    double plot_h() const { return height - top - bottom; }
};

/// Line chart of series over 1-based x positions with y in [y_min, y_max].
inline std::string line_chart(const std::string& title, const std::vector<Series>& series, std::string_view x_label,
                              double y_min = 0.0, double y_max = 1.0) {
    Frame f;
    std::size_t n = 0;
    for (const auto& s : series) n = std::max(n, s.values.size());
    const double x_span = n > 1 ? static_cast<double>(n - 1) : 1.0;
    auto px = [&](std::size_t i) { return f.left + f.plot_w() * static_cast<double>(i) / x_span; };
    auto py = [&](double v) { return f.top + f.plot_h() * (1.0 - (v - y_min) / (y_max - y_min)); };

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << f.width << "\" height=\"" << f.height
       << "\" viewBox=\"0 0 " << f.width << ' ' << f.height << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << num(f.left) << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"15\">" << escape(title)
       << "</text>\n";
    // axes and horizontal grid
    for (int g = 0; g <= 4; ++g) {
        const double v = y_min + (y_max - y_min) * g / 4.0;
        os << "<line x1=\"" << num(f.left) << "\" y1=\"" << num(py(v)) << "\" x2=\"" << num(f.left + f.plot_w())
           << "\" y2=\"" << num(py(v)) << "\" stroke=\"#ddd\"/>\n";
        os << "<text x=\"" << num(f.left - 8) << "\" y=\"" << num(py(v) + 4)
           << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">" << num(v) << "</text>\n";
    }
    for (std::size_t i = 0; i < n; ++i) {
        os << "<text x=\"" << num(px(i)) << "\" y=\"" << num(f.top + f.plot_h() + 16)
           << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">" << i + 1 << "</text>\n";
    }
    os << "<text x=\"" << num(f.left + f.plot_w() / 2) << "\" y=\"" << num(f.height - 10)
       << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">" << escape(x_label) << "</text>\n";
    os << "<rect x=\"" << num(f.left) << "\" y=\"" << num(f.top) << "\" width=\"" << num(f.plot_w()) << "\" height=\""
       << num(f.plot_h()) << "\" fill=\"none\" stroke=\"black\"/>\n";

    for (std::size_t s = 0; s < series.size(); ++s) {
        const auto& ser = series[s];
        os << "<polyline fill=\"none\" stroke=\"" << palette(s) << "\" stroke-width=\"2\"";
        if (ser.dashed) os << " stroke-dasharray=\"6,3\"";
        os << " points=\"";
        for (std::size_t i = 0; i < ser.values.size(); ++i) {
            os << (i ? " " : "") << num(px(i)) << ',' << num(py(ser.values[i]));
        }
        os << "\"/>\n";
        const double ly = f.top + 14.0 * static_cast<double>(s) + 6;
        const double lx = f.left + f.plot_w() + 12;
        os << "<line x1=\"" << num(lx) << "\" y1=\"" << num(ly) << "\" x2=\"" << num(lx + 18) << "\" y2=\"" << num(ly)
           << "\" stroke=\"" << palette(s) << "\" stroke-width=\"2\"" << (ser.dashed ? " stroke-dasharray=\"6,3\"" : "")
           << "/>\n";
        os << "<text x=\"" << num(lx + 24) << "\" y=\"" << num(ly + 4) << "\" font-family=\"sans-serif\" font-size=\"11\">"
           << escape(ser.name) << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

struct ScatterPoint {
    double x = 0.0, y = 0.0;
    int group = 0;
};

/// Scatter plot coloured by group, axes scaled to the data range.
inline std::string scatter(const std::string& title, const std::vector<ScatterPoint>& points, std::string_view x_label,
                           std::string_view y_label) {
    Frame f;
    f.right = 30;
    double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    if (!points.empty()) {
        x0 = x1 = points.front().x;
        y0 = y1 = points.front().y;
        for (const auto& p : points) {
            x0 = std::min(x0, p.x);
            x1 = std::max(x1, p.x);
            y0 = std::min(y0, p.y);
            y1 = std::max(y1, p.y);
        }
    }
    if (x1 - x0 < 1e-12) x1 = x0 + 1.0;
    if (y1 - y0 < 1e-12) y1 = y0 + 1.0;
    auto px = [&](double v) { return f.left + f.plot_w() * (v - x0) / (x1 - x0); };
    auto py = [&](double v) { return f.top + f.plot_h() * (1.0 - (v - y0) / (y1 - y0)); };

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << f.width << "\" height=\"" << f.height
       << "\" viewBox=\"0 0 " << f.width << ' ' << f.height << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << num(f.left) << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"15\">" << escape(title)
       << "</text>\n";
    os << "<rect x=\"" << num(f.left) << "\" y=\"" << num(f.top) << "\" width=\"" << num(f.plot_w()) << "\" height=\""
       << num(f.plot_h()) << "\" fill=\"none\" stroke=\"black\"/>\n";
    os << "<text x=\"" << num(f.left + f.plot_w() / 2) << "\" y=\"" << num(f.height - 10)
       << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">" << escape(x_label) << "</text>\n";
    os << "<text x=\"16\" y=\"" << num(f.top + f.plot_h() / 2) << "\" font-family=\"sans-serif\" font-size=\"12\" "
       << "text-anchor=\"middle\" transform=\"rotate(-90 16 " << num(f.top + f.plot_h() / 2) << ")\">"
       << escape(y_label) << "</text>\n";
    for (const auto& p : points) {
        os << "<circle cx=\"" << num(px(p.x)) << "\" cy=\"" << num(py(p.y)) << "\" r=\"2.5\" fill=\""
           << palette(static_cast<std::size_t>(std::max(0, p.group))) << "\" fill-opacity=\"0.8\"/>\n";
    }
    os << "</svg>\n";
    return os.str();
}

}  // namespace plotdyn::svg
