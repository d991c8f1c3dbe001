#include "invdesc/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace invdesc {
namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 400.0;
constexpr double kLeft = 60.0;
constexpr double kRight = 140.0;  // legend column
constexpr double kTop = 30.0;
constexpr double kBottom = 40.0;

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string label_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

std::string escape(const std::string& s) {
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

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();

    void add(double v) {
        if (!std::isfinite(v)) return;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    void settle() {
        if (!std::isfinite(lo)) lo = hi = 0.0;
        if (hi - lo < 1e-12) {
            lo -= 0.5;
            hi += 0.5;
        }
    }
};

}  // namespace

std::string render_svg(const SvgPlot& plot) {
    Range xr, yr;
    for (const auto& s : plot.series) {
        for (double v : s.x) xr.add(v);
        for (double v : s.y) yr.add(v);
    }
    for (const auto& b : plot.bands) {
        for (double v : b.x) xr.add(v);
        for (double v : b.lo) yr.add(v);
        for (double v : b.hi) yr.add(v);
    }
    xr.settle();
    yr.settle();
    const double pw = kWidth - kLeft - kRight;
    const double ph = kHeight - kTop - kBottom;
    auto px = [&](double x) { return kLeft + (x - xr.lo) / (xr.hi - xr.lo) * pw; };
    auto py = [&](double y) { return kTop + (yr.hi - y) / (yr.hi - yr.lo) * ph; };

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 640 400\" width=\"640\" height=\"400\">\n";
    out << "<rect width=\"640\" height=\"400\" fill=\"white\"/>\n";
    out << "<text x=\"" << num(kLeft) << "\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\">"
        << escape(plot.title) << "</text>\n";
    out << "<rect x=\"" << num(kLeft) << "\" y=\"" << num(kTop) << "\" width=\"" << num(pw) << "\" height=\""
        << num(ph) << "\" fill=\"none\" stroke=\"#444\"/>\n";
    for (int t = 0; t <= 4; ++t) {
        const double fx = xr.lo + (xr.hi - xr.lo) * t / 4.0;
        const double fy = yr.lo + (yr.hi - yr.lo) * t / 4.0;
        out << "<text x=\"" << num(px(fx)) << "\" y=\"" << num(kHeight - kBottom + 15)
            << "\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"middle\">" << label_num(fx)
            << "</text>\n";
        out << "<text x=\"" << num(kLeft - 5) << "\" y=\"" << num(py(fy) + 3)
            << "\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"end\">" << label_num(fy) << "</text>\n";
    }
    out << "<text x=\"" << num(kLeft + pw / 2) << "\" y=\"" << num(kHeight - 8)
        << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">" << escape(plot.x_label)
        << "</text>\n";
    out << "<text x=\"14\" y=\"" << num(kTop + ph / 2) << "\" font-family=\"sans-serif\" font-size=\"12\" "
        << "text-anchor=\"middle\" transform=\"rotate(-90 14 " << num(kTop + ph / 2) << ")\">"
        << escape(plot.y_label) << "</text>\n";

    for (const auto& b : plot.bands) {
        if (b.x.empty() || b.lo.size() != b.x.size() || b.hi.size() != b.x.size()) continue;
        out << "<polygon fill=\"" << b.color << "\" fill-opacity=\"" << num(b.opacity) << "\" stroke=\"none\" points=\"";
        for (std::size_t i = 0; i < b.x.size(); ++i) out << num(px(b.x[i])) << ',' << num(py(b.hi[i])) << ' ';
        for (std::size_t i = b.x.size(); i-- > 0;) out << num(px(b.x[i])) << ',' << num(py(b.lo[i])) << ' ';
        out << "\"/>\n";
    }
    double legend_y = kTop + 10;
    for (const auto& s : plot.series) {
        const std::size_t n = std::min(s.x.size(), s.y.size());
        out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"" << num(s.stroke_width)
            << "\" stroke-opacity=\"" << num(s.opacity) << "\" points=\"";
        for (std::size_t i = 0; i < n; ++i) {
            if (!std::isfinite(s.y[i])) continue;
            out << num(px(s.x[i])) << ',' << num(py(s.y[i])) << ' ';
        }
        out << "\"/>\n";
        if (!s.label.empty()) {
            const double lx = kWidth - kRight + 10;
            out << "<line x1=\"" << num(lx) << "\" y1=\"" << num(legend_y) << "\" x2=\"" << num(lx + 20) << "\" y2=\""
                << num(legend_y) << "\" stroke=\"" << s.color << "\" stroke-width=\"2\"/>\n";
            out << "<text x=\"" << num(lx + 25) << "\" y=\"" << num(legend_y + 4)
                << "\" font-family=\"sans-serif\" font-size=\"11\">" << escape(s.label) << "</text>\n";
            legend_y += 16;
        }
    }
    out << "</svg>\n";
    return out.str();
}

void write_svg(const SvgPlot& plot, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << render_svg(plot);
}

}  // namespace invdesc
