#include "rewind_cli/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace rewindlab::svg {

namespace {

constexpr double kLeft = 64, kRight = 20, kTop = 34, kBottom = 48;

std::string num(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", x);
    return buf;
}

std::string tick(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", x);
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
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
        if (!std::isfinite(lo)) lo = 0, hi = 1;
        if (hi - lo < 1e-12) lo -= 0.5, hi += 0.5;
        const double pad = 0.04 * (hi - lo);
        lo -= pad;
        hi += pad;
    }
};

void body(std::ostringstream& os, const Plot& p, double y0) {
    const auto fx = [&](double v) { return p.log_x ? std::log10(v) : v; };
    Range xr, yr;
    for (const auto& s : p.series) {
        for (double v : s.x) xr.add(fx(v));
        for (double v : s.y) yr.add(v);
    }
    for (const auto& g : p.guides) yr.add(g.y);
    xr.settle();
    yr.settle();

    const double w = p.width - kLeft - kRight;
    const double h = p.height - kTop - kBottom;
    const auto sx = [&](double v) { return kLeft + (fx(v) - xr.lo) / (xr.hi - xr.lo) * w; };
    const auto sy = [&](double v) { return y0 + kTop + (1.0 - (v - yr.lo) / (yr.hi - yr.lo)) * h; };

    os << "<text x=\"" << num(p.width / 2) << "\" y=\"" << num(y0 + 20)
       << "\" text-anchor=\"middle\" font-size=\"14\">" << escape(p.title) << "</text>\n";
    os << "<rect x=\"" << num(kLeft) << "\" y=\"" << num(y0 + kTop) << "\" width=\"" << num(w)
       << "\" height=\"" << num(h) << "\" fill=\"none\" stroke=\"#333\"/>\n";

    for (int i = 0; i <= 4; ++i) {
        const double xv = xr.lo + (xr.hi - xr.lo) * i / 4.0;
        const double px = kLeft + w * i / 4.0;
        os << "<text x=\"" << num(px) << "\" y=\"" << num(y0 + kTop + h + 16)
           << "\" text-anchor=\"middle\" font-size=\"11\">" << tick(p.log_x ? std::pow(10.0, xv) : xv)
           << "</text>\n";
        const double yv = yr.lo + (yr.hi - yr.lo) * i / 4.0;
        os << "<text x=\"" << num(kLeft - 6) << "\" y=\"" << num(sy(yv) + 4)
           << "\" text-anchor=\"end\" font-size=\"11\">" << tick(yv) << "</text>\n";
    }
    os << "<text x=\"" << num(kLeft + w / 2) << "\" y=\"" << num(y0 + p.height - 8)
       << "\" text-anchor=\"middle\" font-size=\"12\">" << escape(p.xlabel) << "</text>\n";
    os << "<text x=\"14\" y=\"" << num(y0 + kTop + h / 2) << "\" font-size=\"12\" transform=\"rotate(-90 14 "
       << num(y0 + kTop + h / 2) << ")\" text-anchor=\"middle\">" << escape(p.ylabel) << "</text>\n";

    for (const auto& g : p.guides) {
        os << "<line x1=\"" << num(kLeft) << "\" x2=\"" << num(kLeft + w) << "\" y1=\"" << num(sy(g.y))
           << "\" y2=\"" << num(sy(g.y)) << "\" stroke=\"#888\" stroke-dasharray=\"5,4\"/>\n";
        os << "<text x=\"" << num(kLeft + w - 4) << "\" y=\"" << num(sy(g.y) - 4)
           << "\" text-anchor=\"end\" font-size=\"10\" fill=\"#555\">" << escape(g.label) << "</text>\n";
    }

    double legend_y = y0 + kTop + 14;
    for (const auto& s : p.series) {
        const std::size_t n = std::min(s.x.size(), s.y.size());
        if (s.scatter) {
            os << "<g fill=\"" << s.color << "\" fill-opacity=\"0.6\">\n";
            for (std::size_t i = 0; i < n; ++i) {
                if (!std::isfinite(s.y[i])) continue;
                os << "<circle cx=\"" << num(sx(s.x[i])) << "\" cy=\"" << num(sy(s.y[i])) << "\" r=\"2\"/>\n";
            }
            os << "</g>\n";
        } else {
            os << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"";
            for (std::size_t i = 0; i < n; ++i) {
                if (!std::isfinite(s.y[i])) continue;
                os << num(sx(s.x[i])) << ',' << num(sy(s.y[i])) << ' ';
            }
            os << "\"/>\n";
        }
        if (!s.name.empty()) {
            os << "<rect x=\"" << num(kLeft + 8) << "\" y=\"" << num(legend_y - 8)
               << "\" width=\"10\" height=\"10\" fill=\"" << s.color << "\"/>";
            os << "<text x=\"" << num(kLeft + 22) << "\" y=\"" << num(legend_y + 1) << "\" font-size=\"11\">"
               << escape(s.name) << "</text>\n";
            legend_y += 15;
        }
    }
}

}  // namespace

const char* palette(std::size_t i) {
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"};
    return colors[i % 6];
}

std::string render(const Plot& plot) { return render_panels({plot}); }

std::string render_panels(const std::vector<Plot>& plots) {
    double width = 0, height = 0;
    for (const auto& p : plots) {
        width = std::max(width, p.width);
        height += p.height;
    }
    std::ostringstream os;
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
       << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\"" << num(height)
       << "\" viewBox=\"0 0 " << num(width) << ' ' << num(height) << "\" font-family=\"sans-serif\">\n"
       << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    double y0 = 0;
    for (const auto& p : plots) {
        body(os, p, y0);
        y0 += p.height;
    }
    os << "</svg>\n";
    return os.str();
}

}  // namespace rewindlab::svg
